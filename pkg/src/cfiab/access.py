"""Access-link (AP -> users) hybrid precoding.

Each AP builds its analog matrix from the phases of the per-user matched
filters and then removes inter-user interference with a block
diagonalization (BD) digital stage. The fully digital, random-analog and
centralized variants used as baselines live here too.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import BDRankError
from .numerics import RANK_TOL, svd

log = logging.getLogger(__name__)


@dataclass
class AccessPrecoder:
    """Hybrid precoder W = analog @ digital of one AP."""

    analog: np.ndarray
    digital: np.ndarray
    ap_index: int = 0
    inactive_users: tuple = ()

    @property
    def matrix(self) -> np.ndarray:
        return self.analog @ self.digital


@dataclass
class AccessLinkResult:
    sinrs: np.ndarray
    signal_power: np.ndarray
    interference_power: np.ndarray
    sum_rate_bpshz: float = field(init=False)

    def __post_init__(self):
        self.sum_rate_bpshz = float(np.sum(np.log2(1.0 + self.sinrs)))


def analog_from_phases(channel_row):
    """Unit-modulus column matching the phases of the optimal beam for one
    user.

    For a 1 x N_A row h the dominant right singular vector is h^H / ||h||,
    so entry i of the result is exp(-j angle(h_i)) / sqrt(N_A). A zero row
    has no phase information and yields the all-ones column.
    """
    h = np.asarray(channel_row, dtype=complex).ravel()
    n = h.size
    if not np.any(h):
        log.debug("zero channel row; falling back to all-ones analog beam")
        return np.ones(n, dtype=complex) / np.sqrt(n)
    return np.exp(-1j * np.angle(h)) / np.sqrt(n)


def analog_matrix(channels):
    """N_A x K analog matrix of one AP from its K x N_A channel rows."""
    return np.column_stack([analog_from_phases(h) for h in channels])


def random_analog_precoder(rng, n_antennas, k_users):
    """N_A x K matrix of i.i.d. uniform phases with modulus 1/sqrt(N_A)."""
    phases = rng.uniform(-np.pi, np.pi, size=(n_antennas, k_users))
    return np.exp(1j * phases) / np.sqrt(n_antennas)


def block_diagonalize(rows, power, rank_tol=RANK_TOL):
    """BD precoder for single-antenna users with channel rows ``rows`` (K x N).

    Column k lies in the null space of the other users' rows and is the
    dominant direction of user k's channel projected onto that space. Users
    with an all-zero row get a zero column. The matrix is scaled so that
    its squared Frobenius norm equals ``power``.

    Returns
    -------
    W : ndarray, shape (N, K)
    inactive : tuple of int
        Users left without a beam because their row is zero.

    Raises
    ------
    BDRankError
        A user with a nonzero channel has no component outside the span of
        the others.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=complex))
    K, N = rows.shape
    W = np.zeros((N, K), dtype=complex)
    inactive = []
    for k in range(K):
        own = rows[k]
        if not np.any(own):
            inactive.append(k)
            continue
        others = np.delete(rows, k, axis=0)
        if others.shape[0] and np.any(others):
            basis = svd(others, full_matrices=True, rank_tol=rank_tol).null_space()
        else:
            basis = np.eye(N, dtype=complex)
        proj = own @ basis
        gain = np.linalg.norm(proj)
        if basis.shape[1] == 0 or gain <= rank_tol * np.linalg.norm(own):
            raise BDRankError(k)
        # dominant right singular vector of a row is its normalised conjugate
        W[:, k] = basis @ (proj.conj() / gain)
    nrm = np.linalg.norm(W)
    if nrm > 0:
        W *= np.sqrt(power) / nrm
    return W, tuple(inactive)


def bd_digital(effective_channels, power):
    """K x K digital precoder from effective channels h_k W_RF (K x K)."""
    W, _ = block_diagonalize(effective_channels, power)
    return W


def hybrid_bd_precoder(channels, power, ap_index=0, rank_tol=RANK_TOL) -> AccessPrecoder:
    """Phase-extraction analog stage followed by BD for one AP.

    ``channels`` is K x N_A (row k = h_{k,m}).
    """
    channels = np.atleast_2d(channels)
    f_rf = analog_matrix(channels)
    W_bb, inactive = block_diagonalize(channels @ f_rf, power, rank_tol)
    return AccessPrecoder(f_rf, W_bb, ap_index, inactive)


def random_bd_precoder(rng, channels, power, ap_index=0, rank_tol=RANK_TOL) -> AccessPrecoder:
    channels = np.atleast_2d(channels)
    f_rf = random_analog_precoder(rng, channels.shape[1], channels.shape[0])
    W_bb, inactive = block_diagonalize(channels @ f_rf, power, rank_tol)
    return AccessPrecoder(f_rf, W_bb, ap_index, inactive)


def fd_bd_precoder(raw_channels, power, rank_tol=RANK_TOL):
    """Fully digital BD precoder (N_A x K), one RF chain per antenna."""
    W, _ = block_diagonalize(raw_channels, power, rank_tol)
    return W


def centralized_fd_precoders(channels, power, rank_tol=RANK_TOL):
    """BD on the network-wide channel (all APs stacked), designed at the CPU.

    ``channels`` has shape (K, M, N_A). The stacked precoder is split back
    into per-AP blocks and scaled so that the most loaded AP uses exactly
    ``power``.

    Returns
    -------
    ndarray, shape (M, N_A, K)
    """
    channels = np.asarray(channels)
    K, M, N = channels.shape
    W, _ = block_diagonalize(channels.reshape(K, M * N), 1.0, rank_tol)
    blocks = W.reshape(M, N, K)
    per_ap = np.sum(np.abs(blocks) ** 2, axis=(1, 2))
    if per_ap.max() > 0:
        blocks = blocks * np.sqrt(power / per_ap.max())
    return blocks


def precoder_stack(precoders):
    """(M, N_A, K) array from a sequence of AccessPrecoder or matrices."""
    return np.stack([p.matrix if isinstance(p, AccessPrecoder) else np.asarray(p)
                     for p in precoders])


def access_link_eval(channels, precoders, noise_vars) -> AccessLinkResult:
    """SINRs and sum rate (bit/s/Hz) of the access link.

    The desired and interfering amplitudes of every AP add coherently at
    the user: signal_k = |sum_m h_{k,m} W_m[:, k]|^2 and the interference
    from stream j is |sum_m h_{k,m} W_m[:, j]|^2.

    Parameters
    ----------
    channels : ndarray, shape (K, M, N_A)
    precoders : sequence of AccessPrecoder, or ndarray (M, N_A, K)
    noise_vars : float or ndarray (K,)
    """
    channels = np.asarray(channels)
    W = precoders if isinstance(precoders, np.ndarray) else precoder_stack(precoders)
    if W.shape[0] != channels.shape[1] or W.shape[1] != channels.shape[2]:
        raise ValueError("precoder and channel dimensions disagree")
    amp = np.einsum("kma,maj->kj", channels, W)
    p = np.abs(amp) ** 2
    sig = np.diag(p).copy()
    interf = p.sum(axis=1) - sig
    noise = np.broadcast_to(np.asarray(noise_vars, dtype=float), sig.shape)
    return AccessLinkResult(sig / (interf + noise), sig, interf)


def design_access(channels, power, scheme="hybrid", rng=None, rank_tol=RANK_TOL):
    """Per-AP precoders (M, N_A, K) for one of the supported schemes:
    ``hybrid``, ``fd``, ``random`` or ``centralized_fd``."""
    channels = np.asarray(channels)
    K, M, N = channels.shape
    if scheme == "centralized_fd":
        return centralized_fd_precoders(channels, power, rank_tol)
    out = np.zeros((M, N, K), dtype=complex)
    for m in range(M):
        h = channels[:, m, :]
        if scheme == "hybrid":
            out[m] = hybrid_bd_precoder(h, power, m, rank_tol).matrix
        elif scheme == "fd":
            out[m] = fd_bd_precoder(h, power, rank_tol)
        elif scheme == "random":
            if rng is None:
                raise ValueError("random analog scheme needs a random stream")
            out[m] = random_bd_precoder(rng, h, power, m, rank_tol).matrix
        else:
            raise ValueError(f"unknown access scheme {scheme!r}")
    return out

"""Complex dense linear algebra and random sampling helpers.

All channel and beamformer objects in the package are plain complex
``numpy`` arrays; this module only adds the conventions the rest of the
code relies on (singular vector phases, numerical rank, seeded streams).
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure

RANK_TOL = 1e-10


@dataclass(frozen=True)
class SvdResult:
    """Thin wrapper around an SVD ``A = U @ diag(S) @ V^H``.

    ``V`` holds the right singular vectors as columns (not ``V^H``).
    """

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray
    rank_tol: float = RANK_TOL

    @property
    def rank(self) -> int:
        if self.S.size == 0 or self.S[0] == 0.0:
            return 0
        return int(np.count_nonzero(self.S > self.rank_tol * self.S[0]))

    def null_space(self) -> np.ndarray:
        """Orthonormal basis of the right null space (columns of V past the rank)."""
        return self.V[:, self.rank:]

    def reconstruct(self) -> np.ndarray:
        k = self.S.size
        return (self.U[:, :k] * self.S) @ self.V[:, :k].conj().T


def svd(a, full_matrices=True, rank_tol=RANK_TOL) -> SvdResult:
    """Singular value decomposition with a fixed column-phase convention.

    Each pair (u_i, v_i) is rotated by a common phase so that the
    largest-magnitude entry of u_i is real and nonnegative. This makes
    precoders built from singular vectors reproducible.

    Parameters
    ----------
    a : array_like
        Complex matrix, at least 1x1.
    full_matrices : bool
        Return square U and V (needed for null spaces).
    rank_tol : float
        Relative threshold on ``S / S[0]`` used by :attr:`SvdResult.rank`.
    """
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    if a.size == 0:
        raise ValueError("svd of an empty matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=full_matrices)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}") from exc
    v = vh.conj().T
    # rotate each singular pair; columns beyond len(s) only get U or V treatment
    k = s.size
    idx = np.argmax(np.abs(u), axis=0)
    lead = u[idx, np.arange(u.shape[1])]
    phase = np.ones(u.shape[1], dtype=complex)
    nz = np.abs(lead) > 0
    phase[nz] = lead[nz].conj() / np.abs(lead[nz])
    u = u * phase
    v = v.copy()
    v[:, :k] = v[:, :k] * phase[:k]
    return SvdResult(U=u, S=s, V=v, rank_tol=rank_tol)


def make_stream(seed, *key) -> np.random.Generator:
    """Independent random stream for ``(seed, *key)``.

    Streams for different keys are statistically independent and do not
    depend on the order in which they are created, so Monte-Carlo trials
    can run in any order or in parallel.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def sample_cn(rng: np.random.Generator, variance, size=None):
    """Circularly symmetric complex Gaussian samples CN(0, variance)."""
    variance = float(variance)
    if variance < 0:
        raise ValueError(f"variance must be nonnegative, got {variance}")
    scale = np.sqrt(variance / 2.0)
    re = rng.standard_normal(size)
    im = rng.standard_normal(size)
    return scale * (re + 1j * im)


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def dbm_to_watt(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)

"""mmWave channel generation for the access (AP -> user) and backhaul
(CPU -> AP) links.

Access channels follow a Saleh-Valenzuela model with one optional LOS
path and ``n_nlos_paths`` scattered paths; backhaul channels are pure LOS
rank-one matrices between two uniform linear arrays.
"""

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigurationError
from .numerics import sample_cn

HALF_PI = np.pi / 2


@dataclass
class NetworkTopology:
    """Positions (metres) and array sizes of one CPU, its APs and the users.

    The CPU sits at ``cpu_position``; all arrays are parallel ULAs along
    the y axis, so angles are measured from the x axis (broadside).
    """

    ap_positions: np.ndarray
    cpu_position: np.ndarray
    user_positions: np.ndarray
    n_ap_antennas: int = 64
    n_cpu_antennas: int = 64
    element_spacing_ratio: float = 0.5

    def __post_init__(self):
        self.ap_positions = np.atleast_2d(np.asarray(self.ap_positions, dtype=float))
        self.user_positions = np.atleast_2d(np.asarray(self.user_positions, dtype=float))
        self.cpu_position = np.asarray(self.cpu_position, dtype=float).reshape(2)
        if self.ap_positions.shape[1] != 2 or self.user_positions.shape[1] != 2:
            raise ConfigurationError("positions must be 2-D coordinates")
        if self.n_ap_antennas < 1 or self.n_cpu_antennas < 1:
            raise ConfigurationError("antenna counts must be >= 1")

    @property
    def m_aps(self) -> int:
        return self.ap_positions.shape[0]

    @property
    def k_users(self) -> int:
        return self.user_positions.shape[0]

    def access_distances(self) -> np.ndarray:
        """K x M user-AP distances."""
        diff = self.user_positions[:, None, :] - self.ap_positions[None, :, :]
        return np.linalg.norm(diff, axis=-1)

    def backhaul_distances(self) -> np.ndarray:
        return np.linalg.norm(self.ap_positions - self.cpu_position, axis=-1)

    def backhaul_angles(self):
        """Angle of departure at the CPU and angle of arrival at each AP."""
        d = self.ap_positions - self.cpu_position
        u = d / np.linalg.norm(d, axis=-1, keepdims=True)
        aod = wrap_angle(np.arcsin(np.clip(u[:, 1], -1.0, 1.0)))
        aoa = wrap_angle(np.arcsin(np.clip(-u[:, 1], -1.0, 1.0)))
        return aod, aoa

    def to_dict(self) -> dict:
        return {
            "ap_positions": self.ap_positions.tolist(),
            "cpu_position": self.cpu_position.tolist(),
            "user_positions": self.user_positions.tolist(),
            "n_ap_antennas": int(self.n_ap_antennas),
            "n_cpu_antennas": int(self.n_cpu_antennas),
            "element_spacing_ratio": float(self.element_spacing_ratio),
        }

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def load_topology(path) -> NetworkTopology:
    """Read a topology written by :meth:`NetworkTopology.save` (JSON)."""
    with open(path) as fh:
        raw = json.load(fh)
    allowed = {"ap_positions", "cpu_position", "user_positions",
               "n_ap_antennas", "n_cpu_antennas", "element_spacing_ratio"}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigurationError(f"unknown topology keys: {sorted(unknown)}")
    try:
        return NetworkTopology(**raw)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from exc


def wrap_angle(phi):
    """Map angles into [-pi/2, pi/2). pi/2 folds to -pi/2, which gives the
    same half-wavelength array response."""
    phi = np.asarray(phi, dtype=float)
    return np.where(phi >= HALF_PI, -HALF_PI, phi)


def sample_topology(rng, m_aps, k_users, n_ap_antennas=64, n_cpu_antennas=64,
                    ap_cpu_range=(30.0, 50.0), user_ap_range=(150.0, 200.0),
                    element_spacing_ratio=0.5) -> NetworkTopology:
    """Random scenario: APs uniform (in area) on an annulus around the CPU,
    users uniform on an annulus around the AP centroid."""
    cpu = np.zeros(2)
    aps = _annulus(rng, m_aps, *ap_cpu_range) + cpu
    users = _annulus(rng, k_users, *user_ap_range) + aps.mean(axis=0)
    return NetworkTopology(aps, cpu, users, n_ap_antennas, n_cpu_antennas,
                           element_spacing_ratio)


def _annulus(rng, n, r_min, r_max):
    r = np.sqrt(rng.uniform(r_min ** 2, r_max ** 2, size=n))
    theta = rng.uniform(-np.pi, np.pi, size=n)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


@dataclass
class ChannelParams:
    carrier_ghz: float = 28.0
    alpha_los: float = 2.1
    alpha_nlos: float = 3.64
    n_nlos_paths: int = 5
    los_only: bool = False
    # None draws the LOS indicator from the UMi LOS probability
    force_los: Optional[bool] = None

    def __post_init__(self):
        if self.carrier_ghz <= 0:
            raise ConfigurationError("carrier_ghz must be positive")
        if self.alpha_los <= 0 or self.alpha_nlos <= 0:
            raise ConfigurationError("path-loss exponents must be positive")
        if self.n_nlos_paths < 0:
            raise ConfigurationError("n_nlos_paths must be >= 0")

    @property
    def n_paths(self) -> int:
        return 0 if self.los_only else int(self.n_nlos_paths)


@dataclass
class ChannelRealization:
    """One draw of every access and backhaul channel.

    ``access[k, m]`` is the 1 x N_A row h_{k,m}; ``backhaul[m]`` is the
    N_A x N_C matrix from the CPU to AP m.
    """

    access: np.ndarray
    backhaul: np.ndarray
    los_flags: np.ndarray
    backhaul_aod: np.ndarray
    backhaul_aoa: np.ndarray
    access_angles: dict = field(default_factory=dict)


def ula_response(n, angle, spacing_ratio=0.5) -> np.ndarray:
    """Unit-norm ULA response: entries exp(j 2 pi d i sin(angle)) / sqrt(n)."""
    n = int(n)
    if n < 1:
        raise ValueError("array needs at least one element")
    i = np.arange(n)
    return np.exp(2j * np.pi * spacing_ratio * i * np.sin(angle)) / np.sqrt(n)


def path_loss_db(carrier_ghz, distance_m, alpha):
    """Close-in path loss 32.4 + 20 log10(f_c[GHz]) + 10 alpha log10(d[m])."""
    carrier_ghz = np.asarray(carrier_ghz, dtype=float)
    distance_m = np.asarray(distance_m, dtype=float)
    if np.any(carrier_ghz <= 0) or np.any(distance_m <= 0):
        raise ValueError("carrier frequency and distance must be positive")
    return 32.4 + 20.0 * np.log10(carrier_ghz) + 10.0 * alpha * np.log10(distance_m)


def los_probability(distance_m):
    """UMi line-of-sight probability."""
    d = np.asarray(distance_m, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    e = np.exp(-d / 39.0)
    return np.minimum(20.0 / d, 1.0) * (1.0 - e) + e


def draw_angle(rng, size=None):
    return rng.uniform(-HALF_PI, HALF_PI, size=size)


def gen_access_channel(rng, distance_m, n_antennas, params: ChannelParams,
                       spacing_ratio=0.5):
    """Draw one access row h_{k,m}.

    Returns
    -------
    h : ndarray, shape (n_antennas,)
    los : bool
        Whether the LOS path was present.
    angles : dict
        ``{"los": float or None, "nlos": ndarray}`` angles of departure.
    """
    if params.force_los is None:
        los = bool(rng.uniform() < los_probability(distance_m))
    else:
        los = bool(params.force_los)
    h = np.zeros(n_antennas, dtype=complex)
    angles = {"los": None, "nlos": np.empty(0)}
    if los:
        var = 10.0 ** (-0.1 * path_loss_db(params.carrier_ghz, distance_m, params.alpha_los))
        phi = draw_angle(rng)
        h += np.sqrt(n_antennas) * sample_cn(rng, var) * ula_response(n_antennas, phi, spacing_ratio)
        angles["los"] = float(phi)
    n_paths = params.n_paths
    if n_paths:
        var = 10.0 ** (-0.1 * path_loss_db(params.carrier_ghz, distance_m, params.alpha_nlos))
        phis = draw_angle(rng, n_paths)
        gains = sample_cn(rng, var, n_paths)
        scale = np.sqrt(n_antennas / n_paths)
        for g, phi in zip(gains, phis):
            h += scale * g * ula_response(n_antennas, phi, spacing_ratio)
        angles["nlos"] = phis
    return h, los, angles


def gen_backhaul_channel(rng, distance_m, n_ap_antennas, n_cpu_antennas, aoa, aod,
                         params: ChannelParams, spacing_ratio=0.5, gain=None):
    """LOS backhaul matrix sqrt(N_C N_A) zeta a^H(aoa) a(aod), shape N_A x N_C.

    ``gain`` overrides the random path gain zeta (used in tests).
    """
    if gain is None:
        var = 10.0 ** (-0.1 * path_loss_db(params.carrier_ghz, distance_m, params.alpha_los))
        gain = sample_cn(rng, var)
    a_rx = ula_response(n_ap_antennas, aoa, spacing_ratio)
    a_tx = ula_response(n_cpu_antennas, aod, spacing_ratio)
    return np.sqrt(n_cpu_antennas * n_ap_antennas) * gain * np.outer(a_rx.conj(), a_tx)


def gen_realization(rng, topology: NetworkTopology, params: ChannelParams) -> ChannelRealization:
    """Draw all K x M access rows and M backhaul matrices for a topology."""
    K, M = topology.k_users, topology.m_aps
    na, nc = topology.n_ap_antennas, topology.n_cpu_antennas
    sp = topology.element_spacing_ratio
    dist = topology.access_distances()
    access = np.zeros((K, M, na), dtype=complex)
    los = np.zeros((K, M), dtype=bool)
    los_aod = np.full((K, M), np.nan)
    nlos_aod = np.full((K, M, params.n_paths), np.nan)
    for k in range(K):
        for m in range(M):
            h, flag, ang = gen_access_channel(rng, dist[k, m], na, params, sp)
            access[k, m] = h
            los[k, m] = flag
            if ang["los"] is not None:
                los_aod[k, m] = ang["los"]
            nlos_aod[k, m, :len(ang["nlos"])] = ang["nlos"]
    aod, aoa = topology.backhaul_angles()
    bdist = topology.backhaul_distances()
    backhaul = np.stack([
        gen_backhaul_channel(rng, bdist[m], na, nc, aoa[m], aod[m], params, sp)
        for m in range(M)
    ]) if M else np.zeros((0, na, nc), dtype=complex)
    return ChannelRealization(access=access, backhaul=backhaul, los_flags=los,
                              backhaul_aod=aod, backhaul_aoa=aoa,
                              access_angles={"los": los_aod, "nlos": nlos_aod})

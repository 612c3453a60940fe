"""Max-min rate hybrid beamforming for the CPU -> AP backhaul link.

The analog stage is fixed by geometry: the CPU steers one RF chain at each
AP and every AP points its combiner back at the CPU. What remains is the
M x M digital precoder, found by bisection on a common rate target ``t``
with a second-order cone feasibility problem solved at each step.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import socp
from .channel import ula_response
from .errors import ConfigurationError, NumericalFailure
from .numerics import svd

log = logging.getLogger(__name__)

SOCP_TOL = 1e-7
EPS_BISECT = 1e-3


@dataclass
class BackhaulProblem:
    """Digital precoder design problem for fixed analog beamformers.

    ``rows[m]`` is the effective 1 x M channel b_m seen by AP m through the
    CPU analog matrix and its own combiner.
    """

    rows: np.ndarray
    noise_vars: np.ndarray
    power_budget: float

    def __post_init__(self):
        self.rows = np.atleast_2d(np.asarray(self.rows, dtype=complex))
        self.noise_vars = np.atleast_1d(np.asarray(self.noise_vars, dtype=float))
        m = self.rows.shape[0]
        if self.noise_vars.size != m:
            raise ValueError("need one noise variance per effective row")
        if self.power_budget <= 0 or np.any(self.noise_vars <= 0):
            raise ValueError("power budget and noise variances must be positive")

    @property
    def m_aps(self) -> int:
        return self.rows.shape[0]


@dataclass
class BackhaulSolution:
    analog_precoder: Optional[np.ndarray]
    digital_precoder: np.ndarray
    combiners: Optional[np.ndarray]
    t_star: float
    sinrs: np.ndarray
    degenerate: bool = False
    bisection_steps: int = 0
    trace: list = field(default_factory=list)

    @property
    def min_rate_bpshz(self) -> float:
        return float(np.log2(1.0 + self.sinrs.min())) if self.sinrs.size else 0.0


def build_cpu_analog(angles_of_departure, n_cpu_antennas, spacing_ratio=0.5):
    """N_C x M analog precoder; column m is the conjugate steering vector
    toward AP m, so every entry has modulus 1/sqrt(N_C)."""
    aod = np.atleast_1d(np.asarray(angles_of_departure, dtype=float))
    if aod.size > n_cpu_antennas:
        raise ConfigurationError(
            f"{aod.size} APs need {aod.size} RF chains but the CPU has {n_cpu_antennas} antennas")
    return np.column_stack([ula_response(n_cpu_antennas, a, spacing_ratio).conj() for a in aod])


def build_ap_combiners(angles_of_arrival, n_ap_antennas, spacing_ratio=0.5):
    """M x N_A matrix whose row m is the analog combiner of AP m."""
    aoa = np.atleast_1d(np.asarray(angles_of_arrival, dtype=float))
    return np.vstack([ula_response(n_ap_antennas, a, spacing_ratio) for a in aoa])


def effective_rows(channels, f_rf, combiners):
    """b_m = w_m H_m F_RF for every AP, stacked into an M x M matrix."""
    channels = np.asarray(channels)
    combiners = np.atleast_2d(combiners)
    if channels.ndim != 3 or channels.shape[0] != combiners.shape[0]:
        raise ValueError("need one N_A x N_C channel per combiner")
    if channels.shape[1] != combiners.shape[1] or channels.shape[2] != f_rf.shape[0]:
        raise ValueError("channel, combiner and analog precoder sizes disagree")
    return np.einsum("ma,mac,cn->mn", combiners, channels, f_rf)


def backhaul_sinrs(rows, f_bb, noise_vars):
    """Per-AP SINR |b_m f_m|^2 / (sum_{n != m} |b_m f_n|^2 + sigma_m^2)."""
    g = np.abs(np.asarray(rows) @ np.asarray(f_bb)) ** 2
    sig = np.diag(g).copy()
    interf = g.sum(axis=1) - sig
    return sig / (interf + np.asarray(noise_vars, dtype=float))


def backhaul_rates(solution: BackhaulSolution, bandwidth_hz, eta):
    """Per-AP rates (1 - eta) B log2(1 + SINR_m) in bit/s and their minimum."""
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    rates = (1.0 - eta) * bandwidth_hz * np.log2(1.0 + solution.sinrs)
    return rates, float(rates.min())


def rate_upper_bound(problem: BackhaulProblem) -> float:
    """Interference-free bound log2(1 + P max_m ||b_m||^2 / sigma_m^2)."""
    snr = problem.power_budget * np.sum(np.abs(problem.rows) ** 2, axis=1) / problem.noise_vars
    return float(np.log2(1.0 + snr.max()))


class _FeasibilityModel:
    """SOC form of 'all SINR_m >= 2^t - 1 with total power <= P'.

    The precoder is written as F = sqrt(P) T (S o V) with T the inverse of
    the noise-normalised effective rows (singular values clipped below at
    one, so T stays invertible and bounded) and S scaling the
    diagonal by sqrt(gamma). In these coordinates every cone entry is
    O(1) near the feasibility boundary, which keeps the interior-point
    iterations well conditioned even at SNRs around 1e14. The constraints
    are the interference-only form

        Re(y_mm) / sqrt(gamma) + tau >= || (y_mn)_{n != m}, 1 ||

    plus the power ball; minimizing tau decides feasibility (tau <= 0).
    """

    def __init__(self, problem: BackhaulProblem):
        self.problem = problem
        M = problem.m_aps
        self.M = M
        self.scale = np.sqrt(problem.power_budget)
        self.sigma = np.sqrt(problem.noise_vars)
        self.rows_n = self.scale * problem.rows / self.sigma[:, None]
        # inverse of the normalised rows with singular values clipped at the
        # noise floor: exact where the link is above noise, O(1) below it
        dec = svd(self.rows_n)
        self.T = (dec.V / np.maximum(dec.S, 1.0)) @ dec.U.conj().T
        self.R = self.rows_n @ self.T

    def build(self, gamma):
        M = self.M
        nv = M * M
        n = 2 * nv + 1
        rg = 1.0 / np.sqrt(gamma)
        sig = np.ones((M, M))
        np.fill_diagonal(sig, np.sqrt(gamma))
        self.sig = sig
        dims = [2 * M] * M + [1 + 2 * nv]
        G = np.zeros((sum(dims), n))
        h = np.zeros(sum(dims))
        re = lambda col: slice(M * col, M * col + M)
        im = lambda col: slice(nv + M * col, nv + M * col + M)
        r = 0
        for m in range(M):
            for col in range(M):
                a = self.R[m] * sig[:, col]
                if col == m:
                    G[r, re(col)] = -rg * a.real
                    G[r, im(col)] = rg * a.imag
                    G[r, -1] = -1.0
            k = r + 1
            for col in range(M):
                if col == m:
                    continue
                a = self.R[m] * sig[:, col]
                G[k, re(col)] = -a.real
                G[k, im(col)] = a.imag
                G[k + 1, re(col)] = -a.imag
                G[k + 1, im(col)] = -a.real
                k += 2
            h[k] = 1.0
            r = k + 1
        h[r] = 1.0
        r += 1
        for col in range(M):
            C = self.T * sig[:, col][None, :]
            G[r:r + M, re(col)] = -C.real
            G[r:r + M, im(col)] = C.imag
            G[r + M:r + 2 * M, re(col)] = -C.imag
            G[r + M:r + 2 * M, im(col)] = -C.real
            r += 2 * M
        c = np.zeros(n)
        c[-1] = 1.0
        return c, G, h, dims

    def precoder(self, x):
        """Unit-power precoder F_hat from a solver iterate, projected onto the
        power ball and phase-rotated so that diag(rows @ F) is real >= 0."""
        M = self.M
        nv = M * M
        V = (x[:nv] + 1j * x[nv:2 * nv]).reshape(M, M, order="F")
        F = self.T @ (self.sig * V)
        nrm = np.linalg.norm(F)
        if nrm > 1.0:
            F = F / nrm
        return rotate_columns(self.problem.rows, F)

    def trim(self, F_hat, gamma):
        """Shrink F_hat to the least power that still meets the target.

        For a common factor a the noise-normalised SINR is
        a^2 S_m / (a^2 I_m + 1), so a^2 = max_m gamma / (S_m - gamma I_m).
        """
        Y = self.rows_n @ F_hat
        S = np.abs(np.diag(Y)) ** 2
        interf = np.sum(np.abs(Y) ** 2, axis=1) - S
        margin = S - gamma * interf
        if np.any(margin <= 0):
            return F_hat
        a = np.sqrt(np.max(gamma / margin))
        return F_hat * a if a < 1.0 else F_hat

    def slack(self, F_hat, gamma):
        """Noise-normalised SOC slack per AP, in the interference-only form."""
        Y = self.rows_n @ F_hat
        own = np.diag(Y).real
        off = np.abs(Y) ** 2
        interf = off.sum(axis=1) - np.abs(np.diag(Y)) ** 2
        return own / np.sqrt(gamma) - np.sqrt(interf + 1.0)


def rotate_columns(rows, f_bb):
    """Multiply column m of f_bb by a phase so that b_m f_m is real >= 0."""
    d = np.einsum("mn,nm->m", rows, f_bb)
    ph = np.ones_like(d)
    nz = np.abs(d) > 0
    ph[nz] = d[nz].conj() / np.abs(d[nz])
    return f_bb * ph[None, :]


def socp_feasible(problem: BackhaulProblem, t, tol=SOCP_TOL, max_iters=socp.MAX_ITERS,
                  trace=None):
    """Digital precoder meeting rate target ``t`` (bit/s/Hz) on every AP,
    or ``None`` when the target is infeasible.

    A returned precoder has b_m f_m real and nonnegative, satisfies the
    noise-normalised SINR cone constraints to ``tol`` and uses at most the
    power budget. It is scaled down to the least power at which the
    weakest AP still meets the target.

    Raises
    ------
    NumericalFailure
        The cone solver neither found a feasible point nor certified
        infeasibility.
    """
    if t <= 0:
        raise ValueError("rate target must be positive")
    gamma = 2.0 ** t - 1.0
    model = _FeasibilityModel(problem)
    c, G, h, dims = model.build(gamma)
    found = {}

    def check(x, s, z, info):
        if trace is not None:
            trace.append(dict(info, t=t))
        F = model.precoder(x)
        if np.all(model.slack(F, gamma) >= -tol):
            found["F"] = F
            return True
        # dual bound on tau above zero: no precoder reaches the target
        return info["dres"] <= 1e-9 and info["dcost"] > tol

    res = socp.solve(c, G, h, dims, callback=check, max_iters=max_iters)
    if "F" in found:
        return model.scale * model.trim(found["F"], gamma)
    if res.status == "stopped" or res.primal_objective > tol:
        return None
    # converged with tau <= tol yet the projected point misses the target
    F = model.precoder(res.x)
    if np.all(model.slack(F, gamma) >= -tol):
        return model.scale * model.trim(F, gamma)
    if res.status == "inaccurate":
        raise NumericalFailure(f"cone solver could not resolve feasibility at t={t:.6g}")
    return None


def maxmin_bisection(problem: BackhaulProblem, t_min=0.0, t_max=None, eps=EPS_BISECT,
                     tol=SOCP_TOL, trace=False) -> BackhaulSolution:
    """Largest common backhaul rate target by bisection over ``t``.

    Returns the precoder of the last feasible target. If no tested target
    is feasible the solution is the all-zero precoder with ``t_star = 0``
    and ``degenerate=True``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if t_max is None:
        t_max = rate_upper_bound(problem)
    M = problem.m_aps
    records = [] if trace else None
    best = None
    steps = 0
    if t_max > t_min >= 0:
        n_steps = math.ceil(math.log2((t_max - t_min) / eps)) if t_max - t_min > eps else 0
        lo, hi = t_min, t_max
        for _ in range(n_steps):
            t = 0.5 * (lo + hi)
            F = socp_feasible(problem, t, tol=tol, trace=records)
            steps += 1
            if F is not None:
                lo, best = t, F
            else:
                hi = t
        t_star = lo
    else:
        t_star = 0.0
    degenerate = best is None
    if degenerate:
        log.debug("no feasible backhaul rate target above %.3g", t_min)
        best = np.zeros((M, M), dtype=complex)
        t_star = 0.0 if t_min <= 0 else t_min
    sinrs = backhaul_sinrs(problem.rows, best, problem.noise_vars)
    return BackhaulSolution(None, best, None, float(t_star), sinrs, degenerate, steps,
                            records or [])


def optimize_backhaul(channels, aod, aoa, power_budget, noise_vars, n_cpu_antennas,
                      n_ap_antennas, spacing_ratio=0.5, eps=EPS_BISECT,
                      tol=SOCP_TOL) -> BackhaulSolution:
    """Full backhaul design: steering-vector analog stages, then max-min digital
    precoder for the resulting effective rows."""
    f_rf = build_cpu_analog(aod, n_cpu_antennas, spacing_ratio)
    w = build_ap_combiners(aoa, n_ap_antennas, spacing_ratio)
    rows = effective_rows(channels, f_rf, w)
    noise = np.broadcast_to(np.asarray(noise_vars, dtype=float), (rows.shape[0],))
    noise = noise * np.sum(np.abs(w) ** 2, axis=1)
    sol = maxmin_bisection(BackhaulProblem(rows, noise, power_budget), eps=eps, tol=tol)
    sol.analog_precoder = f_rf
    sol.combiners = w
    return sol

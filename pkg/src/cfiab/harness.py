"""Monte-Carlo experiment driver: scenario configuration, single trials,
parameter sweeps and CSV output."""

import csv
import dataclasses
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import access, allocation, backhaul
from .channel import ChannelParams, gen_realization, load_topology, sample_topology
from .errors import BDRankError, ConfigurationError, NumericalFailure, UndefinedSplitError
from .numerics import dbm_to_watt, make_stream

log = logging.getLogger(__name__)

NOISE_MODELS = ("fixed", "psd_per_hz")
ACCESS_SCHEMES = ("hybrid", "fd", "random", "centralized_fd")
AXES = {"p_access": "p_access_dbm", "p_backhaul": "p_backhaul_dbm",
        "m_aps": "m_aps", "eta_grid": None}
CSV_COLUMNS = ("axis_value", "mean_c_a", "se_c_a", "mean_c_b", "se_c_b",
               "mean_eta", "mean_end_to_end", "se_end_to_end", "failures")

# substream tags under (seed, trial_index)
_TOPOLOGY, _CHANNEL, _ANALOG = 0, 1, 2


@dataclass(frozen=True)
class ScenarioConfig:
    """Physical and solver parameters of one scenario.

    Defaults follow the reference mmWave setup: 28 GHz carrier, 2 GHz of
    bandwidth, 64-antenna CPU and APs, 8 users, LOS/NLOS exponents 2.1 and
    3.64 and a -174 dBm noise level.
    """

    m_aps: int = 6
    k_users: int = 8
    n_a: int = 64
    n_c: int = 64
    p_access_dbm: float = 30.0
    p_backhaul_dbm: float = 30.0
    noise_dbm: float = -174.0
    noise_model: str = "fixed"
    bandwidth_hz: float = 2e9
    carrier_ghz: float = 28.0
    alpha_los: float = 2.1
    alpha_nlos: float = 3.64
    n_nlos_paths: int = 5
    los_only: bool = False
    element_spacing: float = 0.5
    ap_cpu_min_m: float = 30.0
    ap_cpu_max_m: float = 50.0
    user_ap_min_m: float = 150.0
    user_ap_max_m: float = 200.0
    trials: int = 100
    seed: int = 0
    eps_bisect: float = 1e-3
    socp_tol: float = 1e-7
    rank_tol: float = 1e-10
    access_scheme: str = "hybrid"
    topology_file: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        if min(self.m_aps, self.k_users, self.n_a, self.n_c) < 1:
            raise ConfigurationError("counts must be >= 1")
        if self.k_users > self.n_a:
            raise ConfigurationError("k_users must not exceed n_a")
        if self.m_aps > self.n_c:
            raise ConfigurationError("m_aps must not exceed n_c (one CPU RF chain per AP)")
        if self.noise_model not in NOISE_MODELS:
            raise ConfigurationError(f"noise_model must be one of {NOISE_MODELS}")
        if self.access_scheme not in ACCESS_SCHEMES:
            raise ConfigurationError(f"access_scheme must be one of {ACCESS_SCHEMES}")
        if self.bandwidth_hz <= 0 or self.carrier_ghz <= 0:
            raise ConfigurationError("bandwidth and carrier must be positive")
        if self.trials < 1 or self.workers < 1:
            raise ConfigurationError("trials and workers must be >= 1")
        if not 0 < self.ap_cpu_min_m <= self.ap_cpu_max_m:
            raise ConfigurationError("bad AP-CPU distance range")
        if not 0 < self.user_ap_min_m <= self.user_ap_max_m:
            raise ConfigurationError("bad user-AP distance range")
        if min(self.eps_bisect, self.socp_tol, self.rank_tol) <= 0:
            raise ConfigurationError("solver tolerances must be positive")

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - names
        if unknown:
            raise ConfigurationError(f"unknown configuration keys: {sorted(unknown)}")
        try:
            return cls(**raw)
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from exc

    @classmethod
    def from_file(cls, path) -> "ScenarioConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigurationError("config file must hold a JSON object")
        return cls.from_dict(raw)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    @property
    def p_access_w(self) -> float:
        return float(dbm_to_watt(self.p_access_dbm))

    @property
    def p_backhaul_w(self) -> float:
        return float(dbm_to_watt(self.p_backhaul_dbm))

    @property
    def noise_w(self) -> float:
        dbm = self.noise_dbm
        if self.noise_model == "psd_per_hz":
            dbm += 10.0 * math.log10(self.bandwidth_hz)
        return float(dbm_to_watt(dbm))

    def channel_params(self) -> ChannelParams:
        return ChannelParams(self.carrier_ghz, self.alpha_los, self.alpha_nlos,
                             self.n_nlos_paths, self.los_only)


@dataclass
class TrialResult:
    trial_index: int
    c_a: float = float("nan")
    c_b: float = float("nan")
    eta: float = float("nan")
    end_to_end: float = float("nan")
    user_sinrs: np.ndarray = field(default_factory=lambda: np.empty(0))
    backhaul_sinrs: np.ndarray = field(default_factory=lambda: np.empty(0))
    t_star: float = float("nan")
    elapsed_s: float = 0.0
    error: Optional[str] = None
    diagnostic: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def realize(config: ScenarioConfig, trial_index):
    """Topology and channel draw of one trial (deterministic in seed and index)."""
    if config.topology_file:
        topo = load_topology(config.topology_file)
        if topo.m_aps != config.m_aps or topo.k_users != config.k_users:
            raise ConfigurationError("topology file does not match m_aps / k_users")
        topo.n_ap_antennas, topo.n_cpu_antennas = config.n_a, config.n_c
        topo.element_spacing_ratio = config.element_spacing
    else:
        topo = sample_topology(make_stream(config.seed, trial_index, _TOPOLOGY),
                               config.m_aps, config.k_users, config.n_a, config.n_c,
                               (config.ap_cpu_min_m, config.ap_cpu_max_m),
                               (config.user_ap_min_m, config.user_ap_max_m),
                               config.element_spacing)
    real = gen_realization(make_stream(config.seed, trial_index, _CHANNEL), topo,
                           config.channel_params())
    return topo, real


def access_sum_rate(config: ScenarioConfig, trial_index, scheme=None, realization=None):
    """Access-link result (SINRs, sum rate in bit/s/Hz) for one trial."""
    scheme = scheme or config.access_scheme
    if realization is None:
        _, realization = realize(config, trial_index)
    rng = make_stream(config.seed, trial_index, _ANALOG)
    W = access.design_access(realization.access, config.p_access_w, scheme, rng,
                             config.rank_tol)
    return access.access_link_eval(realization.access, W, config.noise_w)


def backhaul_maxmin(config: ScenarioConfig, trial_index, realization=None):
    """Max-min backhaul design for one trial."""
    if realization is None:
        _, realization = realize(config, trial_index)
    return backhaul.optimize_backhaul(
        realization.backhaul, realization.backhaul_aod, realization.backhaul_aoa,
        config.p_backhaul_w, config.noise_w, config.n_c, config.n_a,
        config.element_spacing, eps=config.eps_bisect, tol=config.socp_tol)


def run_trial(config: ScenarioConfig, trial_index) -> TrialResult:
    """Channel draw, backhaul design, access design and bandwidth split.

    Solver and rank failures are caught and stored in ``error`` so that a
    sweep can continue; configuration errors propagate.
    """
    t0 = time.perf_counter()
    res = TrialResult(int(trial_index))
    _, real = realize(config, trial_index)
    try:
        bh = backhaul_maxmin(config, trial_index, real)
        acc = access_sum_rate(config, trial_index, realization=real)
        c_b = config.bandwidth_hz * float(np.log2(1.0 + bh.sinrs.min()))
        c_a = config.bandwidth_hz * acc.sum_rate_bpshz
        summary = allocation.summarize(c_a, c_b)
        res.c_a, res.c_b = summary.c_a, summary.c_b
        res.eta, res.end_to_end = summary.eta, summary.end_to_end
        res.user_sinrs, res.backhaul_sinrs = acc.sinrs, bh.sinrs
        res.t_star = bh.t_star
        res.diagnostic = summary.diagnostic
        if bh.degenerate:
            res.diagnostic = "backhaul has no feasible rate target"
        if c_b == 0:
            res.error = "zero backhaul capacity"
    except (NumericalFailure, BDRankError, UndefinedSplitError) as exc:
        log.warning("trial %d failed: %s", trial_index, exc)
        res.error = f"{type(exc).__name__}: {exc}"
    res.elapsed_s = time.perf_counter() - t0
    return res


def _run_one(args):
    return run_trial(*args)


def run_trials(config: ScenarioConfig, trials=None, workers=None) -> List[TrialResult]:
    """Trials ``0 .. trials-1`` in index order, optionally on a process pool."""
    n = config.trials if trials is None else int(trials)
    workers = config.workers if workers is None else int(workers)
    jobs = [(config, i) for i in range(n)]
    if workers > 1 and n > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    return sorted(results, key=lambda r: r.trial_index)


@dataclass
class SweepRow:
    axis_value: object
    mean_c_a: float
    se_c_a: float
    mean_c_b: float
    se_c_b: float
    mean_eta: float
    mean_end_to_end: float
    se_end_to_end: float
    failures: int


def _mean_se(x):
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return float("nan"), float("nan")
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return float(x.mean()), se


def aggregate(results, axis_value="") -> SweepRow:
    good = sorted((r for r in results if r.ok), key=lambda r: r.trial_index)
    ca = _mean_se([r.c_a for r in good])
    cb = _mean_se([r.c_b for r in good])
    e2e = _mean_se([r.end_to_end for r in good])
    eta = _mean_se([r.eta for r in good])[0]
    return SweepRow(axis_value, ca[0], ca[1], cb[0], cb[1], eta, e2e[0], e2e[1],
                    len(results) - len(good))


def sweep(config: ScenarioConfig, axis, values, trials=None, workers=None,
          on_trials=None) -> List[SweepRow]:
    """One aggregated row per axis value.

    Trials for different values share the trial indices (and hence random
    draws wherever the scenario shape allows), which keeps comparisons
    across the axis paired. The ``eta_grid`` axis runs the trials once and
    evaluates min(eta C_A, (1 - eta) C_B) at every listed split.

    ``on_trials(value, results)``, if given, sees the raw trial results of
    every axis value (called once with value ``""`` for ``eta_grid``).
    """
    if axis not in AXES:
        raise ConfigurationError(f"unknown axis {axis!r}; expected one of {sorted(AXES)}")
    values = list(values)
    if not values:
        raise ConfigurationError("sweep needs at least one value")
    if axis == "m_aps" and config.topology_file:
        raise ConfigurationError("cannot sweep m_aps with a fixed topology file")
    if axis == "eta_grid":
        results = run_trials(config, trials, workers)
        if on_trials is not None:
            on_trials("", results)
        good = [r for r in results if r.ok]
        base = aggregate(results)
        rows = []
        for eta in values:
            if not 0 < eta <= 1:
                raise ConfigurationError("eta grid values must lie in (0, 1]")
            curve = [float(allocation.eta_curve(r.c_a, r.c_b, eta)) for r in good]
            m, se = _mean_se(curve)
            rows.append(dataclasses.replace(base, axis_value=eta, mean_eta=float(eta),
                                            mean_end_to_end=m, se_end_to_end=se))
        return rows
    rows = []
    for v in values:
        try:
            cfg = config.replace(**{AXES[axis]: type(getattr(config, AXES[axis]))(v)})
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"bad {axis} value {v!r}: {exc}") from exc
        results = run_trials(cfg, trials, workers)
        if on_trials is not None:
            on_trials(v, results)
        rows.append(aggregate(results, v))
    return rows


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.9g}"


def write_csv(rows, fh=None):
    """Write sweep rows with a header; returns the text when ``fh`` is None."""
    buf = fh if fh is not None else io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return None if fh is not None else buf.getvalue()


TRIAL_COLUMNS = ("axis_value", "trial_index", "c_a", "c_b", "eta", "end_to_end", "t_star",
                 "min_user_sinr", "min_backhaul_sinr", "error")


def write_trials_csv(results, fh=None, axis_value="", header=True):
    """Per-trial dump (timing is left out so output stays reproducible)."""
    buf = fh if fh is not None else io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(TRIAL_COLUMNS)
    for r in results:
        mu = r.user_sinrs.min() if r.user_sinrs.size else float("nan")
        mb = r.backhaul_sinrs.min() if r.backhaul_sinrs.size else float("nan")
        w.writerow([_fmt(axis_value), r.trial_index, _fmt(r.c_a), _fmt(r.c_b), _fmt(r.eta),
                    _fmt(r.end_to_end), _fmt(r.t_star), _fmt(mu), _fmt(mb), r.error or ""])
    return None if fh is not None else buf.getvalue()

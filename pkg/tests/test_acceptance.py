"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run on its own with

    pytest tests/test_acceptance.py -v -s

Trend criteria average Monte-Carlo trials drawn from fixed seeds, so the
outcome is reproducible run to run.
"""

import subprocess
import sys
import time

import numpy as np
import pytest

from cfiab import access, allocation, backhaul, harness
from cfiab.harness import ScenarioConfig
from cfiab.numerics import make_stream

from oracles import eta_grid_argmax, maxmin_grid_m2


def report(number, title, ok, detail, elapsed):
    status = "PASS" if ok else "FAIL"
    print(f"\n{status} criterion {number} ({title}): {detail} [{elapsed:.1f}s]")
    assert ok, detail


def se_gap(a_mean, a_se, b_mean, b_se):
    """Difference a - b in units of the combined standard error."""
    return (a_mean - b_mean) / max(np.hypot(a_se, b_se), 1e-300)


def test_criterion_1_bd_zero_interference():
    t0 = time.perf_counter()
    cfg = ScenarioConfig(m_aps=2, k_users=4, n_a=16)
    worst = 0.0
    for draw in range(200):
        _, real = harness.realize(cfg, draw)
        for m in range(cfg.m_aps):
            pre = access.hybrid_bd_precoder(real.access[:, m, :], cfg.p_access_w)
            hbar = real.access[:, m, :] @ pre.analog
            p = np.abs(hbar @ pre.digital) ** 2
            cross = p - np.diag(np.diag(p))
            worst = max(worst, cross.max() / np.diag(p).max())
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 10.0
    report(1, "BD zero interference", ok,
           f"max cross/desired ratio {worst:.2e} over 200 draws", elapsed)


def test_criterion_2_eta_closed_form():
    t0 = time.perf_counter()
    rng = make_stream(2024, 2)
    worst_pos, worst_val = 0.0, 0.0
    for _ in range(50):
        c_a, c_b = 10.0 ** rng.uniform(8, 12, 2)
        eta_g, val_g, step = eta_grid_argmax(c_a, c_b)
        worst_pos = max(worst_pos, abs(eta_g - allocation.optimal_eta(c_a, c_b)) / step)
        rate = allocation.end_to_end_rate(c_a, c_b)
        worst_val = max(worst_val, abs(val_g - rate) / rate)
    elapsed = time.perf_counter() - t0
    ok = worst_pos <= 1.0 and worst_val <= 1e-4 and elapsed < 5.0
    report(2, "eta closed form", ok,
           f"argmax off by <= {worst_pos:.2f} grid steps, value rel error <= {worst_val:.2e}",
           elapsed)


def test_criterion_3_bisection_oracle():
    t0 = time.perf_counter()
    scalar_err = 0.0
    for gamma in (0.5, 1.0, 10.0, 100.0):
        prob = backhaul.BackhaulProblem([[np.sqrt(gamma)]], [1.0], 1.0)
        sol = backhaul.maxmin_bisection(prob)
        scalar_err = max(scalar_err, abs(sol.t_star - np.log2(1.0 + gamma)))
    rng = make_stream(2024, 3)
    pair_err = 0.0
    for _ in range(10):
        rows = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        noise = rng.uniform(0.5, 2.0, 2)
        power = 10.0 ** rng.uniform(-0.5, 1.5)
        sol = backhaul.maxmin_bisection(backhaul.BackhaulProblem(rows, noise, power))
        ref = maxmin_grid_m2(rows, noise, power)
        pair_err = max(pair_err, abs(sol.t_star - ref) / ref)
    elapsed = time.perf_counter() - t0
    ok = scalar_err <= backhaul.EPS_BISECT and pair_err <= 0.02 and elapsed < 60.0
    report(3, "bisection oracle", ok,
           f"scalar max error {scalar_err:.1e} bit/s/Hz, M=2 max rel gap {pair_err:.2e}",
           elapsed)


def test_criterion_4_constraint_compliance():
    t0 = time.perf_counter()
    rng = make_stream(2024, 4)
    mod_dev, pow_dev, bh_excess, rot_dev = 0.0, 0.0, 0.0, 0.0
    n_trials = 20
    for i in range(n_trials):
        n_a = int(rng.choice([8, 16, 64]))
        cfg = ScenarioConfig(m_aps=int(rng.integers(1, 7)), k_users=int(rng.integers(1, 9)),
                             n_a=n_a, n_c=int(rng.choice([16, 64])),
                             p_access_dbm=float(rng.uniform(0, 30)),
                             p_backhaul_dbm=float(rng.uniform(0, 30)),
                             los_only=bool(rng.integers(2)), seed=int(rng.integers(1000)))
        _, real = harness.realize(cfg, i)
        for m in range(cfg.m_aps):
            pre = access.hybrid_bd_precoder(real.access[:, m, :], cfg.p_access_w)
            mod_dev = max(mod_dev, np.abs(np.abs(pre.analog) - 1 / np.sqrt(cfg.n_a)).max())
            pw = np.linalg.norm(pre.digital) ** 2
            # budget binds whenever the AP serves at least one user
            active = len(pre.inactive_users) < cfg.k_users
            dev = (pw - cfg.p_access_w) / cfg.p_access_w
            pow_dev = max(pow_dev, abs(dev) if active else dev)
        sol = harness.backhaul_maxmin(cfg, i, real)
        mod_dev = max(mod_dev,
                      np.abs(np.abs(sol.analog_precoder) - 1 / np.sqrt(cfg.n_c)).max(),
                      np.abs(np.abs(sol.combiners) - 1 / np.sqrt(cfg.n_a)).max())
        pb = np.linalg.norm(sol.digital_precoder) ** 2
        bh_excess = max(bh_excess, pb / cfg.p_backhaul_w - 1.0)
        rows = backhaul.effective_rows(real.backhaul, sol.analog_precoder, sol.combiners)
        noise = cfg.noise_w * np.ones(cfg.m_aps)
        phases = np.exp(1j * rng.uniform(-np.pi, np.pi, cfg.m_aps))
        a = backhaul.backhaul_sinrs(rows, sol.digital_precoder, noise)
        b = backhaul.backhaul_sinrs(rows, sol.digital_precoder * phases[None, :], noise)
        rot_dev = max(rot_dev, np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))
    elapsed = time.perf_counter() - t0
    ok = mod_dev <= 1e-12 and pow_dev <= 1e-9 and bh_excess <= 1e-9 and rot_dev <= 1e-10
    report(4, "constraint compliance", ok,
           f"{n_trials} fuzz trials: modulus dev {mod_dev:.1e}, access power dev "
           f"{pow_dev:.1e}, backhaul power excess {max(bh_excess, 0):.1e}, "
           f"rotation SINR change {rot_dev:.1e}", elapsed)


def test_criterion_5_access_scheme_ordering():
    t0 = time.perf_counter()
    base = ScenarioConfig(m_aps=6)
    n_trials = 100
    reals = [harness.realize(base, i)[1] for i in range(n_trials)]
    ok, parts = True, []
    for p_dbm in (0.0, 10.0, 20.0, 30.0):
        cfg = base.replace(p_access_dbm=p_dbm)
        mean = {s: np.mean([harness.access_sum_rate(cfg, i, s, reals[i]).sum_rate_bpshz
                            for i in range(n_trials)])
                for s in ("fd", "hybrid", "random")}
        ok &= mean["fd"] >= mean["hybrid"] >= mean["random"]
        parts.append(f"{p_dbm:g} dBm fd/hybrid/random = {mean['fd']:.1f}/"
                     f"{mean['hybrid']:.1f}/{mean['random']:.1f}")
        if p_dbm == 30.0:
            ratio = mean["hybrid"] / mean["fd"]
            ok &= ratio >= 0.85
            parts.append(f"hybrid/fd at 30 dBm = {ratio:.3f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 15 * 60
    report(5, "access scheme ordering", bool(ok), "; ".join(parts), elapsed)


def test_criterion_6_backhaul_rate_vs_aps():
    t0 = time.perf_counter()
    n_trials = 50
    means, ses = [], []
    for m in (3, 6, 9, 12):
        cfg = ScenarioConfig(m_aps=m)
        t = np.array([harness.backhaul_maxmin(cfg, i).t_star for i in range(n_trials)])
        means.append(t.mean())
        ses.append(t.std(ddof=1) / np.sqrt(n_trials))
    # an increase of more than two combined standard errors breaks monotonicity
    rises = [se_gap(means[i + 1], ses[i + 1], means[i], ses[i]) for i in range(3)]
    elapsed = time.perf_counter() - t0
    ok = max(rises) <= 2.0
    report(6, "max-min backhaul rate vs M", ok,
           "mean t* at M=3,6,9,12 = " + ", ".join(f"{a:.2f}+-{b:.2f}" for a, b in zip(means, ses))
           + f" bit/s/Hz; largest rise {max(rises):.2f} SE", elapsed)


def test_criterion_7_eta_curve_single_peak():
    t0 = time.perf_counter()
    cfg = ScenarioConfig()
    trial = harness.run_trial(cfg, 0)
    assert trial.ok, trial.error
    grid = np.arange(1, 1001) / 1000.0
    rows = harness.sweep(cfg, "eta_grid", list(grid), trials=1)
    curve = np.array([r.mean_end_to_end for r in rows])
    d = np.diff(curve)
    peak = int(np.argmax(curve))
    rising = np.all(d[:peak] >= 0)
    falling = np.all(d[peak:] <= 0)
    # count strict local maxima of the sampled curve
    interior = (curve[1:-1] > curve[:-2]) & (curve[1:-1] >= curve[2:])
    n_peaks = int(interior.sum()) + int(curve[0] > curve[1]) + int(curve[-1] > curve[-2])
    eta_star = allocation.optimal_eta(trial.c_a, trial.c_b)
    off = abs(grid[peak] - eta_star)
    elapsed = time.perf_counter() - t0
    ok = rising and falling and n_peaks == 1 and off <= grid[1] - grid[0]
    report(7, "eta curve single peak", bool(ok),
           f"peak at eta={grid[peak]:.3f}, closed form {eta_star:.4f}, {n_peaks} peak(s), "
           f"monotone sides {bool(rising and falling)}", elapsed)


def test_criterion_8_end_to_end_vs_aps():
    t0 = time.perf_counter()
    n_trials = 30
    ms = list(range(2, 15))
    cfg = ScenarioConfig(los_only=True, p_access_dbm=30.0, p_backhaul_dbm=30.0)
    rows = harness.sweep(cfg, "m_aps", ms, trials=n_trials)
    mean = np.array([r.mean_end_to_end for r in rows]) / cfg.bandwidth_hz
    se = np.array([r.se_end_to_end for r in rows]) / cfg.bandwidth_hz
    failures = sum(r.failures for r in rows)
    peak = int(np.argmax(mean))
    # rises then falls: peak is significantly above both ends, and no step
    # moves against the trend by more than two combined standard errors
    rise = se_gap(mean[peak], se[peak], mean[0], se[0])
    fall = se_gap(mean[peak], se[peak], mean[-1], se[-1])
    against = [se_gap(mean[i], se[i], mean[i + 1], se[i + 1]) for i in range(peak)]
    against += [se_gap(mean[i + 1], se[i + 1], mean[i], se[i])
                for i in range(peak, len(ms) - 1)]
    elapsed = time.perf_counter() - t0
    ok = 0 < peak < len(ms) - 1 and rise > 2.0 and fall > 2.0 and max(against) <= 2.0
    report(8, "end-to-end rate vs M", bool(ok),
           "mean R/B = " + ", ".join(f"M{m}:{v:.2f}" for m, v in zip(ms, mean))
           + f"; peak M={ms[peak]}, rise {rise:.1f} SE, fall {fall:.1f} SE, "
           f"worst counter-step {max(against):.2f} SE, failures {failures}", elapsed)


def test_criterion_9_run_is_byte_identical(tmp_path):
    t0 = time.perf_counter()
    argv = [sys.executable, "-m", "cfiab", "run", "--trials", "3", "--seed", "11"]
    outs = [subprocess.run(argv, capture_output=True, check=True).stdout for _ in range(2)]
    argv_v = argv + ["--m_aps", "3", "-v", "--trials-output"]
    dumps = []
    for k in range(2):
        path = tmp_path / f"trials{k}.csv"
        subprocess.run(argv_v + [str(path)], capture_output=True, check=True)
        dumps.append(path.read_bytes())
    elapsed = time.perf_counter() - t0
    ok = outs[0] == outs[1] and len(outs[0]) > 0 and dumps[0] == dumps[1]
    report(9, "determinism", ok,
           f"summary CSV {len(outs[0])} bytes and per-trial dump {len(dumps[0])} bytes "
           "identical across runs", elapsed)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))

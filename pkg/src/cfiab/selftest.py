"""Quick invariant checks run by ``cfiab selftest``.

Each check draws a handful of small random instances and returns a
``CheckResult``; the whole suite runs in a few seconds.
"""

from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from . import access, allocation, backhaul, channel
from .numerics import make_stream, svd


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def check_svd(rng):
    worst = 0.0
    for _ in range(20):
        a = rng.standard_normal((5, 7)) + 1j * rng.standard_normal((5, 7))
        r = svd(a)
        worst = max(worst, np.abs(r.reconstruct() - a).max() / np.abs(a).max())
    return worst < 1e-12, f"max relative reconstruction error {worst:.2e}"


def check_bd(rng):
    worst = 0.0
    for _ in range(20):
        h = rng.standard_normal((2, 4, 16)) + 1j * rng.standard_normal((2, 4, 16))
        for m in range(2):
            pre = access.hybrid_bd_precoder(h[m], 1.0)
            eff = (h[m] @ pre.analog) @ pre.digital
            p = np.abs(eff) ** 2
            off = p - np.diag(np.diag(p))
            worst = max(worst, off.max() / np.diag(p).max())
    return worst <= 1e-12, f"max cross/desired ratio {worst:.2e}"


def check_unit_modulus(rng):
    h = rng.standard_normal((4, 16)) + 1j * rng.standard_normal((4, 16))
    pre = access.hybrid_bd_precoder(h, 2.0)
    f_rf = backhaul.build_cpu_analog(rng.uniform(-1.5, 1.5, 3), 16)
    dev = max(np.abs(np.abs(pre.analog) - 0.25).max(), np.abs(np.abs(f_rf) - 0.25).max())
    pw = abs(np.linalg.norm(pre.digital) ** 2 / 2.0 - 1.0)
    return dev <= 1e-12 and pw <= 1e-9, f"modulus deviation {dev:.1e}, power error {pw:.1e}"


def check_eta(rng):
    grid = np.linspace(0.0, 1.0, 10001)
    worst = 0.0
    for _ in range(20):
        ca, cb = rng.uniform(0.1, 10.0, 2)
        best = allocation.eta_curve(ca, cb, grid).max()
        worst = max(worst, abs(best - allocation.end_to_end_rate(ca, cb)) / best)
    return worst <= 1e-4, f"max relative gap {worst:.1e}"


def check_scalar_bisection(rng):
    worst = 0.0
    for g in (0.5, 10.0):
        sol = backhaul.maxmin_bisection(backhaul.BackhaulProblem([[np.sqrt(g)]], [1.0], 1.0))
        worst = max(worst, abs(sol.t_star - np.log2(1 + g)))
    return worst <= backhaul.EPS_BISECT, f"max error {worst:.1e}"


def check_phase_rotation(rng):
    rows = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    f = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    rot = f * np.exp(1j * rng.uniform(-np.pi, np.pi, 3))
    a = backhaul.backhaul_sinrs(rows, f, 0.1)
    b = backhaul.backhaul_sinrs(rows, rot, 0.1)
    err = np.abs(a - b).max() / a.max()
    return err <= 1e-10, f"max relative change {err:.1e}"


def check_steering(rng):
    v = channel.ula_response(32, rng.uniform(-np.pi / 2, np.pi / 2))
    err = abs(np.linalg.norm(v) - 1.0)
    return err <= 1e-12, f"norm error {err:.1e}"


CHECKS: List[Callable] = [check_svd, check_bd, check_unit_modulus, check_eta,
                          check_scalar_bisection, check_phase_rotation, check_steering]


def run_selftest(seed=0) -> List[CheckResult]:
    out = []
    for i, check in enumerate(CHECKS):
        name = check.__name__[len("check_"):]
        try:
            ok, detail = check(make_stream(seed, i))
        except Exception as exc:  # report, don't crash the suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail))
    return out

"""Max-min rate design of the CPU -> AP backhaul.

The CPU steers one analog beam per AP, then a digital precoder is found by
bisection on the common rate target with a cone feasibility check per step.

    python demos/02_backhaul_maxmin.py
"""
import time

import numpy as np

from cfiab import backhaul
from cfiab.harness import ScenarioConfig, realize

# a scalar link first: the answer is log2(1 + SNR)
for snr in (1.0, 10.0, 100.0):
    sol = backhaul.maxmin_bisection(backhaul.BackhaulProblem([[np.sqrt(snr)]], [1.0], 1.0))
    print(f"SNR={snr:6.1f}: t*={sol.t_star:.4f}  log2(1+SNR)={np.log2(1 + snr):.4f}  "
          f"steps={sol.bisection_steps}")

cfg = ScenarioConfig(m_aps=6)
_, real = realize(cfg, trial_index=0)
t0 = time.perf_counter()
sol = backhaul.optimize_backhaul(real.backhaul, real.backhaul_aod, real.backhaul_aoa,
                                 cfg.p_backhaul_w, cfg.noise_w, cfg.n_c, cfg.n_a)
print(f"\nM={cfg.m_aps}: t*={sol.t_star:.3f} bit/s/Hz in {time.perf_counter() - t0:.2f} s")
print("per-AP rates log2(1+SINR):", np.round(np.log2(1 + sol.sinrs), 3))
print(f"digital power used: {np.linalg.norm(sol.digital_precoder) ** 2:.4f} W "
      f"of {cfg.p_backhaul_w:.4f} W")

# rotating a precoder column by a phase leaves every SINR unchanged
rows = backhaul.effective_rows(real.backhaul, sol.analog_precoder, sol.combiners)
rot = sol.digital_precoder * np.exp(1j * np.linspace(0, 3, cfg.m_aps))
print("max SINR change under column rotation:",
      np.abs(backhaul.backhaul_sinrs(rows, rot, cfg.noise_w) - sol.sinrs).max() / sol.sinrs.max())

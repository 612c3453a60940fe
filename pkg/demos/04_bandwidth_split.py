"""Splitting the band between access and backhaul for one trial.

    python demos/04_bandwidth_split.py
"""
import numpy as np

from cfiab import allocation
from cfiab.harness import ScenarioConfig, run_trial

cfg = ScenarioConfig()
r = run_trial(cfg, 0)
print(f"C_A = {r.c_a:.4e} bit/s   C_B = {r.c_b:.4e} bit/s")
print(f"closed-form eta = {r.eta:.4f}, end-to-end rate = {r.end_to_end:.4e} bit/s")

etas = np.linspace(0.01, 1.0, 100)
curve = allocation.eta_curve(r.c_a, r.c_b, etas)
print(f"grid peak at eta = {etas[np.argmax(curve)]:.2f}, value {curve.max():.4e} bit/s")

# coordination overhead of the three design styles
for scheme in allocation.SCHEMES:
    up, down = allocation.backhaul_signaling_load(scheme, cfg.m_aps, cfg.n_a, cfg.k_users)
    print(f"{scheme:22s} uplink {up:5d}  downlink {down:5d}")

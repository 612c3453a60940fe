"""Access-link precoders: hybrid BD against fully digital and random analog.

    python demos/03_access_precoding.py
"""
import numpy as np

from cfiab import access
from cfiab.harness import ScenarioConfig, access_sum_rate, realize

cfg = ScenarioConfig(m_aps=6)
_, real = realize(cfg, 0)

pre = access.hybrid_bd_precoder(real.access[:, 0, :], cfg.p_access_w)
hbar = real.access[:, 0, :] @ pre.analog
p = np.abs(hbar @ pre.digital) ** 2
np.set_printoptions(precision=3, suppress=True)
print("AP0 effective gains |h_j W_k|^2 (rows j = users), normalised:")
print(p / p.max())
print("analog entry moduli:", np.unique(np.round(np.abs(pre.analog), 12)))
print(f"digital power: {np.linalg.norm(pre.digital) ** 2:.6f} W")

trials = 20
reals = [realize(cfg, i)[1] for i in range(trials)]
print(f"\nmean access sum rate over {trials} draws (bit/s/Hz):")
print(" P_A [dBm]     fd  hybrid  random  centralized")
for p_dbm in (0.0, 10.0, 20.0, 30.0):
    c = cfg.replace(p_access_dbm=p_dbm)
    row = [np.mean([access_sum_rate(c, i, s, reals[i]).sum_rate_bpshz for i in range(trials)])
           for s in ("fd", "hybrid", "random", "centralized_fd")]
    print(f"{p_dbm:9.0f} " + " ".join(f"{v:7.1f}" for v in row))

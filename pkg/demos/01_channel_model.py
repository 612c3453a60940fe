"""Draw one scenario and look at its channels.

    python demos/01_channel_model.py
"""
import numpy as np

from cfiab.channel import (ChannelParams, gen_realization, los_probability, path_loss_db,
                           sample_topology)
from cfiab.numerics import make_stream

# distance-dependent terms first
for d in (10, 39, 100, 200):
    print(f"d={d:>4} m  P(LOS)={float(los_probability(d)):.3f}  "
          f"PL_LOS={float(path_loss_db(28, d, 2.1)):6.1f} dB  "
          f"PL_NLOS={float(path_loss_db(28, d, 3.64)):6.1f} dB")

topo = sample_topology(make_stream(0, 0), m_aps=4, k_users=6)
print("\nAP-CPU distances (m):", np.round(topo.backhaul_distances(), 1))
print("user-AP distances (m):\n", np.round(topo.access_distances(), 1))

real = gen_realization(make_stream(0, 1), topo, ChannelParams())
print("\naccess channel array:", real.access.shape, " backhaul array:", real.backhaul.shape)
print("LOS flags per (user, AP):\n", real.los_flags.astype(int))

# backhaul links are rank one
s = np.linalg.svd(real.backhaul[0], compute_uv=False)
print(f"\nbackhaul AP0 singular values: s1={s[0]:.3e}, s2/s1={s[1] / s[0]:.1e}")
print("per-user channel energy at AP0 (dB):",
      np.round(10 * np.log10(np.sum(np.abs(real.access[:, 0]) ** 2, axis=1)), 1))

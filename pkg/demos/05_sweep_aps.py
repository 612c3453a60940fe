"""End-to-end rate against the number of APs with LOS-only channels.

More APs add access diversity but split the CPU's backhaul power and add
inter-AP interference, so the end-to-end rate rises and then falls.
Takes about a minute.

    python demos/05_sweep_aps.py > sweep.csv
"""
import sys

from cfiab.harness import ScenarioConfig, sweep, write_csv

cfg = ScenarioConfig(los_only=True, trials=10)
rows = sweep(cfg, "m_aps", [2, 4, 6, 8, 10, 12, 14])
write_csv(rows, sys.stdout)
for r in rows:
    print(f"M={r.axis_value:2d}  R/B={r.mean_end_to_end / cfg.bandwidth_hz:6.2f}", file=sys.stderr)

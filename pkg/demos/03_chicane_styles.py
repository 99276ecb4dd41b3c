"""Heading and offset errors on a chicane for three driving styles.

Runs the full chain, from raster masks to the EKF pose, for each scenario
file and prints a small results table.  Each run takes a few seconds.
"""
from pathlib import Path

from lanekit.evalrun import compute_report, load_scenario, run_scenario

here = Path(__file__).parent / "scenarios"
print(f"{'scenario':22s} MAE heading [deg], MAE offset [m], available [%]")
for name in ("chicane_centered", "chicane_oscillating", "chicane_racing"):
    sc = load_scenario(here / f"{name}.yaml")
    estimates, truths = run_scenario(sc)
    report = compute_report(estimates, truths)
    print(f"{sc.name:22s} {report.table_row()}")
    worst = max(report.theta_errors)
    frame = report.frames[report.theta_errors.index(worst)]
    print(f"{'':22s} worst heading error {worst:.1f} deg at frame {frame}")

"""Is the focal filter honest about its own uncertainty?

Runs a 12-trajectory model-matched batch through the focal estimator and
checks the averaged normalized estimation error squared (ANEES) against
the 95% chi-square acceptance band, separately for the position and
velocity marginals. A consistent filter stays inside the band for ~95%
of steps; one that is overconfident rises above it.
"""

import numpy as np

from swa import FocalParams, anees_series, focal_consistency_batch

batch = focal_consistency_batch(FocalParams(), n_runs=12, duration=20.0, seed=42)
steady = batch.times >= 2.0

for name, runs in (("position", batch.position_runs), ("velocity", batch.velocity_runs)):
    report = anees_series(runs, alpha=0.05)
    values = report.values[steady]
    in_band = np.mean((values >= report.r1) & (values <= report.r2))
    print(
        f"{name:>9}: ANEES mean {values.mean():.3f} "
        f"(band [{report.r1:.3f}, {report.r2:.3f}], dim {report.dim}), "
        f"{in_band:.1%} of steady steps inside"
    )

print("\nper-second snapshot (position ANEES):")
report = anees_series(batch.position_runs)
for second in range(2, 20, 3):
    k = int(np.searchsorted(batch.times, float(second)))
    print(f"  t = {second:2d} s  anees = {report.values[k]:.3f}")

"""Why the swarm drifts as a rigid whole: the joint system's blind spot.

Relative position measurements make every mode of the combined swarm state
observable except four: a common shift in x, in y, and a common velocity
in each axis. This script builds the joint system for growing swarm sizes,
confirms rank(O) = 4n - 4, shows the uniform modes are invisible, and shows
a single absolute position fix restoring full observability.
"""

import numpy as np

from swa import build_combined_system, numerical_rank, observability_rank
from swa.analysis import (
    observability_matrix,
    unobservable_basis,
    with_absolute_position_measurement,
)

print(f"{'n':>3} {'dim':>5} {'rank':>6} {'nullity':>8} {'rank with one absolute fix':>28}")
for n in range(2, 7):
    system = build_combined_system(n, dt=0.1)
    rank = observability_rank(system)
    fixed = observability_rank(with_absolute_position_measurement(system, 0))
    print(f"{n:>3} {4 * n:>5} {rank:>6} {4 * n - rank:>8} {fixed:>28}")

system = build_combined_system(3, dt=0.1)
O = observability_matrix(system)
print("\nuniform modes for n = 3 (norm of O @ v, should be ~0):")
labels = ["shift x", "shift y", "velocity x", "velocity y"]
for label, v in zip(labels, unobservable_basis(3)):
    print(f"  {label:>10}: {np.linalg.norm(O @ v):.2e}")

single = np.zeros(12)
single[0] = 1.0
print(f"  one-UAV shift (observable): {np.linalg.norm(O @ single):.2e}")
print(f"\nobservability matrix is {O.shape[0]}x{O.shape[1]}, numerical rank {numerical_rank(O)}")

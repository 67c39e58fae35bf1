"""The floating control frame: where an agent wants to be.

Each agent's desired position is the center of a fixed-radius circle
through its neighbors. This walks the three regimes (one, two, and many
neighbors) and the degenerate inputs each one rejects.
"""

from swa import Vec2, estimate_frame, solve_center_two
from swa.floating_frame import DegenerateGeometryError, FrameParams, NoCircleError

params = FrameParams(radius=10.0)
me = Vec2(0.0, 0.0)  # solver inputs are relative, the agent sits at the origin

print("one neighbor: the center sits on the line toward it, radius away from it")
est = estimate_frame([Vec2(20.0, 0.0)], me, params)
print(f"  neighbor at (20, 0)  ->  center ({est.center.x:.2f}, {est.center.y:.2f})")

print("two neighbors: two circle centers exist, the nearer one is chosen")
est = estimate_frame([Vec2(5.0, 5.0), Vec2(5.0, -5.0)], me, params)
print(f"  neighbors (5, +-5)   ->  center ({est.center.x:.3f}, {est.center.y:.3f})")

print("three or more: linear least-squares fit (the radius drops out)")
pts = [Vec2(10.0, 0.0), Vec2(0.0, 10.0), Vec2(-10.0, 0.0)]
est = estimate_frame(pts, me, params)
print(f"  symmetric triple     ->  center ({est.center.x:.1e}, {est.center.y:.1e}), "
      f"condition {est.condition:.2f}")

print("degenerate inputs are typed errors, the caller holds the last frame:")
try:
    solve_center_two(Vec2(0, 0), Vec2(30, 0), me, 10.0)
except NoCircleError as err:
    print(f"  NoCircleError: {err}")
try:
    estimate_frame([Vec2(1, 0), Vec2(2, 0), Vec2(3, 0)], me, params)
except DegenerateGeometryError as err:
    print(f"  DegenerateGeometryError: {err}")
print(f"no neighbors -> {estimate_frame([], me, params)} (hold-last signal)")

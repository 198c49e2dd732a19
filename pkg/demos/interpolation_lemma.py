"""Why the interpolation bound needs non-vanishing families.

The family ((1 - l) / (1 + l)) g vanishes identically at l = 1, so its M1 is
zero and the interpolated bound is zero. Yet its middle norm is positive and
grows without limit as the truncation of g = 1 / (x log^2 x) near 0 is
removed. The non-vanishing family g^((1 - l) / (1 + l)) obeys the bound.
"""
from qcburk import AnalyticFamily, check_interpolation_bound, counterexample_demo

cx = counterexample_demo()
print(f"theta = {cx.theta}, p_theta = {cx.p_theta}, M0 = {cx.M0:.6f}, M1 = {cx.M1}, bound = {cx.bound}")
for d, m in zip(cx.truncations, cx.M_theta):
    print(f"  truncated at {d:.0e}: M_theta = {m:.4f}")
print(f"growth across the refinements: {cx.growth:.1f}x")
reg = cx.regularized
print(f"non-vanishing variant: M_theta = {reg['M_theta']:.4f} <= {reg['bound']:.4f}")

# two atoms, (e^l, e^-l): the bound holds with room to spare
rep = check_interpolation_bound(AnalyticFamily.two_point(), 2.0, 4.0)
print(f"\ntwo-point family: verdict {rep.verdict}, margins {[round(m, 4) for m in rep.margins]}")

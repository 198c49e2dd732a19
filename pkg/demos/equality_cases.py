"""Equality cases of the sharp integral bounds for the radial power map.

The map z |z|^(1/K - 1) with K = 2 attains the main weighted inequality with
equality for every admissible exponent, and its L^p mean of |Df|^p sits exactly
on the sharp constant. Run with ``python3 demos/equality_cases.py``.
"""
import math

from qcburk import RadialProfile, check_llogl, check_lp_mean, check_main_inequality

K = 2.0
power = RadialProfile.power(K)

print("weighted integral of the power map (target pi):")
for p in (2.0, 2.5, 3.0, 4.0):
    r = check_main_inequality(power, p)
    print(f"  p = {p:3.1f}: {r.value / math.pi:.12f} pi  [{r.verdict}]")

print("\nL^p mean of |Df|^p against 2K / (2K - p(K - 1)):")
for p in (2.5, 3.0, 3.5):
    r = check_lp_mean(power, K, p)
    print(f"  p = {p:3.1f}: mean {r.value:.10f}, bound {r.bound:.10f}  [{r.verdict}]")

# a smooth blend away from the power law is strictly inside the bound
r = check_lp_mean(RadialProfile.blend(0.5, 2.0), K, 3.0)
print(f"\nblend profile at p = 3: mean {r.value:.6f} < {r.bound:.6f}  [{r.verdict}]")

r = check_llogl(power)
print(f"\nL log L: both sides {r.value:.10f} and {r.bound:.10f} (2 pi = {2 * math.pi:.10f})")

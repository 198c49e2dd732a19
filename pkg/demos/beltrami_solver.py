"""Solving the Beltrami equation on a periodic grid.

A constant coefficient k on the unit disk has the explicit principal solution
z + k zbar inside and z + k / z outside, so the solver's derivative, its
expansion coefficient b1 and its Jacobian integral pi (1 - k^2) all have exact
targets. A random coefficient then shows the area bound at work.
"""
import math

import numpy as np

from qcburk import BeltramiCoefficient, GridSpec, area_check, check_main_inequality, solve_principal

spec = GridSpec(512)
k = 0.3
sol = solve_principal(BeltramiCoefficient.constant(spec, k))
inner = np.abs(spec.z) <= 0.8
print(f"constant k = {k}: {sol.iterations} iterations, residual {sol.residual:.1e}")
print(f"  max |f_z - 1| on |z| <= 0.8:     {np.max(np.abs(sol.fz[inner] - 1)):.2e}")
print(f"  max |f_zbar - k| on |z| <= 0.8:  {np.max(np.abs(sol.fzbar[inner] - k)):.2e}")
print(f"  b1 = {sol.b1.real:.5f} (exact {k})")
a = area_check(sol)
print(f"  area integral {a.value:.5f}, exact {math.pi * (1 - k * k):.5f}")

print("\nrandom coefficients, |mu| <= k on the disk:")
rng = np.random.default_rng(3)
for k in (0.2, 0.4):
    sol = solve_principal(BeltramiCoefficient.random(spec, k, rng))
    a = area_check(sol)
    m = check_main_inequality(sol, 3.0)
    print(f"  k = {k}: area {a.value:.4f} <= pi [{a.verdict}], weighted integral {m.value:.4f} <= pi "
          f"(+/- {m.est_error:.1e}) [{m.verdict}]")

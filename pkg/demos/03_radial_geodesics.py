"""
Geodesics and critical points in the radial reduction
======================================================

Rotation-invariant potentials reduce to convex functions of t = log|z|^2.
Geodesics come from interpolating Legendre transforms.  Along them E_k is
affine while L_m / (m+1) is convex, with k = m + 2.  The fixed-point
solver for omega_u = beta_u lands on the dilation family.
"""
import numpy as np

from sphere_toeplitz import build_quadrature
from sphere_toeplitz.envelope import (
    RadialFunction,
    check_functionals_along_geodesic,
    critical_point_solver,
    geodesic_radial,
)
from sphere_toeplitz.functions import constant, dilation, random_radial

m, k = 2, 4
rule = build_quadrature(16)

# %% a geodesic from 0 to a perturbed dilation
u0 = RadialFunction.from_test_function(constant(0.0))
u1 = RadialFunction.from_test_function(k * dilation(1.8) + random_radial(7, 4, 0.15))
rep = check_functionals_along_geodesic(geodesic_radial(u0, u1, k), m, rule, n_s=11)
for s, E, L in zip(rep.s, rep.energy, rep.normalized_L):
    print(f"s={s:.1f}  E={E:+.8f}  L/(m+1)={L:+.8f}")
print(f"deviation of E from affine {rep.energy_affine_dev:.1e}, min second difference of L {rep.L_min_second_diff:.1e}")

# %% the dilation path is itself a geodesic
g = geodesic_radial(u0, RadialFunction.from_test_function(k * dilation(3.0)), k)
t = np.linspace(-6, 6, 7)
st = 1 / (1 + np.exp(-t))
print("max error against k u_{3^s}:", max(np.abs(g(t, s) - (k * dilation(3.0**s)).profile(st)[0]).max() for s in (0.25, 0.5, 0.75)))

# %% critical points
res = critical_point_solver(m, RadialFunction.from_test_function(random_radial(3, 4, 0.3)))
print(f"critical point: residual {res.residual:.1e} after {len(res.history) - 1} steps, "
      f"distance to k u_lambda {res.distance_to_family:.1e} at lambda = {res.lam:.4f}")

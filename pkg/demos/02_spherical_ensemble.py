"""
Linear statistics of the spherical ensemble
===========================================

The N-point determinantal process on S^2 has the Toeplitz determinant as its
moment generating function: log E exp(-t sum (u(x_i) - int u)) = -L_{N-1}(t u) + t N int u.
We check that identity by Monte Carlo, then watch G_N / (t^2 D(u) / 2) climb
toward 1, staying below N / (N + 1).
"""
import numpy as np

from sphere_toeplitz import build_quadrature
from sphere_toeplitz.dpp import chernoff_experiment, mc_linear_statistic
from sphere_toeplitz.functions import harmonic1
from sphere_toeplitz.inequalities import clt_probe, fluctuation_mgf

rule = build_quadrature(32)
u = harmonic1()
t, N = 0.7, 6

# %% Monte Carlo against the exact moment generating function
est = mc_linear_statistic(u, N, 20000, seed=1, t=t, threads=4)
exact = np.exp(fluctuation_mgf(N, t, u, rule))
print(f"E exp(-t S): MC {est.mgf.mean:.5f} +- {est.mgf.std_error:.5f}, exact {exact:.5f}, z = {est.mgf.z_score(exact):+.2f}")

# %% approach to the Gaussian limit
for row in clt_probe(u, rule, [1, 2, 4, 8, 16, 32]):
    print(f"N={row.N:<3d} ratio {row.ratio:.6f}   N/(N+1) = {row.lower:.6f}")

# %% concentration
res = chernoff_experiment(u, 8, 0.2, 20000, seed=2, threads=4)
print(f"P(mean > 0.2): empirical {res.empirical_tail:.5f} +- {res.std_error:.5f}, bound {res.bound:.5f}")

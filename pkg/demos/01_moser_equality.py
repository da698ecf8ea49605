"""
The sharp Toeplitz-determinant inequality and its equality cases
================================================================

For each degree m we compare -L_m(u) with the right-hand side
-(m+1) int u omega_0 + ((m+1)/(m+2)) D(u)/2.  Potentials of the form
(m+2) u_F, with F a Moebius map, close the gap; everything else leaves slack.
"""
import numpy as np

from sphere_toeplitz import build_quadrature
from sphere_toeplitz.functions import harmonic1, random_fourier, saturating_potential
from sphere_toeplitz.geometry import MobiusMap
from sphere_toeplitz.inequalities import check_moser, sharpness_fit

rule = build_quadrature(24)
rng = np.random.default_rng(0)

# %% equality along the Moebius orbit
print("m   saturating slack     random slack    harmonic slack")
for m in (0, 1, 2, 4, 8):
    F = MobiusMap.random(rng)
    sat = check_moser(m, saturating_potential(F, m), rule)
    rnd = check_moser(m, random_fourier(m), rule)
    har = check_moser(m, harmonic1(), rule)
    print(f"{m:<3d} {sat.slack:+.2e} ({sat.verdict:8s}) {rnd.slack:+.2e}    {har.slack:+.2e}")

# %% the constants cannot be improved
# A is the slope of c -> L_m(c); B_min is the best constant in front of D(u)
for m in (1, 3):
    A, B, lam = sharpness_fit(m, rule)
    print(f"m={m}: A = {A:.12f} (expect {m + 1}), B_min = {B:.8f} (expect {(m + 1) / (2 * (m + 2)):.8f}), at lambda = {lam:.3f}")

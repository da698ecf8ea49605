"""
Counting polynomials with Gaussian-integer coefficients
=======================================================

Degree-m polynomials with coefficients in Z + iZ whose weighted L^2 norm is
at most 1 are counted exactly.  Minkowski's theorem bounds log(count) from
below by log Vol(B) - 2N log 2, and the volume itself is exp(L_m(u)) times
the volume for u = 0.
"""
from sphere_toeplitz import build_quadrature
from sphere_toeplitz.functions import constant, dilation, harmonic1
from sphere_toeplitz.lattice import chain_bound, minkowski_check, volume_identity_check

rule = build_quadrature(8)

print("m  u                        count   h0       Minkowski  energy form")
for m in range(4):
    for u in (constant(1.0), constant(1.0) + harmonic1(), dilation(2.0) + 1.0):
        c = minkowski_check(m, u, rule, threads=4)
        ch = chain_bound(m, u, rule)
        print(f"{m}  {u.label[:24]:24s} {c.count:6d}  {c.h0:7.4f}  {c.minkowski_bound:9.4f}  {ch['energy']:9.4f}")

print("volume identity residual:", max(abs(volume_identity_check(m, harmonic1(), rule)) for m in range(5)))

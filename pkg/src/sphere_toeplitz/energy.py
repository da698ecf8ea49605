"""Dirichlet energy, mean value and the Aubin-Mabuchi energy on (S^2, omega_0)."""
from __future__ import annotations

import numpy as np

from .functions import TestFunction
from .quadrature import QuadratureRule, integrate_ambient

__all__ = ["dirichlet_energy", "mean_value", "energy_E", "j_functional", "ddc_mass", "dirichlet_energy_by_parts"]

def _radial_integral(h, rule: QuadratureRule) -> float:
    s, w = rule.s_nodes, rule.s_weights
    return float(np.sum(w * np.broadcast_to(h(s), s.shape)))

def dirichlet_energy(u: TestFunction, rule: QuadratureRule) -> float:
    """D(u) = int du ^ d^c u = int |grad u|^2 omega_0 (round metric).

    For radial u = g(s) this is int g'(s)^2 s (1 - s) ds.
    """
    if u.radial:
        d = _radial_integral(lambda s: u.profile(s)[1] ** 2 * s * (1.0 - s), rule)
    else:
        d = integrate_ambient(u.grad_sq_round, rule)
    if d < -1e-12:
        raise ArithmeticError(f"negative Dirichlet energy {d!r}: internal inconsistency")
    return max(d, 0.0)

def dirichlet_energy_by_parts(u: TestFunction, rule: QuadratureRule) -> float:
    """-int u dd^c u, computed from the Laplacian instead of the gradient."""
    return -integrate_ambient(lambda x: u.at(x) * u.laplacian_round(x), rule)

def mean_value(u: TestFunction, rule: QuadratureRule) -> float:
    if u.radial:
        return _radial_integral(lambda s: u.profile(s)[0], rule)
    return integrate_ambient(u.at, rule)

def ddc_mass(u: TestFunction, rule: QuadratureRule) -> float:
    """int (omega_0 + dd^c u); equals 1 because dd^c u is exact."""
    return integrate_ambient(lambda x: 1.0 + u.laplacian_round(x), rule)

def energy_E(u: TestFunction, k: int, rule: QuadratureRule) -> float:
    """E_k(u) = -D(u) / (2k) + int u omega_0, normalized so that E_k(u + c) = E_k(u) + c."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return -dirichlet_energy(u, rule) / (2.0 * k) + mean_value(u, rule)

def j_functional(u: TestFunction, rule: QuadratureRule) -> float:
    """J(u) = int u omega_0 - E_1(u) = D(u) / 2."""
    return 0.5 * dirichlet_energy(u, rule)

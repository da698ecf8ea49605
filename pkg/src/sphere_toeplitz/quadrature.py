"""Product quadrature for the normalized area form omega_0.

Under s = |z|^2 / (1 + |z|^2) and the angle theta, omega_0 = ds dtheta / (2 pi),
so Gauss-Legendre in s times the trapezoid rule in theta integrates every
spherical harmonic of degree below min(2 n_s, n_theta) exactly.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .geometry import StereoCoord, lift_from_s_theta

__all__ = [
    "QuadratureRule",
    "NonFiniteIntegrand",
    "build_quadrature",
    "integrate",
    "integrate_ambient",
    "moment_errors",
    "gauss_s",
]


class NonFiniteIntegrand(ValueError):
    """Raised when an integrand is not finite at some node; ``index`` is the flat node index."""

    def __init__(self, index: int, value):
        super().__init__(f"integrand not finite at node {index} (value {value!r})")
        self.index = index


def _counts(level: int):
    return 2 * level + 24, 4 * level + 32


@lru_cache(maxsize=64)
def gauss_s(n: int):
    """Gauss-Legendre nodes and weights on [0, 1] (weights sum to 1)."""
    x, w = np.polynomial.legendre.leggauss(n)
    s = 0.5 * (x + 1.0)
    w = 0.5 * w
    s.setflags(write=False)
    w.setflags(write=False)
    return s, w


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Tensor rule on (s, theta); arrays are flattened with theta varying fastest."""

    level: int
    s: np.ndarray = field(repr=False)
    theta: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    s_nodes: np.ndarray = field(repr=False)
    s_weights: np.ndarray = field(repr=False)
    n_theta: int = 0

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def z(self) -> np.ndarray:
        r = np.sqrt(self.s / (1.0 - self.s))
        return r * np.exp(1j * self.theta)

    @property
    def x(self) -> np.ndarray:
        return lift_from_s_theta(self.s, self.theta)

    @property
    def nodes(self) -> list:
        return [StereoCoord(complex(v)) for v in self.z]

    def grid(self, values) -> np.ndarray:
        """Reshape flat node values to (n_s, n_theta)."""
        return np.asarray(values).reshape(self.s_nodes.size, self.n_theta)

    def to_csv(self, path) -> None:
        z = self.z
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["re", "im", "weight"])
            for zi, wi in zip(z, self.weights):
                wr.writerow([repr(float(zi.real)), repr(float(zi.imag)), repr(float(wi))])


@lru_cache(maxsize=32)
def build_quadrature(level: int) -> QuadratureRule:
    """Rule exact for the moments s^i (1 - s)^(m - i), m <= 2 * level, and for
    trigonometric modes |k| < 4 * level + 32."""
    if not isinstance(level, (int, np.integer)) or level <= 0:
        raise ValueError(f"quadrature level must be a positive integer, got {level!r}")
    n_s, n_t = _counts(int(level))
    s1, w1 = gauss_s(n_s)
    th1 = 2.0 * np.pi * np.arange(n_t) / n_t
    S, TH = np.meshgrid(s1, th1, indexing="ij")
    W = np.outer(w1, np.full(n_t, 1.0 / n_t))
    arrs = [S.ravel(), TH.ravel(), W.ravel()]
    for a in arrs:
        a.setflags(write=False)
    return QuadratureRule(int(level), arrs[0], arrs[1], arrs[2], s1, w1, n_t)


def _reduce(vals: np.ndarray, rule: QuadratureRule):
    bad = ~np.isfinite(vals)
    if bad.any():
        i = int(np.flatnonzero(bad.reshape(rule.size, -1).any(axis=1))[0])
        raise NonFiniteIntegrand(i, vals.reshape(rule.size, -1)[i])
    # numpy's pairwise summation over a fixed shape is order-stable
    return np.sum(vals * rule.weights.reshape((-1,) + (1,) * (vals.ndim - 1)), axis=0)


def integrate(f, rule: QuadratureRule):
    """Sum of w_q f(z_q) for f taking a complex array of chart points."""
    vals = np.asarray(f(rule.z))
    if vals.shape == ():
        vals = np.full(rule.size, vals)
    out = _reduce(vals, rule)
    return float(out) if np.ndim(out) == 0 and not np.iscomplexobj(out) else out


def integrate_ambient(f, rule: QuadratureRule):
    """Same as ``integrate`` for f taking (..., 3) unit vectors."""
    vals = np.asarray(f(rule.x))
    if vals.shape == ():
        vals = np.full(rule.size, vals)
    out = _reduce(vals, rule)
    return float(out) if np.ndim(out) == 0 and not np.iscomplexobj(out) else out


def moment_errors(rule: QuadratureRule, m_max: int | None = None) -> np.ndarray:
    """Max error of the moments 1 / ((m + 1) C(m, i)) for each m <= m_max."""
    from scipy.special import comb

    m_max = 2 * rule.level if m_max is None else m_max
    s = rule.s
    errs = np.zeros(m_max + 1)
    ls, l1s = np.log(s), np.log1p(-s)
    for m in range(m_max + 1):
        i = np.arange(m + 1)
        vals = np.exp(np.outer(ls, i) + np.outer(l1s, m - i))
        got = rule.weights @ vals
        exact = 1.0 / ((m + 1) * comb(m, i, exact=False))
        errs[m] = np.max(np.abs(got - exact))
    return errs

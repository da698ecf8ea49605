"""Gaussian-integer lattice points in the L^2 unit ball of degree-m polynomials.

A polynomial p = sum a_i z^i with a in (Z + iZ)^N is counted when
||p||^2 = a^H G a <= 1, where G is the unnormalized Gram matrix of the
monomials under the weight e^{-u} (1 + |z|^2)^{-m}.  h0 = log(count).
"""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .energy import dirichlet_energy, mean_value
from .functions import TestFunction, constant
from .quadrature import QuadratureRule
from .toeplitz import assemble_gram, log_norm_consts, logdet_L, require_level

__all__ = [
    "LatticeCount",
    "MAX_ENUM_DEGREE",
    "BOUNDARY_TOL",
    "unnormalized_gram",
    "real_form",
    "log_unit_ball_volume",
    "log_det_gram",
    "count_lattice_points",
    "count_brute_force",
    "minkowski_check",
    "volume_identity_check",
    "chain_bound",
    "counts_to_csv",
]

MAX_ENUM_DEGREE = 4
# points on the ellipsoid boundary (|a|^2 = 1 at m = 0) are counted
BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class LatticeCount:
    m: int
    u_label: str
    count: int
    h0: float
    log_ball_volume: float
    minkowski_bound: float

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must include the zero polynomial")
        if self.h0 < self.minkowski_bound - 1e-9:
            raise ArithmeticError(f"Minkowski bound violated: h0 = {self.h0} < {self.minkowski_bound}")

    @property
    def slack(self) -> float:
        return self.h0 - self.minkowski_bound


def unnormalized_gram(m: int, u: TestFunction, rule: QuadratureRule) -> np.ndarray:
    """G_ij = int z^i conj(z)^j (1 + |z|^2)^{-m} e^{-u} omega_0, so that M = diag(c) G diag(c)."""
    M = assemble_gram(m, u, rule).entries
    inv_c = np.exp(-0.5 * log_norm_consts(m))
    G = inv_c[:, None] * M * inv_c[None, :]
    return 0.5 * (G + G.conj().T)


def real_form(G: np.ndarray) -> np.ndarray:
    """Q with a^H G a = [x; y]^T Q [x; y] for a = x + i y."""
    A, B = G.real, G.imag
    return np.block([[A, -B], [B, A]])


def log_unit_ball_volume(dim: int) -> float:
    return 0.5 * dim * np.log(np.pi) - gammaln(0.5 * dim + 1.0)


def log_det_gram(m: int, u: TestFunction, rule: QuadratureRule) -> float:
    return float(2.0 * np.sum(np.log(np.diag(np.linalg.cholesky(unnormalized_gram(m, u, rule))).real)))


def _count_subtree(R: np.ndarray, x: np.ndarray, level: int, budget: float) -> int:
    """Points of the ellipsoid ||R x||^2 <= budget with x[level+1:] fixed."""
    n = R.shape[0]
    if level == 0:
        c = -(R[0, 1:] @ x[1:]) / R[0, 0]
        r = np.sqrt(max(budget, 0.0)) / R[0, 0]
        return max(0, int(np.floor(c + r) - np.ceil(c - r)) + 1)
    if level == 1:
        # vectorize the last two coordinates
        c1 = -(R[1, 2:] @ x[2:]) / R[1, 1]
        r1 = np.sqrt(max(budget, 0.0)) / R[1, 1]
        x1 = np.arange(np.ceil(c1 - r1), np.floor(c1 + r1) + 1)
        if x1.size == 0:
            return 0
        rest = budget - (R[1, 1] * (x1 - c1)) ** 2
        c0 = -(R[0, 1] * x1 + R[0, 2:] @ x[2:]) / R[0, 0]
        r0 = np.sqrt(np.maximum(rest, 0.0)) / R[0, 0]
        cnt = np.floor(c0 + r0) - np.ceil(c0 - r0) + 1
        return int(np.sum(np.where(rest >= 0, np.maximum(cnt, 0), 0)))
    c = -(R[level, level + 1:] @ x[level + 1:]) / R[level, level]
    r = np.sqrt(max(budget, 0.0)) / R[level, level]
    total = 0
    for xi in range(int(np.ceil(c - r)), int(np.floor(c + r)) + 1):
        rest = budget - (R[level, level] * (xi - c)) ** 2
        if rest < 0:
            continue
        x[level] = xi
        total += _count_subtree(R, x, level - 1, rest)
    x[level] = 0
    return total


def _count_ellipsoid(Q: np.ndarray, threads: int = 1) -> int:
    """#{x in Z^n : x^T Q x <= 1 + BOUNDARY_TOL} by Fincke-Pohst depth-first enumeration."""
    R = np.linalg.cholesky(Q).T  # Q = R^T R, R upper triangular
    n = Q.shape[0]
    budget = 1.0 + BOUNDARY_TOL
    if n == 1:
        return _count_subtree(R, np.zeros(1), 0, budget)
    top = n - 1
    r = np.sqrt(budget) / R[top, top]
    values = range(int(np.ceil(-r)), int(np.floor(r)) + 1)

    def branch(xi):
        x = np.zeros(n)
        x[top] = xi
        rest = budget - (R[top, top] * xi) ** 2
        return _count_subtree(R, x, top - 1, rest) if rest >= 0 else 0

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            return int(sum(ex.map(branch, values)))
    return int(sum(branch(v) for v in values))


def _lattice_count(m, u, rule, count) -> LatticeCount:
    N = m + 1
    logvol = log_unit_ball_volume(2 * N) - log_det_gram(m, u, rule)
    return LatticeCount(m, u.label, count, float(np.log(count)), float(logvol), float(logvol - 2 * N * np.log(2.0)))


def count_lattice_points(m: int, u: TestFunction, rule: QuadratureRule, threads: int = 1) -> LatticeCount:
    """Exact count of a in (Z + iZ)^{m+1} with a^H G a <= 1, including a = 0."""
    if m > MAX_ENUM_DEGREE:
        raise ValueError(f"enumeration dimension cap exceeded: m = {m} > {MAX_ENUM_DEGREE}")
    require_level(rule, m)
    Q = real_form(unnormalized_gram(m, u, rule))
    return _lattice_count(m, u, rule, _count_ellipsoid(Q, threads))


def count_brute_force(Q: np.ndarray, margin: float = 2.0, max_points: int = 50_000_000) -> int:
    """Redundant oracle: scan the bounding box of the ellipsoid enlarged by ``margin``."""
    budget = 1.0 + BOUNDARY_TOL
    half = np.floor(margin * np.sqrt(budget * np.diag(np.linalg.inv(Q)))).astype(int)
    if np.prod(2.0 * half + 1) > max_points:
        raise ValueError("brute-force box too large")
    axes = [np.arange(-h, h + 1) for h in half]
    total = 0
    # chunk over the first axis to bound memory
    rest = np.stack(np.meshgrid(*axes[1:], indexing="ij"), -1).reshape(-1, len(axes) - 1) if len(axes) > 1 else np.zeros((1, 0))
    for x0 in axes[0]:
        X = np.column_stack([np.full(len(rest), x0), rest])
        total += int(np.count_nonzero(np.einsum("ij,jk,ik->i", X, Q, X) <= budget))
    return total


def minkowski_check(m: int, u: TestFunction, rule: QuadratureRule, threads: int = 1) -> LatticeCount:
    """Count with log Vol B = log V_{2N} - log det G and bound log Vol B - 2N log 2; h0 >= bound is enforced."""
    return count_lattice_points(m, u, rule, threads)


def volume_identity_check(m: int, u: TestFunction, rule: QuadratureRule) -> float:
    """L_m(u) - (log Vol B(u) - log Vol B(0)); zero up to rounding."""
    require_level(rule, m)
    log_ratio = -log_det_gram(m, u, rule) + log_det_gram(m, constant(0.0), rule)
    return float(logdet_L(m, u, rule) - log_ratio)


def chain_bound(m: int, u: TestFunction, rule: QuadratureRule) -> dict:
    """Lower bounds for h0: the Minkowski bound and its energy form.

    With Z_m = log det G(0) and V the unit-ball volume in R^{2N},
    minkowski = L_m(u) + log V - Z_m - 2N log 2 and
    energy = (m + 1) E_{m+2}(u) + log V - Z_m - 2N log 2 <= minkowski.
    """
    N = m + 1
    logV = log_unit_ball_volume(2 * N)
    Z = log_det_gram(m, constant(0.0), rule)
    L = logdet_L(m, u, rule)
    E = -dirichlet_energy(u, rule) / (2.0 * (m + 2)) + mean_value(u, rule)
    tail = logV - Z - 2 * N * np.log(2.0)
    return {"Z_m": float(Z), "minkowski": float(L + tail), "energy": float((m + 1) * E + tail)}


CSV_FIELDS = ["m", "u_label", "count", "h0", "log_ball_volume", "minkowski_bound", "slack"]


def counts_to_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(CSV_FIELDS)
        for r in rows:
            wr.writerow([r.m, r.u_label, r.count, repr(r.h0), repr(r.log_ball_volume), repr(r.minkowski_bound), repr(r.slack)])

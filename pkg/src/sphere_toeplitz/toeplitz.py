"""Normalized Gram matrices of weighted monomials, Toeplitz operators and Bergman measures.

The basis of degree-m polynomials is taken in the omega_0-orthonormal form

    b_i(z) = c_i z^i (1 + |z|^2)^(-m/2),   c_i^2 = (m + 1) C(m, i),

so |b_i|^2 = (m + 1) C(m, i) s^i (1 - s)^(m - i) in the height variable s.
For a weight u the Gram matrix is M_ij = int b_i conj(b_j) e^{-u} omega_0,
and L_m(u) = -log det M.  With M = L L^H the vector e = L^{-1} b(z) is the
u-orthonormal basis at z.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import gammaln, logsumexp, xlog1py, xlogy

from .functions import TestFunction
from .geometry import StereoCoord, hopf_section, lift_array, rotation_from_unitary
from .quadrature import QuadratureRule

__all__ = [
    "GramMatrix",
    "BergmanEval",
    "GramError",
    "log_norm_consts",
    "basis_at",
    "assemble_gram",
    "logdet_L",
    "bergman",
    "bergman_density",
    "kernel",
    "toeplitz_matrix",
    "rv_operator",
    "first_variation",
    "second_derivative_trace",
    "gram_to_csv",
    "bergman_profile_csv",
    "require_level",
    "rotation_action",
]


class GramError(ArithmeticError):
    pass


def require_level(rule: QuadratureRule, m: int) -> None:
    if m < 0:
        raise ValueError(f"degree must be >= 0, got {m}")
    if rule.level < m:
        raise ValueError(f"rule level insufficient: level {rule.level} < m = {m}")


def log_norm_consts(m: int) -> np.ndarray:
    """log c_i^2 = log((m + 1) C(m, i)), computed from log-gammas."""
    i = np.arange(m + 1)
    return np.log(m + 1.0) + gammaln(m + 1.0) - gammaln(i + 1.0) - gammaln(m - i + 1.0)


def _log_abs_basis(m: int, s: np.ndarray) -> np.ndarray:
    """log |b_i|^2 at heights s, shape (len(s), m + 1)."""
    i = np.arange(m + 1)
    s = np.asarray(s, dtype=float)[..., None]
    return log_norm_consts(m) + xlogy(i, s) + xlog1py(m - i, -s)


def basis_at(m: int, x) -> np.ndarray:
    """b_i at ambient points x (..., 3); returns (..., m + 1) complex."""
    x = np.asarray(x, dtype=float)
    s = np.clip(0.5 * (1.0 + x[..., 2]), 0.0, 1.0)
    theta = np.arctan2(x[..., 1], x[..., 0])
    mag = np.exp(0.5 * _log_abs_basis(m, s))
    return mag * np.exp(1j * theta[..., None] * np.arange(m + 1))


def _as_points(z) -> np.ndarray:
    """Accept StereoCoord, complex chart values or ambient (..., 3) arrays."""
    if isinstance(z, StereoCoord):
        return np.array([0.0, 0.0, 1.0]) if z.at_infinity else lift_array(np.asarray(z.value))
    arr = np.asarray(z)
    if np.iscomplexobj(arr) or arr.ndim == 0 or arr.shape[-1] != 3:
        return lift_array(arr.astype(complex))
    return arr.astype(float)


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """M with a factor M = chol chol^H.

    ``chol`` is the lower Cholesky factor, except for weights that are a
    radial profile composed with a rotation: there M = W D W^H with W the
    unitary action of the rotation on the basis, and chol = W D^{1/2}.
    This keeps L_m exact for weights whose monomial Gram is too
    ill-conditioned to factor directly.
    """

    m: int
    entries: np.ndarray = field(repr=False)
    chol: np.ndarray = field(repr=False)
    log_chol_diag: np.ndarray = field(repr=False)
    radial: bool = False
    unitary: np.ndarray | None = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return self.m + 1

    @property
    def triangular(self) -> bool:
        return self.unitary is None

    def logdet(self) -> float:
        return float(2.0 * np.sum(self.log_chol_diag))

    def whiten(self, B: np.ndarray) -> np.ndarray:
        """Rows b -> chol^{-1} b, i.e. the u-orthonormal basis evaluated where b was."""
        shp = B.shape
        X = B.reshape(-1, self.N).T
        if self.unitary is None:
            E = solve_triangular(self.chol, X, lower=True)
        else:
            E = (self.unitary.conj().T @ X) * np.exp(-self.log_chol_diag)[:, None]
        return E.T.reshape(shp)


def _radial_logdiag(m: int, profile, rule: QuadratureRule) -> np.ndarray:
    s, w = rule.s_nodes, rule.s_weights
    g = np.broadcast_to(profile(s)[0], s.shape)
    if not np.all(np.isfinite(g)):
        raise GramError("Gram not positive definite: increase quadrature level or check u")
    return logsumexp(_log_abs_basis(m, s) - g[:, None], b=w[:, None], axis=0)


def _radial_gram(m: int, u: TestFunction, rule: QuadratureRule) -> GramMatrix:
    logd = _radial_logdiag(m, u.profile, rule)
    diag = np.exp(logd)
    return GramMatrix(m, np.diag(diag).astype(complex), np.diag(np.sqrt(diag)).astype(complex), 0.5 * logd, True)


def rotation_action(m: int, V: np.ndarray, rule: QuadratureRule) -> np.ndarray:
    """Unitary W with b(R_V^T y) = (phase) W b(y), computed by exact quadrature."""
    y = rule.x
    Z = hopf_section(y) @ np.asarray(V).conj()  # rows of V^H Z
    i = np.arange(m + 1)
    with np.errstate(divide="ignore"):
        l0, l1 = np.log(Z[:, :1]), np.log(Z[:, 1:])
    logmono = np.where(i == 0, 0.0, i * l0) + np.where(i == m, 0.0, (m - i) * l1)
    P = np.exp(0.5 * log_norm_consts(m) + logmono)
    B = basis_at(m, y)
    return (P.T * rule.weights) @ B.conj()


def _framed_gram(m: int, u: TestFunction, rule: QuadratureRule) -> GramMatrix:
    logd = _radial_logdiag(m, u.profile, rule)
    W = rotation_action(m, u.frame, rule)
    F = W * np.exp(0.5 * logd)
    M = F @ F.conj().T
    return GramMatrix(m, 0.5 * (M + M.conj().T), F, 0.5 * logd, False, W)


def _weighted_nodes(u: TestFunction, rule: QuadratureRule, extra=None):
    x = rule.x
    if not u.radial and u.profile is not None:
        # integrate on the rule carried into the frame of u, matching the framed Gram
        x = x @ rotation_from_unitary(u.frame)
    uval = u.at(x)
    wt = rule.weights * np.exp(-uval)
    if extra is not None:
        wt = wt * extra(x)
    return x, wt


def assemble_gram(m: int, u: TestFunction, rule: QuadratureRule) -> GramMatrix:
    """Normalized Gram matrix and a factor of it.

    Radial u uses 1D integrals; a rotated radial profile uses the rotation
    action on the basis; everything else is a dense quadrature followed by Cholesky.
    """
    require_level(rule, m)
    if u.radial:
        return _radial_gram(m, u, rule)
    if u.profile is not None:
        return _framed_gram(m, u, rule)
    x, wt = _weighted_nodes(u, rule)
    B = basis_at(m, x)
    M = (B.T * wt) @ B.conj()
    M = 0.5 * (M + M.conj().T)
    try:
        C = np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise GramError("Gram not positive definite: increase quadrature level or check u") from exc
    d = np.real(np.diag(C))
    if np.any(~np.isfinite(d)) or np.any(d <= 0):
        raise GramError("Gram not positive definite: increase quadrature level or check u")
    return GramMatrix(m, M, C, np.log(d), False)


def logdet_L(m: int, u: TestFunction, rule: QuadratureRule, gram: GramMatrix | None = None) -> float:
    """L_m(u) = -log det M = -2 sum log diag(chol)."""
    gram = gram or assemble_gram(m, u, rule)
    return -gram.logdet()


@dataclass(frozen=True)
class BergmanEval:
    z: StereoCoord
    beta_density: float
    kernel_row: np.ndarray = field(repr=False)


def _orthonormal_rows(gram: GramMatrix, x) -> np.ndarray:
    return gram.whiten(basis_at(gram.m, x))


def bergman_density(m: int, u: TestFunction, rule: QuadratureRule, z, gram: GramMatrix | None = None) -> np.ndarray:
    """Density of the Bergman measure beta_u with respect to omega_0 at z (vectorized)."""
    gram = gram or assemble_gram(m, u, rule)
    x = _as_points(z)
    E = _orthonormal_rows(gram, x)
    return np.sum(np.abs(E) ** 2, axis=-1) * np.exp(-u.at(x)) / gram.N


def bergman(m: int, u: TestFunction, rule: QuadratureRule, z, gram: GramMatrix | None = None) -> BergmanEval:
    gram = gram or assemble_gram(m, u, rule)
    if not isinstance(z, StereoCoord):
        z = StereoCoord(complex(z))
    x = _as_points(z)
    e = _orthonormal_rows(gram, x)
    beta = float(np.sum(np.abs(e) ** 2) * np.exp(-u.at(x)) / gram.N)
    return BergmanEval(z, beta, e)


def kernel(m: int, u: TestFunction, rule: QuadratureRule, z, w, gram: GramMatrix | None = None) -> np.ndarray:
    """Weighted reproducing kernel e(z)^T conj(e(w)) e^{-(u(z) + u(w))/2}.

    The Fubini-Study factors are already inside the basis, so
    int |K(z, w)|^2 omega_0(w) = N beta_u(z).
    """
    gram = gram or assemble_gram(m, u, rule)
    xz, xw = _as_points(z), _as_points(w)
    ez, ew = _orthonormal_rows(gram, xz), _orthonormal_rows(gram, xw)
    return np.sum(ez * ew.conj(), axis=-1) * np.exp(-0.5 * (u.at(xz) + u.at(xw)))


def toeplitz_matrix(m: int, u: TestFunction, rule: QuadratureRule, f: TestFunction, gram: GramMatrix | None = None):
    """T[f]_ij = <f e_i, e_j> in the u-orthonormal basis."""
    gram = gram or assemble_gram(m, u, rule)
    x, wt = _weighted_nodes(u, rule, f.at)
    E = _orthonormal_rows(gram, x)
    T = (E.T * wt) @ E.conj()
    return 0.5 * (T + T.conj().T)


def rv_operator(m: int, u: TestFunction, v: TestFunction, rule: QuadratureRule, z, gram: GramMatrix | None = None):
    """First variation of beta_u along v at z.

    R[v](z) = (1/N) e^{-u(z)} e(z)^H T[v] e(z) - beta_u(z) v(z).
    """
    gram = gram or assemble_gram(m, u, rule)
    x = _as_points(z)
    T = toeplitz_matrix(m, u, rule, v, gram)
    E = _orthonormal_rows(gram, x)
    quad = np.real(np.einsum("...i,ij,...j->...", E.conj(), T, E))
    wu = np.exp(-u.at(x))
    beta = np.sum(np.abs(E) ** 2, axis=-1) * wu / gram.N
    out = quad * wu / gram.N - beta * v.at(x)
    return float(out) if np.ndim(out) == 0 else out


def first_variation(m: int, u: TestFunction, v: TestFunction, rule: QuadratureRule, gram: GramMatrix | None = None):
    """d/ds L_m(u + s v) at 0, as Tr T[v] = N int v beta_u."""
    return float(np.real(np.trace(toeplitz_matrix(m, u, rule, v, gram))))


def second_derivative_trace(m: int, u: TestFunction, v: TestFunction, rule: QuadratureRule, gram: GramMatrix | None = None):
    """d^2/ds^2 of L_m(u + s v) / N at s = 0: (Tr T[v]^2 - Tr T[v^2]) / N, which is <= 0."""
    gram = gram or assemble_gram(m, u, rule)
    T1 = toeplitz_matrix(m, u, rule, v, gram)
    vsq = TestFunction(f"({v.label})^2", lambda x: (v.at(x) ** 2, None, None))
    T2 = toeplitz_matrix(m, u, rule, vsq, gram)
    return float(np.real(np.sum(T1 * T1.T) - np.trace(T2))) / gram.N


def gram_to_csv(gram: GramMatrix, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["row", "col", "re", "im"])
        for i in range(gram.N):
            for j in range(gram.N):
                v = gram.entries[i, j]
                wr.writerow([i, j, repr(float(v.real)), repr(float(v.imag))])


def bergman_profile_csv(m: int, u: TestFunction, rule: QuadratureRule, path, n: int = 201) -> None:
    """beta_u along the meridian theta = 0, on a uniform grid in s."""
    gram = assemble_gram(m, u, rule)
    s = np.linspace(0.0, 1.0, n)
    x = np.stack([2 * np.sqrt(s * (1 - s)), np.zeros_like(s), 2 * s - 1], axis=-1)
    beta = bergman_density(m, u, rule, x, gram)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["s", "r", "beta_density"])
        with np.errstate(divide="ignore"):
            r = np.sqrt(s / (1 - s))
        for si, ri, bi in zip(s, r, beta):
            wr.writerow([repr(float(si)), repr(float(ri)), repr(float(bi))])

"""Envelopes, geodesics and critical points for rotation-invariant potentials.

A radial function is a function of t = log|z|^2 = log(s / (1 - s)).  For the
class k omega_0 the relevant potential is phi = k psi_0 + u with
psi_0(t) = log(1 + e^t); u is k omega_0-psh exactly when phi is convex with
slopes in [0, k], and omega_u = (k omega_0 + dd^c u) / k has t-density phi'' / k.

On a t-grid the Monge-Ampere measure is the discrete second difference of phi
with boundary fluxes 0 and k, and the energy

    E(u) = (1 / 2k) sum_i u_i (2k nu_i + (A u)_i),   nu = A psi_0 + e_last,

has gradient exactly mu(u) / k, which makes the envelope identities hold to
rounding error.  Geodesics are built by interpolating the Legendre duals of
the endpoint potentials.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar
from scipy.special import expit, logit, logsumexp

from .energy import dirichlet_energy, energy_E, mean_value
from .functions import TestFunction, dilation, zonal
from .quadrature import QuadratureRule, build_quadrature
from .toeplitz import _log_abs_basis, _radial_logdiag, logdet_L, require_level

__all__ = [
    "RadialFunction",
    "RadialGeodesic",
    "GeodesicReport",
    "SolverResult",
    "t_grid",
    "psi0",
    "project_envelope",
    "ma_measure_radial",
    "discrete_energy",
    "check_orthogonality",
    "derivative_of_composed_energy",
    "geodesic_radial",
    "check_functionals_along_geodesic",
    "radial_bergman_density",
    "critical_point_solver",
    "distance_to_dilation_family",
    "NotPsh",
]

T_DEFAULT = 12.0
G_DEFAULT = 2049


class NotPsh(ValueError):
    pass


def t_grid(T: float = T_DEFAULT, G: int = G_DEFAULT) -> np.ndarray:
    return np.linspace(-T, T, G)


def psi0(t):
    return np.logaddexp(0.0, t)


def _sigma_diff(a, b):
    """expit(a) - expit(b) without cancellation for large arguments."""
    a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
    pos = (a + b) > 0
    return np.where(pos, expit(-b) - expit(-a), expit(a) - expit(b))


def _profile_from_t(U, Ut, Utt):
    """Turn t-derivatives into a profile g(s) with g' and g'' in s."""

    def prof(s):
        s = np.asarray(s, dtype=float)
        t = logit(np.clip(s, 1e-300, 1 - 1e-16))
        q = s * (1.0 - s)
        v, v1, v2 = U(t), Ut(t), Utt(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            g1 = np.where(q > 0, v1 / q, 0.0)
            g2 = np.where(q > 0, (v2 - (1.0 - 2.0 * s) * v1) / (q * q), 0.0)
        return v, g1, g2

    return prof


@dataclass(frozen=True, eq=False)
class RadialFunction:
    """Grid values of a rotation-invariant function in t = log|z|^2.

    Outside the grid the function continues linearly with the given slopes.
    ``source`` keeps an analytic radial TestFunction when one produced the data.
    """

    grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    left_slope: float = 0.0
    right_slope: float = 0.0
    source: Optional[TestFunction] = field(default=None, repr=False)
    label: str = "radial"

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.ndim != 1 or g.shape != v.shape:
            raise ValueError("grid and values must be 1-D arrays of equal length")
        if np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_test_function(cls, u: TestFunction, grid=None) -> "RadialFunction":
        if not u.radial:
            raise ValueError("test function is not radial")
        grid = t_grid() if grid is None else np.asarray(grid, dtype=float)
        return cls(grid, u.profile(expit(grid))[0], 0.0, 0.0, u, u.label)

    @classmethod
    def from_callable(cls, f, grid=None, label="radial") -> "RadialFunction":
        grid = t_grid() if grid is None else np.asarray(grid, dtype=float)
        return cls(grid, np.asarray(f(grid), dtype=float), 0.0, 0.0, None, label)

    def with_values(self, values, label=None) -> "RadialFunction":
        return RadialFunction(self.grid, values, self.left_slope, self.right_slope, None, label or self.label)

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        g, v = self.grid, self.values
        out = np.interp(t, g, v)
        out = np.where(t < g[0], v[0] + self.left_slope * (t - g[0]), out)
        return np.where(t > g[-1], v[-1] + self.right_slope * (t - g[-1]), out)

    def potential(self, k: float) -> np.ndarray:
        return k * psi0(self.grid) + self.values

    def is_psh(self, k: float, tol: float = 1e-10) -> bool:
        return bool(np.all(ma_weights(self, k) >= -tol))

    def to_test_function(self, kind: str = "auto") -> TestFunction:
        """Radial TestFunction: the analytic source, a clamped cubic spline or linear interpolation."""
        if kind == "auto":
            kind = "source" if self.source is not None else "spline"
        if kind == "source":
            if self.source is None:
                raise ValueError("no analytic source attached")
            return self.source
        g, v = self.grid, self.values
        lo, hi = g[0], g[-1]
        if kind == "spline":
            sp = CubicSpline(g, v, bc_type=((1, self.left_slope), (1, self.right_slope)))
            d1, d2 = sp.derivative(1), sp.derivative(2)

            def U(t):
                return np.where(t < lo, v[0] + self.left_slope * (t - lo), np.where(t > hi, v[-1] + self.right_slope * (t - hi), sp(np.clip(t, lo, hi))))

            def Ut(t):
                return np.where(t < lo, self.left_slope, np.where(t > hi, self.right_slope, d1(np.clip(t, lo, hi))))

            def Utt(t):
                return np.where((t < lo) | (t > hi), 0.0, d2(np.clip(t, lo, hi)))

        elif kind == "linear":
            slopes = np.concatenate([[self.left_slope], np.diff(v) / np.diff(g), [self.right_slope]])
            U = self

            def Ut(t):
                return slopes[np.searchsorted(g, t, side="right")]

            def Utt(t):
                return np.zeros_like(np.asarray(t, dtype=float))

        else:
            raise ValueError(f"unknown interpolation kind {kind!r}")
        return zonal(_profile_from_t(U, Ut, Utt), f"{self.label}[{kind}]")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t", "value"])
            for a, b in zip(self.grid, self.values):
                wr.writerow([repr(float(a)), repr(float(b))])


# discrete Monge-Ampere calculus on the grid

def _A(f: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Flux differences with zero boundary flux; symmetric and negative semi-definite."""
    flux = np.diff(f) / np.diff(grid)
    out = np.zeros_like(f)
    out[:-1] += flux
    out[1:] -= flux
    return out


def _nu(grid: np.ndarray) -> np.ndarray:
    nu = _A(psi0(grid), grid)
    nu[-1] += 1.0
    return nu


def ma_weights(u: RadialFunction, k: float) -> np.ndarray:
    mu = _A(u.potential(k), u.grid)
    mu[-1] += k
    return mu / k


def ma_measure_radial(u: RadialFunction, k: float, tol: float = 1e-10) -> np.ndarray:
    """Weights of the normalized Monge-Ampere measure omega_u on the grid nodes (total mass 1)."""
    w = ma_weights(u, k)
    if np.any(w < -tol):
        raise NotPsh(f"input not omega-psh (min weight {w.min():.3e})")
    return w


def discrete_energy(u: RadialFunction, k: float) -> float:
    v = u.values
    return float(np.sum(v * (2.0 * k * _nu(u.grid) + _A(v, u.grid))) / (2.0 * k))


def project_envelope(u: RadialFunction, k: float) -> RadialFunction:
    """Largest k omega_0-psh minorant: lower convex hull of phi = k psi_0 + u with slopes clipped to [0, k]."""
    t = u.grid
    phi = u.potential(k)
    hull = []
    for i in range(t.size):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # drop b unless it lies strictly below the chord from a to i
            if (phi[b] - phi[a]) * (t[i] - t[a]) >= (phi[i] - phi[a]) * (t[b] - t[a]):
                hull.pop()
            else:
                break
        hull.append(i)
    hull = np.array(hull)
    env = np.interp(t, t[hull], phi[hull])
    slopes = np.diff(phi[hull]) / np.diff(t[hull])
    # left of the minimum: slope-0 support line
    jmin = hull[np.searchsorted(slopes, 0.0, side="left")] if slopes.size else hull[0]
    env = np.where(t < t[jmin], phi[jmin], env)
    # right of the first slope above k: slope-k support line
    over = np.flatnonzero(slopes > k)
    if over.size:
        jk = hull[over[0]]
        env = np.where(t > t[jk], phi[jk] + k * (t - t[jk]), env)
    env = np.minimum(env, phi)
    return u.with_values(env - k * psi0(t), label=f"P({u.label})")


def check_orthogonality(u: RadialFunction, k: float) -> float:
    """int (u - P u) d omega_{P u}; vanishes because omega_{P u} lives on the contact set."""
    Pu = project_envelope(u, k)
    return float(np.sum((u.values - Pu.values) * ma_measure_radial(Pu, k)))


def derivative_of_composed_energy(u: RadialFunction, v: RadialFunction, k: float, step: float = 1e-3):
    """(centered difference of E o P along u + s v, int v d omega_{P u})."""
    up = u.with_values(u.values + step * v.values)
    um = u.with_values(u.values - step * v.values)
    fd = (discrete_energy(project_envelope(up, k), k) - discrete_energy(project_envelope(um, k), k)) / (2.0 * step)
    exact = float(np.sum(v.values * ma_measure_radial(project_envelope(u, k), k)))
    return fd, exact


# geodesics

class _Endpoint:
    """phi(tau) = k psi_0(tau) + U(tau) with derivatives, from a radial TestFunction."""

    def __init__(self, u: TestFunction, k: float):
        self.u, self.k = u, float(k)

    def U(self, tau):
        s, sb = expit(tau), expit(-tau)
        g, g1, g2 = self.u.profile(s)
        q = s * sb  # s (1 - s) without cancellation at large tau
        return np.broadcast_to(g, s.shape), g1 * q, g2 * q * q + g1 * q * (sb - s)

    def phi(self, tau):
        U, U1, U2 = self.U(tau)
        s = expit(tau)
        return self.k * psi0(tau) + U, self.k * s + U1, self.k * s * expit(-tau) + U2

    def tau_of(self, q, tau=None, tol=1e-14, it=100):
        """Solve phi'(tau) = k expit(q), as logit(phi'(tau) / k) = q, by bracketed Newton."""
        q = np.atleast_1d(np.asarray(q, dtype=float))
        tau = np.clip(q if tau is None else np.atleast_1d(tau), -59.0, 59.0).astype(float)
        lo, hi = np.full(q.shape, -60.0), np.full(q.shape, 60.0)
        act = np.arange(q.size)
        for _ in range(it):
            x, qa = tau[act], q[act]
            _, U1, U2 = self.U(x)
            y = expit(x) + U1 / self.k
            yb = expit(-x) - U1 / self.k
            ok = (y > 0) & (yb > 0)
            with np.errstate(divide="ignore", invalid="ignore"):
                f = np.where(ok, np.log(np.where(ok, y, 1.0)) - np.log(np.where(ok, yb, 1.0)) - qa, np.where(y <= 0, -1.0, 1.0))
                d = (expit(x) * expit(-x) + U2 / self.k) * (1.0 / y + 1.0 / yb)
                nx = x - f / d
            lo[act] = np.where(f < 0, x, lo[act])
            hi[act] = np.where(f >= 0, x, hi[act])
            bad = ~ok | ~np.isfinite(nx) | (nx < lo[act]) | (nx > hi[act])
            nx = np.where(bad, 0.5 * (lo[act] + hi[act]), nx)
            tau[act] = nx
            done = (np.abs(nx - x) <= tol * (1.0 + np.abs(x))) | (ok & (np.abs(f) <= 4e-16 * (1.0 + np.abs(qa))))
            act = act[~done]
            if act.size == 0:
                break
        return tau.reshape(np.shape(q))


@dataclass(frozen=True, eq=False)
class RadialGeodesic:
    u0: RadialFunction
    u1: RadialFunction
    k: float
    _e0: _Endpoint = field(repr=False)
    _e1: _Endpoint = field(repr=False)

    def _solve(self, t, s):
        """Return (q, tau0, tau1, Tp) with (1-s) tau0 + s tau1 = t, p = k expit(q)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        lo, hi = np.full(t.shape, -60.0), np.full(t.shape, 60.0)
        q = np.clip(t, -59.0, 59.0)
        t0, t1 = self._e0.tau_of(q), self._e1.tau_of(q)
        act = np.arange(t.size)
        fprev = np.full(t.shape, np.inf)
        for _ in range(200):
            qa = q[act]
            f = (1.0 - s) * t0[act] + s * t1[act] - t[act]
            stall = np.abs(f) > 0.5 * fprev[act]
            fprev[act] = np.abs(f)
            d0, d1 = self._e0.phi(t0[act])[2], self._e1.phi(t1[act])[2]
            pq = self.k * expit(qa) * expit(-qa)
            lo[act] = np.where(f < 0, qa, lo[act])
            hi[act] = np.where(f >= 0, qa, hi[act])
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                nq = qa - f / (((1.0 - s) / d0 + s / d1) * pq)
            bad = stall | ~np.isfinite(nq) | (nq < lo[act]) | (nq > hi[act])
            nq = np.where(bad, 0.5 * (lo[act] + hi[act]), nq)
            q[act] = nq
            t0[act] = self._e0.tau_of(nq, t0[act])
            t1[act] = self._e1.tau_of(nq, t1[act])
            done = (np.abs(nq - qa) <= 1e-14 * (1.0 + np.abs(qa))) | (np.abs(f) <= 4e-16 * (1.0 + np.abs(t[act])))
            act = act[~done]
            if act.size == 0:
                break
        d0, d1 = self._e0.phi(t0)[2], self._e1.phi(t1)[2]
        return q, t0, t1, (1.0 - s) / d0 + s / d1

    def derivatives(self, t, s):
        """(U, U_t, U_tt, phi_tt) of the slice u_s at t."""
        t = np.asarray(t, dtype=float)
        if s == 0.0 or s == 1.0:
            e = self._e0 if s == 0.0 else self._e1
            U, U1, U2 = e.U(t)
            return U, U1, U2, e.phi(t)[2]
        q, t0, t1, Tp = self._solve(t, s)
        f0, f1 = self._e0.phi(t0)[0], self._e1.phi(t1)[0]
        U = (1.0 - s) * f0 + s * f1 - self.k * psi0(t)
        U1 = self.k * _sigma_diff(q, t)
        phi_tt = 1.0 / Tp
        st = expit(t)
        return U, U1, phi_tt - self.k * st * expit(-t), phi_tt

    def __call__(self, t, s) -> np.ndarray:
        return self.derivatives(t, s)[0]

    def slice(self, s: float) -> RadialFunction:
        return RadialFunction(self.u0.grid, self(self.u0.grid, s), 0.0, 0.0, self.test_function(s), f"geodesic(s={s:g})")

    def test_function(self, s: float) -> TestFunction:
        s = float(s)

        def joint(sv):
            sv = np.asarray(sv, dtype=float)
            t = logit(np.clip(sv, 1e-300, 1 - 1e-16))
            U, U1, U2, _ = self.derivatives(t, s)
            return _profile_from_t(lambda _: U, lambda _: U1, lambda _: U2)(sv)

        return zonal(joint, f"geodesic(s={s:g})")

    def hessian_det(self, s: float, h: float = 1e-3, t=None) -> np.ndarray:
        """phi_tt phi_ss - phi_ts^2 on the grid, with s-derivatives by 5-point differences."""
        t = self.u0.grid if t is None else t
        ss = np.clip(s + h * np.arange(-2, 3), 0.0, 1.0)
        if ss[0] != s - 2 * h or ss[-1] != s + 2 * h:
            raise ValueError("s too close to the endpoints for the stencil")
        vals = [self.derivatives(t, si) for si in ss]
        U = np.array([v[0] for v in vals])
        U1 = np.array([v[1] for v in vals])
        phi_ss = (-U[0] + 16 * U[1] - 30 * U[2] + 16 * U[3] - U[4]) / (12 * h * h)
        phi_ts = (U1[0] - 8 * U1[1] + 8 * U1[3] - U1[4]) / (12 * h)
        return vals[2][3] * phi_ss - phi_ts**2

    def snapshots_csv(self, path, s_values) -> None:
        cols = [self(self.u0.grid, float(s)) for s in s_values]
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t"] + [f"s={float(s):g}" for s in s_values])
            for i, t in enumerate(self.u0.grid):
                wr.writerow([repr(float(t))] + [repr(float(c[i])) for c in cols])


def _endpoint_function(u: RadialFunction, k: float) -> TestFunction:
    f = u.to_test_function()
    # strict k omega_0-psh: k + Laplacian > 0 (phi strictly convex) and discrete convexity
    s = np.concatenate([[0.0], expit(u.grid), [1.0]])
    g, g1, g2 = f.profile(s)
    lap = (1.0 - 2.0 * s) * g1 + s * (1.0 - s) * g2
    if np.any(k + lap <= 0) or not u.is_psh(k):
        raise NotPsh(f"endpoint {u.label!r} is not strictly omega-psh for k = {k}")
    return f


def geodesic_radial(u0: RadialFunction, u1: RadialFunction, k: float) -> RadialGeodesic:
    """Geodesic between strictly psh radial endpoints via partial Legendre interpolation."""
    if not np.array_equal(u0.grid, u1.grid):
        raise ValueError("endpoints must share a grid")
    e0 = _Endpoint(_endpoint_function(u0, k), k)
    e1 = _Endpoint(_endpoint_function(u1, k), k)
    return RadialGeodesic(u0, u1, float(k), e0, e1)


@dataclass(frozen=True)
class GeodesicReport:
    s: list
    energy: list
    normalized_L: list
    F: list
    energy_affine_dev: float
    L_min_second_diff: float
    F_min_second_diff: float
    F_max_excess: float

    @property
    def ok(self) -> bool:
        return self.energy_affine_dev <= 1e-6 and self.L_min_second_diff >= -1e-7 and self.F_max_excess <= 1e-7


def check_functionals_along_geodesic(g: RadialGeodesic, m: int, rule: QuadratureRule, n_s: int = 21,
                                     energy_level: int = 128) -> GeodesicReport:
    """E_k affine, L_m / (m+1) convex and F = E_k - L_m / (m+1) concave along the path (k = m + 2).

    E_k is a radial 1D integral; it gets its own finer rule because slices near
    a degenerate endpoint have sharp profiles.
    """
    if abs(g.k - (m + 2)) > 1e-12:
        raise ValueError(f"geodesic class k = {g.k} must equal m + 2 = {m + 2}")
    require_level(rule, m)
    s = np.linspace(0.0, 1.0, n_s)
    erule = build_quadrature(max(rule.level, energy_level))
    E, L = [], []
    for si in s:
        u = g.test_function(si)
        E.append(energy_E(u, int(round(g.k)), erule))
        L.append(logdet_L(m, u, rule) / (m + 1))
    E, L = np.array(E), np.array(L)
    F = E - L
    chord = E[0] + s * (E[-1] - E[0])
    d2L = L[:-2] - 2 * L[1:-1] + L[2:]
    d2F = F[:-2] - 2 * F[1:-1] + F[2:]
    return GeodesicReport(
        list(s), list(E), list(L), list(F),
        float(np.max(np.abs(E - chord))), float(d2L.min()), float(d2F.min()), float(np.max(F - F[0])),
    )


# critical points

def radial_bergman_density(m: int, g_values: np.ndarray, s: np.ndarray, rule: QuadratureRule, g_nodes: np.ndarray):
    """beta_u at heights s for radial u with values g_values at s and g_nodes at the rule's s-nodes."""
    logd = logsumexp(_log_abs_basis(m, rule.s_nodes) - g_nodes[:, None], b=rule.s_weights[:, None], axis=0)
    return np.exp(logsumexp(_log_abs_basis(m, s) - logd, axis=-1) - g_values) / (m + 1)


def distance_to_dilation_family(g, k: float, s=None):
    """min over lambda, c of sup_s |g(s) - k u_lambda(s) - c|; returns (distance, lambda)."""
    s = np.linspace(0.0, 1.0, 801) if s is None else s
    vals = g(s)

    def dist(a):
        r = vals - k * np.log1p((np.exp(2 * a) - 1.0) * s)
        return 0.5 * (r.max() - r.min())

    best = min((dist(a), a) for a in np.linspace(-4, 4, 81))
    res = minimize_scalar(dist, bracket=(best[1] - 0.1, best[1], best[1] + 0.1), tol=1e-12)
    a = res.x if res.fun < best[0] else best[1]
    return float(min(res.fun, best[0])), float(np.exp(a))


@dataclass(frozen=True)
class SolverResult:
    u: RadialFunction
    coefficients: np.ndarray = field(repr=False)
    history: list = field(repr=False)
    converged: bool
    distance_to_family: float
    lam: float

    @property
    def residual(self) -> float:
        return self.history[-1]["residual"]

    def history_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.history, fh, indent=1)


class SolverDiverged(RuntimeError):
    def __init__(self, history):
        super().__init__(f"critical-point iteration diverged after {len(history)} steps")
        self.history = history


def critical_point_solver(
    m: int,
    u_init: RadialFunction,
    rule: QuadratureRule | None = None,
    damping: float = 0.5,
    max_iter: int = 500,
    tol: float = 1e-6,
    degree: int = 96,
) -> SolverResult:
    """Damped fixed-point iteration for omega_u = beta_u with k = m + 2.

    Each step solves (s (1 - s) w')' = k (beta(u_j) - 1) by two integrations
    in a Chebyshev basis on s in [0, 1], centers w, and sets
    u_{j+1} = (1 - damping) u_j + damping w.
    """
    if not 0.0 < damping <= 1.0:
        raise ValueError("damping must lie in (0, 1]")
    k = m + 2
    rule = rule or build_quadrature(max(m, 8))
    require_level(rule, m)
    if not u_init.is_psh(k):
        raise NotPsh("u_init is not omega-psh")
    x = np.cos(np.pi * (np.arange(degree + 1) + 0.5) / (degree + 1))  # Chebyshev points in (-1, 1)
    sc = 0.5 * (x + 1.0)
    u0 = u_init.to_test_function()
    coef = C.chebfit(x, u0.profile(sc)[0], degree)
    xn = 2.0 * rule.s_nodes - 1.0
    sw = np.linspace(0.0, 1.0, 801)

    def beta(c, s):
        return radial_bergman_density(m, C.chebval(2 * s - 1, c), s, rule, C.chebval(xn, c))

    def residual(c):
        d1, d2 = C.chebder(c, 1), C.chebder(c, 2)
        s = sw
        # d/ds = 2 d/dx
        lap = (1 - 2 * s) * 2 * C.chebval(2 * s - 1, d1) + s * (1 - s) * 4 * C.chebval(2 * s - 1, d2)
        return float(np.max(np.abs(1.0 + lap / k - beta(c, s))))

    def gfun(c):
        return lambda s: C.chebval(2 * np.asarray(s) - 1, c)

    history = []
    r = residual(coef)
    dist, lam = distance_to_dilation_family(gfun(coef), k)
    history.append({"iter": 0, "residual": r, "distance_to_family": dist})
    converged = r <= tol
    it = 0
    while not converged and it < max_iter:
        it += 1
        b = beta(coef, sc)
        Bc = C.chebint(C.chebfit(x, b, degree), lbnd=-1) * 0.5  # B(s) = int_0^s beta
        Bv = C.chebval(x, Bc)
        wprime = k * (Bv - sc) / (sc * (1.0 - sc))
        wc = C.chebint(C.chebfit(x, wprime, degree), lbnd=-1) * 0.5
        wc = C.chebfit(x, C.chebval(x, wc), degree)
        wc[0] -= float(np.sum(rule.s_weights * C.chebval(xn, wc)))
        coef = (1.0 - damping) * coef + damping * wc
        r = residual(coef)
        dist, lam = distance_to_dilation_family(gfun(coef), k)
        history.append({"iter": it, "residual": r, "distance_to_family": dist})
        converged = r <= tol
        if it >= 50 and r > 10.0 * history[it - 50]["residual"]:
            raise SolverDiverged(history)
    g = gfun(coef)
    c1, c2 = C.chebder(coef, 1), C.chebder(coef, 2)

    def prof(s):
        s = np.asarray(s, dtype=float)
        return g(s), 2 * C.chebval(2 * s - 1, c1), 4 * C.chebval(2 * s - 1, c2)

    tf = zonal(prof, f"critical(m={m})")
    u_star = RadialFunction(u_init.grid, prof(expit(u_init.grid))[0], 0.0, 0.0, tf, tf.label)
    return SolverResult(u_star, coef, history, converged, dist, lam)

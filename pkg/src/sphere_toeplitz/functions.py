"""Smooth test functions on the sphere with analytic first and second derivatives.

Every function is evaluated on unit vectors x (shape (..., 3)) and returns the
value, the tangential gradient (a 3-vector in T_x S^2 for the round metric)
and the round Laplace-Beltrami value.  The chart densities follow from the
conformal factor rho = 4 / (1 + |z|^2)^2:

    |grad u|^2_chart = rho |grad u|^2_round,
    dd^c u / dxdy    = rho * lap_round(u) / (4 pi),

and against omega_0, dd^c u = lap_round(u) * omega_0 and du ^ d^c u has
density |grad u|^2_round.

Radial (zonal about the polar axis) functions additionally carry a profile
g(s) in the height variable s = (1 + x3) / 2 = |z|^2 / (1 + |z|^2).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import legendre as npleg

from .geometry import MobiusMap, lift_array, random_rotation, rotation_from_unitary, su2_from_rotation

__all__ = [
    "TestFunction",
    "constant",
    "harmonic1",
    "dilation",
    "mobius",
    "radial_bump",
    "random_fourier",
    "random_radial",
    "zonal",
    "mobius_pullback_potential",
    "saturating_potential",
    "make_test_function",
    "FAMILIES",
    "random_test_function",
    "standard_battery",
]

Profile = Callable[[np.ndarray], tuple]
Evaluator = Callable[[np.ndarray], tuple]

E3 = np.array([0.0, 0.0, 1.0])


def _zonal_eval(profile: Profile) -> Evaluator:
    def ev(x):
        x = np.asarray(x, dtype=float)
        s = np.clip(0.5 * (1.0 + x[..., 2]), 0.0, 1.0)
        g, g1, g2 = profile(s)
        g = np.broadcast_to(g, s.shape).astype(float)
        g1 = np.broadcast_to(g1, s.shape)
        g2 = np.broadcast_to(g2, s.shape)
        # d/dx3 = (1/2) d/ds; tangent part of e3 is e3 - x3 x
        tang = E3 - x[..., 2:3] * x
        grad = (0.5 * g1)[..., None] * tang
        lap = (1.0 - 2.0 * s) * g1 + s * (1.0 - s) * g2
        return g, grad, lap

    return ev


def _profile_map(p, fn):
    if p is None:
        return None

    def prof(s):
        return fn(p(s))

    return prof


def _flip(p):
    def prof(s):
        g, g1, g2 = p(1.0 - s)
        return g, -g1, g2

    return prof


def _as_rotation(R):
    """Return (3x3 rotation, 2x2 unitary lift) from either representation."""
    R = np.asarray(R)
    if R.shape == (2, 2):
        return rotation_from_unitary(R), R.astype(complex)
    R = R.astype(float)
    return R, su2_from_rotation(R)


@dataclass(frozen=True, eq=False)
class TestFunction:
    """A smooth real function u on S^2.

    ``evaluator(x)`` returns ``(value, tangent_gradient, laplacian)``.
    When ``profile`` is set, u(x) = g(s(R x)) with ``profile(s) = (g, g', g'')``
    and R the rotation of the unitary ``frame`` (identity when ``frame`` is None).
    Frame-free profiled functions are radial: invariant about the polar axis.
    """

    __test__ = False  # keep pytest from collecting this class

    label: str
    evaluator: Evaluator = field(repr=False)
    profile: Optional[Profile] = field(default=None, repr=False)
    frame: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def radial(self) -> bool:
        return self.profile is not None and self.frame is None

    # ambient evaluation
    def at(self, x) -> np.ndarray:
        return self.evaluator(x)[0]

    def evaluate(self, x):
        return self.evaluator(x)

    def grad_sq_round(self, x) -> np.ndarray:
        g = self.evaluator(x)[1]
        return np.sum(g * g, axis=-1)

    def laplacian_round(self, x) -> np.ndarray:
        return self.evaluator(x)[2]

    # chart callbacks
    def value(self, z) -> np.ndarray:
        return self.at(lift_array(z))

    def grad_sq_density(self, z) -> np.ndarray:
        r2 = np.abs(np.asarray(z, dtype=complex)) ** 2
        return 4.0 / (1.0 + r2) ** 2 * self.grad_sq_round(lift_array(z))

    def ddc_density(self, z) -> np.ndarray:
        r2 = np.abs(np.asarray(z, dtype=complex)) ** 2
        return 4.0 / (1.0 + r2) ** 2 * self.laplacian_round(lift_array(z)) / (4.0 * np.pi)

    # arithmetic
    def _same_frame(self, other) -> bool:
        if self.frame is None or other.frame is None:
            return self.frame is None and other.frame is None
        return bool(np.allclose(self.frame, other.frame, atol=1e-15, rtol=0))

    def __add__(self, other):
        if isinstance(other, TestFunction):
            f, h = self.evaluator, other.evaluator

            def ev(x):
                a, b = f(x), h(x)
                return a[0] + b[0], a[1] + b[1], a[2] + b[2]

            prof = None
            if self.profile is not None and other.profile is not None and self._same_frame(other):
                p, q = self.profile, other.profile

                def prof(s):
                    a, b = p(s), q(s)
                    return a[0] + b[0], a[1] + b[1], a[2] + b[2]

            return TestFunction(f"({self.label})+({other.label})", ev, prof, self.frame if prof else None)
        c = float(other)
        f = self.evaluator

        def evc(x):
            a = f(x)
            return a[0] + c, a[1], a[2]

        prof = _profile_map(self.profile, lambda a: (a[0] + c, a[1], a[2]))
        return TestFunction(f"({self.label})+{c:g}", evc, prof, self.frame)

    __radd__ = __add__

    def __mul__(self, a):
        a = float(a)
        f = self.evaluator

        def ev(x):
            v = f(x)
            return a * v[0], a * v[1], a * v[2]

        prof = _profile_map(self.profile, lambda v: (a * v[0], a * v[1], a * v[2]))
        return TestFunction(f"{a:g}*({self.label})", ev, prof, self.frame)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-1.0) * other

    def rotated(self, R, label: Optional[str] = None) -> "TestFunction":
        """The function x -> u(R x); R is a 3x3 rotation or a 2x2 unitary."""
        R, W = _as_rotation(R)
        f = self.evaluator

        def ev(x):
            v, g, lap = f(np.asarray(x) @ R.T)
            return v, g @ R, lap

        prof, frame = None, None
        if self.profile is not None:
            frame = W if self.frame is None else self.frame @ W
            axis = rotation_from_unitary(frame)[2]
            prof = self.profile
            if np.allclose(axis, E3, atol=1e-14):
                frame = None
            elif np.allclose(axis, -E3, atol=1e-14):
                prof, frame = _flip(prof), None
        return TestFunction(label or f"rot({self.label})", ev, prof, frame)

    def compose_mobius(self, F: MobiusMap) -> "TestFunction":
        """The function x -> u(F x); gradient and Laplacian pick up the conformal factor."""
        sigma, U, Vh, _ = F.cartan()
        inner = self.rotated(U)
        lam = float(sigma)
        f = inner.evaluator

        def ev(x):
            x = np.asarray(x, dtype=float)
            den = (1.0 + lam**2) + (lam**2 - 1.0) * x[..., 2]
            y = np.empty_like(x)
            y[..., 0] = 2.0 * lam * x[..., 0] / den
            y[..., 1] = 2.0 * lam * x[..., 1] / den
            y[..., 2] = ((lam**2 - 1.0) + (lam**2 + 1.0) * x[..., 2]) / den
            v, g, lap = f(y)
            # ambient Jacobian of the dilation, applied transposed to g
            d2 = den * den
            jt = np.empty_like(g)
            jt[..., 0] = 2.0 * lam / den * g[..., 0]
            jt[..., 1] = 2.0 * lam / den * g[..., 1]
            jt[..., 2] = (-2.0 * lam * (lam**2 - 1.0) / d2) * (x[..., 0] * g[..., 0] + x[..., 1] * g[..., 1]) + (
                4.0 * lam**2 / d2
            ) * g[..., 2]
            jt = jt - np.sum(jt * x, axis=-1, keepdims=True) * x
            return v, jt, (4.0 * lam**2 / d2) * lap

        dil = TestFunction(self.label, ev)
        return dil.rotated(Vh, label=f"({self.label})o[mobius]")


def zonal(profile: Profile, label: str, axis_rotation=None) -> TestFunction:
    tf = TestFunction(label, _zonal_eval(profile), profile)
    if axis_rotation is not None:
        tf = tf.rotated(axis_rotation, label=label)
    return tf


def constant(c: float = 0.0) -> TestFunction:
    c = float(c)

    def prof(s):
        z = np.zeros_like(s)
        return z + c, z, z

    return zonal(prof, f"const(c={c:g})")


def harmonic1() -> TestFunction:
    """h_1 = x3 = (|z|^2 - 1) / (|z|^2 + 1), a degree-one spherical harmonic."""

    def prof(s):
        z = np.zeros_like(s)
        return 2.0 * s - 1.0, z + 2.0, z

    return zonal(prof, "harmonic1")


def dilation(lam: float) -> TestFunction:
    """u_lam(z) = log(1 + lam^2 |z|^2) - log(1 + |z|^2) = log(1 + (lam^2 - 1) s)."""
    a = float(lam) ** 2 - 1.0

    def prof(s):
        q = 1.0 + a * s
        return np.log(q), a / q, -(a * a) / (q * q)

    return zonal(prof, f"dilation(lambda={float(lam):g})")


def _dilation_profile_sv(sv):
    # log(s1^2 s + s2^2 (1 - s)), the potential of diag(s1, s2)
    p, q = sv[0] ** 2, sv[1] ** 2

    def prof(s):
        w = q + (p - q) * s
        return np.log(w), (p - q) / w, -((p - q) ** 2) / (w * w)

    return prof


def mobius_pullback_potential(F: MobiusMap) -> TestFunction:
    """u_F = log(|az + b|^2 + |cz + d|^2) - log(1 + |z|^2), so omega_0 + dd^c u_F = F^* omega_0."""
    _, _, Vh, sv = F.cartan()
    tf = zonal(_dilation_profile_sv(sv), "mobius").rotated(Vh)
    return TestFunction(f"mobius(a={F.a:.4g},b={F.b:.4g},c={F.c:.4g},d={F.d:.4g})", tf.evaluator, tf.profile, tf.frame)


def mobius(F: MobiusMap) -> TestFunction:
    return mobius_pullback_potential(F)


def saturating_potential(F: MobiusMap, m: int) -> TestFunction:
    """(m + 2) u_F: the potential for (m+2) omega_0 whose curvature is F^*((m+2) omega_0)."""
    u = (m + 2) * mobius_pullback_potential(F)
    return TestFunction(f"saturating(m={m},{u.label})", u.evaluator, u.profile, u.frame)


def radial_bump(amplitude: float = 1.0, center: float = 0.0, width: float = 0.4) -> TestFunction:
    """amplitude * exp(-(x3 - center)^2 / (2 width^2))."""
    A, c, w = float(amplitude), float(center), float(width)

    def prof(s):
        h = 2.0 * s - 1.0 - c
        e = A * np.exp(-h * h / (2 * w * w))
        d1 = -h / (w * w) * e  # d/dx3
        d2 = (h * h / w**4 - 1.0 / (w * w)) * e
        return e, 2.0 * d1, 4.0 * d2

    return zonal(prof, f"radial_bump(amplitude={A:g},center={c:g},width={w:g})")


def random_radial(seed: int = 0, degree: int = 4, amplitude: float = 0.5) -> TestFunction:
    """Sum of Legendre polynomials P_l(x3), l = 1..degree, with random coefficients."""
    rng = np.random.default_rng(seed)
    coef = np.zeros(degree + 1)
    coef[1:] = amplitude * rng.normal(size=degree) / np.sqrt(degree)
    c1 = npleg.legder(coef)
    c2 = npleg.legder(c1)

    def prof(s):
        x3 = 2.0 * s - 1.0
        return npleg.legval(x3, coef), 2.0 * npleg.legval(x3, c1), 4.0 * npleg.legval(x3, c2)

    return zonal(prof, f"random_radial(seed={seed},degree={degree},amplitude={amplitude:g})")


def random_fourier(seed: int = 0, modes: int = 6, scale: float = 1.5, amplitude: float = 1.0) -> TestFunction:
    """sum_j a_j cos(k_j . x + phi_j) restricted to the sphere."""
    rng = np.random.default_rng(seed)
    K = scale * rng.normal(size=(modes, 3))
    a = amplitude * rng.normal(size=modes) / np.sqrt(modes)
    phi = rng.uniform(0.0, 2 * np.pi, size=modes)
    k2 = np.sum(K * K, axis=1)

    def ev(x):
        x = np.asarray(x, dtype=float)
        arg = x @ K.T + phi
        c, s = np.cos(arg), np.sin(arg)
        val = c @ a
        G = -(s * a) @ K  # ambient gradient
        Gx = np.sum(G * x, axis=-1)
        grad = G - Gx[..., None] * x
        kx = x @ K.T
        # tr H - x^T H x with H = -sum a cos k k^T
        lap = -(c * a) @ k2 + (c * a * kx * kx).sum(axis=-1) - 2.0 * Gx
        return val, grad, lap

    return TestFunction(f"random_fourier(seed={seed},modes={modes})", ev, None)


FAMILIES = {
    "const": lambda c=0.0: constant(c),
    "harmonic1": lambda: harmonic1(),
    "dilation": lambda **kw: dilation(kw.get("lambda", kw.get("lam", 2.0))),
    "mobius": lambda lam=2.0, seed=None: mobius(
        MobiusMap.dilation(lam) if seed is None else MobiusMap.random(np.random.default_rng(int(seed)))
    ),
    "radial_bump": lambda amplitude=1.0, center=0.0, width=0.4: radial_bump(amplitude, center, width),
    "random_fourier": lambda seed=0, modes=6: random_fourier(int(seed), int(modes)),
    "random_radial": lambda seed=0, degree=4, amplitude=0.5: random_radial(int(seed), int(degree), amplitude),
}


def make_test_function(family: str, **params) -> TestFunction:
    """Build a family member from its name and keyword parameters (e.g. ``dilation``, lambda=2)."""
    key = family.lower().replace("-", "_")
    if key not in FAMILIES:
        raise ValueError(f"unknown test-function family {family!r}; known: {sorted(FAMILIES)}")
    return FAMILIES[key](**params)


def random_rotated(u: TestFunction, seed: int) -> TestFunction:
    return u.rotated(random_rotation(np.random.default_rng(seed)))


def random_test_function(rng: np.random.Generator) -> TestFunction:
    """A random member of one of the built-in families, with moderate parameters."""
    kind = int(rng.integers(6))
    if kind == 0:
        return constant(rng.normal(scale=2.0))
    if kind == 1:
        return rng.normal() * harmonic1()
    if kind == 2:
        return dilation(float(np.exp(rng.normal(scale=0.8))))
    if kind == 3:
        return mobius(MobiusMap.random(rng, spread=0.8)) * float(rng.uniform(0.5, 3.0))
    if kind == 4:
        return radial_bump(rng.normal(), rng.uniform(-0.8, 0.8), rng.uniform(0.2, 0.8)).rotated(random_rotation(rng))
    return random_fourier(int(rng.integers(2**31)), int(rng.integers(2, 9)), amplitude=float(rng.uniform(0.3, 1.5)))


def standard_battery(seed: int = 0, n_random: int = 50) -> list:
    """One representative per named family followed by ``n_random`` random functions."""
    rng = np.random.default_rng(seed)
    named = [
        constant(1.7),
        harmonic1(),
        dilation(2.0),
        mobius(MobiusMap.random(rng, spread=0.8)),
        radial_bump(1.0, 0.3, 0.4),
        random_fourier(1),
        random_radial(2),
    ]
    return named + [random_test_function(rng) for _ in range(n_random)]

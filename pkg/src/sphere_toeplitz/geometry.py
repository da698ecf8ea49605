"""Points on the unit sphere, the stereographic chart and Möbius maps.

The chart is stereographic projection from the north pole, so the south
pole (0, 0, -1) sits at z = 0 and the north pole at infinity.  Array
helpers work on trailing-axis 3-vectors and complex arrays; the small
dataclasses are for single points.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpherePoint",
    "StereoCoord",
    "MobiusMap",
    "stereo_project",
    "stereo_lift",
    "project_array",
    "lift_array",
    "lift_from_s_theta",
    "fubini_study_weight",
    "omega0_density",
    "chordal_sq",
    "hopf",
    "hopf_section",
    "rotation_from_unitary",
    "random_rotation",
    "su2_from_rotation",
]


@dataclass(frozen=True)
class SpherePoint:
    x: float
    y: float
    z: float

    def __post_init__(self):
        r2 = self.x * self.x + self.y * self.y + self.z * self.z
        if abs(r2 - 1.0) > 1e-12:
            raise ValueError(f"point not on the unit sphere (|p|^2 = {r2!r})")

    @classmethod
    def from_vector(cls, v) -> "SpherePoint":
        v = np.asarray(v, dtype=float)
        v = v / np.linalg.norm(v)
        return cls(float(v[0]), float(v[1]), float(v[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class StereoCoord:
    value: complex = 0j
    at_infinity: bool = False

    @classmethod
    def infinity(cls) -> "StereoCoord":
        return cls(0j, True)


def lift_array(z) -> np.ndarray:
    """Inverse stereographic projection of a complex array; returns (..., 3)."""
    z = np.asarray(z, dtype=complex)
    r2 = (z * z.conj()).real
    out = np.empty(z.shape + (3,))
    inf = ~np.isfinite(z)
    d = 1.0 + np.where(inf, 0.0, r2)
    out[..., 0] = np.where(inf, 0.0, 2.0 * z.real / d)
    out[..., 1] = np.where(inf, 0.0, 2.0 * z.imag / d)
    out[..., 2] = np.where(inf, 1.0, (r2 - 1.0) / d)
    return out


def project_array(x) -> np.ndarray:
    """Stereographic projection of (..., 3) unit vectors; the north pole maps to inf."""
    x = np.asarray(x, dtype=float)
    den = 1.0 - x[..., 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (x[..., 0] + 1j * x[..., 1]) / den
    return np.where(den <= 0.0, complex(np.inf, 0.0), z)


def lift_from_s_theta(s, theta) -> np.ndarray:
    """Sphere point at height x3 = 2s - 1 and longitude theta."""
    s = np.asarray(s, dtype=float)
    theta = np.asarray(theta, dtype=float)
    rho = 2.0 * np.sqrt(np.clip(s * (1.0 - s), 0.0, None))
    return np.stack(np.broadcast_arrays(rho * np.cos(theta), rho * np.sin(theta), 2.0 * s - 1.0), axis=-1)


def stereo_project(p: SpherePoint) -> StereoCoord:
    if p.z >= 1.0:
        return StereoCoord.infinity()
    return StereoCoord(complex(p.x, p.y) / (1.0 - p.z), False)


def stereo_lift(c: StereoCoord) -> SpherePoint:
    if c.at_infinity:
        return SpherePoint(0.0, 0.0, 1.0)
    v = lift_array(np.asarray(c.value))
    return SpherePoint(float(v[0]), float(v[1]), float(v[2]))


def fubini_study_weight(z):
    """psi_0(z) = log(1 + |z|^2); accepts a StereoCoord or a complex array."""
    if isinstance(z, StereoCoord):
        if z.at_infinity:
            raise ValueError("weight undefined in this chart")
        return float(np.log1p(abs(z.value) ** 2))
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise ValueError("weight undefined in this chart")
    return np.log1p((z * z.conj()).real)


def omega0_density(z):
    """Density of omega_0 = dd^c psi_0 against Lebesgue measure in the chart."""
    r2 = np.abs(np.asarray(z, dtype=complex)) ** 2
    return 1.0 / (np.pi * (1.0 + r2) ** 2)


def chordal_sq(z, w):
    """Squared Euclidean distance in R^3 between the lifts of chart points z and w.

    On the unit sphere this is 4 |z - w|^2 exp(-psi_0(z) - psi_0(w)).
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return 4.0 * np.abs(z - w) ** 2 / ((1.0 + np.abs(z) ** 2) * (1.0 + np.abs(w) ** 2))


def hopf_section(x) -> np.ndarray:
    """A unit vector Z in C^2 with hopf(Z) = x, shape (..., 2)."""
    x = np.asarray(x, dtype=float)
    s = np.clip(0.5 * (1.0 + x[..., 2]), 0.0, 1.0)
    theta = np.arctan2(x[..., 1], x[..., 0])
    return np.stack([np.sqrt(s) * np.exp(1j * theta), np.sqrt(1.0 - s) + 0j], axis=-1)


def hopf(Z) -> np.ndarray:
    """Hopf map C^2 \\ 0 -> S^2 matching z = Z0 / Z1 under the chart."""
    Z = np.asarray(Z, dtype=complex)
    a, b = Z[..., 0], Z[..., 1]
    n = (a * a.conj()).real + (b * b.conj()).real
    w = 2.0 * a * b.conj() / n
    return np.stack([w.real, w.imag, ((a * a.conj()).real - (b * b.conj()).real) / n], axis=-1)


def rotation_from_unitary(W) -> np.ndarray:
    """The SO(3) matrix induced on the sphere by a unitary 2x2 matrix."""
    W = np.asarray(W, dtype=complex)
    cols = [hopf(W @ hopf_section(e)) for e in np.eye(3)]
    return np.stack(cols, axis=1)


def su2_from_rotation(R) -> np.ndarray:
    """A unitary 2x2 matrix W with rotation_from_unitary(W) = R (defined up to sign)."""
    from scipy.spatial.transform import Rotation

    x, y, z, w = Rotation.from_matrix(np.asarray(R, dtype=float)).as_quat()
    return np.array([[w + 1j * z, -y + 1j * x], [y + 1j * x, w - 1j * z]])


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    W = np.array([[q[0] + 1j * q[1], q[2] + 1j * q[3]], [-q[2] + 1j * q[3], q[0] - 1j * q[1]]])
    return rotation_from_unitary(W)


@dataclass(frozen=True)
class MobiusMap:
    """z -> (a z + b) / (c z + d) with ad - bc = 1.

    The SU(2) case (c = -conj(b), d = conj(a)) consists of rotations.
    """

    a: complex = 1.0
    b: complex = 0.0
    c: complex = 0.0
    d: complex = 1.0

    def __post_init__(self):
        det = complex(self.a) * complex(self.d) - complex(self.b) * complex(self.c)
        if abs(det) < 1e-300:
            raise ValueError("degenerate Mobius map")
        r = np.sqrt(det)
        for name in "abcd":
            object.__setattr__(self, name, complex(getattr(self, name)) / r)

    @classmethod
    def su2(cls, a: complex, b: complex) -> "MobiusMap":
        n = np.sqrt(abs(a) ** 2 + abs(b) ** 2)
        a, b = a / n, b / n
        return cls(a, b, -np.conj(b), np.conj(a))

    @classmethod
    def dilation(cls, lam: float) -> "MobiusMap":
        r = np.sqrt(lam)
        return cls(r, 0.0, 0.0, 1.0 / r)

    @classmethod
    def from_matrix(cls, F) -> "MobiusMap":
        F = np.asarray(F, dtype=complex)
        return cls(F[0, 0], F[0, 1], F[1, 0], F[1, 1])

    @classmethod
    def random(cls, rng: np.random.Generator, spread: float = 0.5) -> "MobiusMap":
        """Random map K1 * diag(sqrt(lam), 1/sqrt(lam)) * K2 with log(lam) ~ N(0, spread)."""
        def unit(rng):
            q = rng.normal(size=4)
            q /= np.linalg.norm(q)
            return np.array([[q[0] + 1j * q[1], q[2] + 1j * q[3]], [-q[2] + 1j * q[3], q[0] - 1j * q[1]]])

        lam = np.exp(spread * rng.normal())
        A = np.diag([np.sqrt(lam), 1.0 / np.sqrt(lam)])
        return cls.from_matrix(unit(rng) @ A @ unit(rng))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def is_unitary(self) -> bool:
        F = self.matrix
        return bool(np.allclose(F @ F.conj().T, np.eye(2), atol=1e-12))

    def __matmul__(self, other: "MobiusMap") -> "MobiusMap":
        return MobiusMap.from_matrix(self.matrix @ other.matrix)

    def inverse(self) -> "MobiusMap":
        return MobiusMap(self.d, -self.b, -self.c, self.a)

    def __call__(self, z):
        """Act on chart points (complex array, inf allowed)."""
        z = np.asarray(z, dtype=complex)
        inf = ~np.isfinite(z)
        zz = np.where(inf, 0.0, z)
        num = np.where(inf, self.a, self.a * zz + self.b)
        den = np.where(inf, self.c, self.c * zz + self.d)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = num / den
        return np.where(den == 0, complex(np.inf, 0.0), out)

    def act(self, x) -> np.ndarray:
        """Act on sphere points (..., 3)."""
        Z = hopf_section(x)
        return hopf(Z @ self.matrix.T)

    def cartan(self):
        """(sigma, U, Vh, sv) with matrix = U diag(sv) Vh, so the map is
        rotation(U) o dilation(sigma) o rotation(Vh) with sigma = sv[0] / sv[1] >= 1."""
        U, sv, Vh = np.linalg.svd(self.matrix)
        return sv[0] / sv[1], U, Vh, sv

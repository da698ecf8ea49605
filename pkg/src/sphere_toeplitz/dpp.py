"""The spherical ensemble: the N-point determinantal process on S^2 with
density proportional to prod_{i<j} |x_i - x_j|^2 against omega_0^N.

Two exact samplers are provided: generalized eigenvalues of a pair of
complex Ginibre matrices, and sequential sampling of the projection kernel
onto degree N - 1 polynomials.  Every sample draws from its own Philox
stream keyed by (seed, sample_index), so batches are reproducible no matter
how they are split across threads.
"""
from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from .energy import dirichlet_energy, mean_value
from .functions import TestFunction
from .geometry import SpherePoint, lift_array, project_array
from .quadrature import build_quadrature
from .toeplitz import basis_at

__all__ = [
    "PointConfiguration",
    "McEstimate",
    "LinearStatistic",
    "ChernoffResult",
    "rng_for",
    "sample_random_matrix",
    "sample_kernel_projection",
    "sample_batch",
    "density_log_unnormalized",
    "density_log_chart",
    "partition_constant",
    "partition_constant_ambient",
    "mc_linear_statistic",
    "chernoff_bound",
    "chernoff_experiment",
    "nearest_neighbor_distances",
    "samples_to_csv",
    "summary_to_json",
]

log = logging.getLogger(__name__)

SAMPLERS = ("random-matrix", "kernel-projection")
COND_MAX = 1e12
MAX_REJECTIONS = 10**6


def rng_for(seed: int, index: int, attempt: int = 0) -> np.random.Generator:
    """Counter-based stream for one sample; ``attempt`` > 0 only on resampling."""
    key = [int(seed) & 0xFFFFFFFFFFFFFFFF, int(index)] + ([int(attempt)] if attempt else [])
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


@dataclass(frozen=True, eq=False)
class PointConfiguration:
    points: np.ndarray
    seed: int
    sampler: str

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        if np.any(np.abs(np.sum(p * p, axis=-1) - 1.0) > 1e-10):
            raise ValueError("configuration points must lie on the unit sphere")
        object.__setattr__(self, "points", p)

    @property
    def N(self) -> int:
        return self.points.shape[0]

    def sphere_points(self) -> list:
        return [SpherePoint.from_vector(v) for v in self.points]

    def chart(self) -> np.ndarray:
        return project_array(self.points)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_samples: int

    @classmethod
    def from_samples(cls, values) -> "McEstimate":
        v = np.asarray(values, dtype=float)
        n = v.size
        sd = float(np.std(v, ddof=1)) if n > 1 else 0.0
        return cls(float(np.mean(v)), sd / np.sqrt(n), int(n))

    def z_score(self, reference: float) -> float:
        if self.std_error == 0:
            return 0.0 if self.mean == reference else float("inf")
        return (self.mean - reference) / self.std_error


# random-matrix sampler

def _ginibre_eigs(N: int, rng: np.random.Generator):
    G = rng.standard_normal((2, N, N, 2)) @ np.array([1.0, 1j]) / np.sqrt(2.0)
    return G[0], G[1]


def _rm_one(N: int, seed: int, index: int) -> np.ndarray:
    attempt = 0
    while True:
        G1, G2 = _ginibre_eigs(N, rng_for(seed, index, attempt))
        if np.linalg.cond(G2) < COND_MAX:
            break
        attempt += 1
        log.warning("near-singular G2 at seed=%d index=%d; resampling (attempt %d)", seed, index, attempt)
    z = np.linalg.eigvals(np.linalg.solve(G2, G1))
    return lift_array(np.sort_complex(z))


def sample_random_matrix(N: int, seed: int, index: int = 0) -> PointConfiguration:
    """Stereographic lifts of the roots of det(G1 - z G2) for independent complex Ginibre G1, G2."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return PointConfiguration(_rm_one(N, seed, index), int(seed), "random-matrix")


# kernel-projection sampler

def _uniform_points(rng: np.random.Generator, n: int) -> np.ndarray:
    s = rng.random(n)
    th = 2.0 * np.pi * rng.random(n)
    r = 2.0 * np.sqrt(s * (1.0 - s))
    return np.stack([r * np.cos(th), r * np.sin(th), 2.0 * s - 1.0], axis=-1)


def _kp_one(N: int, seed: int, index: int, batch: int = 32) -> np.ndarray:
    rng = rng_for(seed, index)
    m = N - 1
    Q = np.zeros((N, 0), dtype=complex)  # orthonormal basis of the span of chosen features
    pts = []
    tries = 0
    while len(pts) < N:
        x = _uniform_points(rng, batch)
        acc = rng.random(batch)
        phi = basis_at(m, x)  # rows, |phi|^2 = N
        r = phi - (phi @ Q.conj()) @ Q.T
        p = np.sum(np.abs(r) ** 2, axis=1) / N
        hit = np.flatnonzero(acc < p)
        tries += batch
        if hit.size == 0:
            if tries > MAX_REJECTIONS:
                raise RuntimeError(f"rejection sampler exceeded {MAX_REJECTIONS} proposals at point {len(pts)} of {N}")
            continue
        j = hit[0]
        v = r[j] / np.linalg.norm(r[j])
        Q = np.column_stack([Q, v])
        pts.append(x[j])
        tries = 0
    return np.array(pts)


def sample_kernel_projection(N: int, seed: int, index: int = 0) -> PointConfiguration:
    """Sequential projection-DPP sampling with uniform proposals and acceptance |P phi(x)|^2 / N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return PointConfiguration(_kp_one(N, seed, index), int(seed), "kernel-projection")


def sample_batch(N: int, n_samples: int, seed: int, sampler: str = "random-matrix", threads: int = 1) -> np.ndarray:
    """Array (n_samples, N, 3) of independent configurations; identical for any ``threads``."""
    if sampler not in SAMPLERS:
        raise ValueError(f"unknown sampler {sampler!r}; choose from {SAMPLERS}")
    if sampler == "kernel-projection":
        one = lambda i: _kp_one(N, seed, i)  # noqa: E731
        chunk = lambda lo, hi: np.stack([one(i) for i in range(lo, hi)])  # noqa: E731
    else:
        def chunk(lo, hi):
            G = np.stack([_ginibre_eigs(N, rng_for(seed, i)) for i in range(lo, hi)])
            G1, G2 = G[:, 0], G[:, 1]
            bad = np.flatnonzero(np.linalg.cond(G2) >= COND_MAX)
            z = np.linalg.eigvals(np.linalg.solve(G2, G1))
            out = lift_array(np.sort_complex(z))
            for b in bad:
                out[b] = _rm_one(N, seed, lo + int(b))
            return out

    size = 4096
    bounds = [(lo, min(lo + size, n_samples)) for lo in range(0, n_samples, size)]
    if threads == 1 or len(bounds) == 1:
        parts = [chunk(lo, hi) for lo, hi in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads if threads > 0 else None) as ex:
            parts = list(ex.map(lambda b: chunk(*b), bounds))
    return np.concatenate(parts) if parts else np.zeros((0, N, 3))


# densities and partition function

def density_log_unnormalized(points) -> float:
    """sum_{i<j} log |x_i - x_j|^2; returns -inf (the coincidence sentinel) for repeated points."""
    p = np.asarray(points.points if isinstance(points, PointConfiguration) else points, dtype=float)
    iu = np.triu_indices(p.shape[0], 1)
    d2 = np.sum((p[:, None, :] - p[None, :, :]) ** 2, axis=-1)[iu]
    if np.any(d2 <= 1e-28):
        return float("-inf")
    return float(np.sum(np.log(d2)))


def density_log_chart(z) -> float:
    """Chart form sum_{i<j} log |z_i - z_j|^2 - (N - 1) sum_i psi_0(z_i) (finite points only).

    It differs from the ambient form by the constant C(N, 2) log 4.
    """
    z = np.asarray(z, dtype=complex)
    N = z.size
    iu = np.triu_indices(N, 1)
    d = np.abs(z[:, None] - z[None, :])[iu]
    if np.any(d == 0):
        return float("-inf")
    return float(np.sum(np.log(d**2)) - (N - 1) * np.sum(np.log1p(np.abs(z) ** 2)))


def partition_constant(N: int) -> float:
    """log Z_N for the chart-form density: 1/Z_N = N^N prod_k C(N-1, k) / N!."""
    if N < 1:
        raise ValueError("N must be >= 1")
    k = np.arange(N)
    log_binom = gammaln(N) - gammaln(k + 1.0) - gammaln(N - k)
    return float(-(N * np.log(N) + np.sum(log_binom) - gammaln(N + 1.0)))


def partition_constant_ambient(N: int) -> float:
    """log of int prod_{i<j} |x_i - x_j|^2 omega_0^N (Euclidean distances in R^3)."""
    return partition_constant(N) + N * (N - 1) / 2 * np.log(4.0)


# Monte Carlo

class LinearStatistic(NamedTuple):
    mean: McEstimate
    variance: McEstimate
    mgf: McEstimate | None


def _stat_values(u: TestFunction, samples: np.ndarray) -> np.ndarray:
    return np.sum(u.at(samples), axis=-1)


def mc_linear_statistic(
    u: TestFunction, N: int, n_samples: int, seed: int, t: float | None = None, sampler: str = "random-matrix", threads: int = 1
) -> LinearStatistic:
    """Estimates of E sum u(x_i), Var sum u(x_i) and E exp(-t sum (u(x_i) - int u omega_0))."""
    if n_samples < 100:
        raise ValueError("n_samples must be >= 100")
    S = _stat_values(u, sample_batch(N, n_samples, seed, sampler, threads))
    mean = McEstimate.from_samples(S)
    var = McEstimate.from_samples((S - mean.mean) ** 2 * n_samples / (n_samples - 1))
    mgf = None
    if t is not None:
        mu = mean_value(u, build_quadrature(16))
        mgf = McEstimate.from_samples(np.exp(-t * (S - N * mu)))
    return LinearStatistic(mean, var, mgf)


class ChernoffResult(NamedTuple):
    empirical_tail: float
    bound: float
    std_error: float
    n_samples: int


def chernoff_bound(N: int, lam: float, D: float) -> float:
    return float(np.exp(-(N**2) * lam**2 * (N + 1) / (2.0 * N * D)))


def chernoff_experiment(u: TestFunction, N: int, lam: float, n_samples: int, seed: int, sampler: str = "random-matrix", threads: int = 1):
    """Empirical P((1/N) sum u(x_i) > lam) against exp(-N^2 lam^2 (N+1) / (2 N D(u)))."""
    rule = build_quadrature(16)
    if abs(mean_value(u, rule)) > 1e-9:
        raise ValueError("center u first")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    S = _stat_values(u, sample_batch(N, n_samples, seed, sampler, threads)) / N
    p = float(np.mean(S > lam))
    se = float(np.sqrt(max(p * (1 - p), 0.0) / n_samples))
    return ChernoffResult(p, chernoff_bound(N, lam, dirichlet_energy(u, rule)), se, int(n_samples))


def nearest_neighbor_distances(samples: np.ndarray) -> np.ndarray:
    """Chordal distance from every point to its nearest neighbour, pooled over samples."""
    d = np.linalg.norm(samples[:, :, None, :] - samples[:, None, :, :], axis=-1)
    idx = np.arange(samples.shape[1])
    d[:, idx, idx] = np.inf
    return d.min(axis=-1).ravel()


def samples_to_csv(samples: np.ndarray, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["sample_id", "point_id", "x", "y", "z"])
        for i, conf in enumerate(samples):
            for j, p in enumerate(conf):
                wr.writerow([i, j, repr(float(p[0])), repr(float(p[1])), repr(float(p[2]))])


def summary_to_json(path, N, n_samples, seed, estimates: dict, exact_reference: dict) -> dict:
    """Experiment summary {N, n_samples, seed, estimates, exact_reference, z_scores}."""
    z = {k: estimates[k].z_score(exact_reference[k]) for k in estimates if k in exact_reference}
    out = {
        "N": N,
        "n_samples": n_samples,
        "seed": seed,
        "estimates": {k: asdict(v) for k, v in estimates.items()},
        "exact_reference": exact_reference,
        "z_scores": z,
    }
    if path is not None:
        with open(path, "w") as fh:
            json.dump(out, fh, indent=2)
    return out

"""Sharp inequalities for L_m and their equality cases, with slack bookkeeping.

Every checker returns a SlackReport with slack = rhs - lhs; an inequality
holds when slack >= -tolerance and is saturated when |slack| <= equality_tol.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass

import numpy as np

from .energy import dirichlet_energy, mean_value
from .functions import TestFunction, constant, dilation
from .quadrature import QuadratureRule, build_quadrature, integrate_ambient
from .toeplitz import logdet_L

__all__ = [
    "SlackReport",
    "TOL",
    "EQ_TOL",
    "make_report",
    "check_moser",
    "check_onofri",
    "det_laplacian_log_ratio",
    "check_det_bound",
    "fluctuation_mgf",
    "check_mgf_bound",
    "mgf_admissible",
    "CltRow",
    "clt_probe",
    "sharpness_fit",
    "AsymptoticRow",
    "asymptotic_energy_probe",
    "reports_to_csv",
    "aggregate",
]

TOL = 1e-8
EQ_TOL = 1e-6


@dataclass(frozen=True)
class SlackReport:
    name: str
    m: int
    u_label: str
    lhs: float
    rhs: float
    slack: float
    tolerance: float
    verdict: str
    equality_tol: float = EQ_TOL

    @property
    def ok(self) -> bool:
        return self.verdict != "fail"


def make_report(name, m, u_label, lhs, rhs, tol=TOL, eq_tol=EQ_TOL) -> SlackReport:
    slack = float(rhs) - float(lhs)
    if slack < -tol:
        verdict = "fail"
    elif abs(slack) <= eq_tol:
        verdict = "equality"
    else:
        verdict = "pass"
    return SlackReport(name, int(m), u_label, float(lhs), float(rhs), slack, tol, verdict, eq_tol)


def _rule_for(rule: QuadratureRule, m: int) -> QuadratureRule:
    return rule if rule.level >= m else build_quadrature(m)


def check_moser(m: int, u: TestFunction, rule: QuadratureRule, tol=TOL, eq_tol=EQ_TOL) -> SlackReport:
    """-L_m(u) <= -(m+1) int u omega_0 + ((m+1)/(m+2)) D(u)/2."""
    L = logdet_L(m, u, rule)
    D, mu = dirichlet_energy(u, rule), mean_value(u, rule)
    rhs = -(m + 1) * mu + (m + 1) / (m + 2) * 0.5 * D
    return make_report("moser", m, u.label, -L, rhs, tol, eq_tol)


def check_onofri(u: TestFunction, rule: QuadratureRule, tol=TOL, eq_tol=EQ_TOL) -> SlackReport:
    """log int e^{-u} omega_0 <= -int u omega_0 + D(u)/4."""
    lhs = np.log(integrate_ambient(lambda x: np.exp(-u.at(x)), rule))
    rhs = -mean_value(u, rule) + 0.25 * dirichlet_energy(u, rule)
    return make_report("onofri", 0, u.label, lhs, rhs, tol, eq_tol)


def det_laplacian_log_ratio(m: int, u: TestFunction, rule: QuadratureRule) -> float:
    """Anomaly-formula value of log(det Lap_u / det Lap_0) on degree-m sections."""
    return -0.5 * dirichlet_energy(u, rule) + (m + 1) * mean_value(u, rule) - logdet_L(m, u, rule)


def check_det_bound(m: int, u: TestFunction, rule: QuadratureRule, tol=TOL, eq_tol=EQ_TOL) -> SlackReport:
    """log-det ratio <= -D(u) / (2 (m + 2)); the slack equals the Moser slack."""
    lhs = det_laplacian_log_ratio(m, u, rule)
    rhs = -dirichlet_energy(u, rule) / (2.0 * (m + 2))
    return make_report("det_bound", m, u.label, lhs, rhs, tol, eq_tol)


def fluctuation_mgf(N: int, t: float, u: TestFunction, rule: QuadratureRule) -> float:
    """G_N(t, u) = log E exp(-t sum_i (u(x_i) - int u omega_0)) = -L_{N-1}(t u) + t N int u omega_0."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if t == 0:
        return 0.0
    return -logdet_L(N - 1, t * u, rule) + t * N * mean_value(u, rule)


def mgf_admissible(N: int, t: float, u: TestFunction, rule: QuadratureRule) -> bool:
    """Whether omega_0 + dd^c(t u / (N + 1)) > 0 at every node (the range where equality can occur)."""
    return bool(np.all(1.0 + t * u.laplacian_round(rule.x) / (N + 1) > 0))


def check_mgf_bound(N: int, t: float, u: TestFunction, rule: QuadratureRule, tol=TOL, eq_tol=EQ_TOL) -> SlackReport:
    """G_N(t, u) <= (N / (N + 1)) (t^2 / 2) D(u)."""
    lhs = fluctuation_mgf(N, t, u, rule)
    rhs = N / (N + 1.0) * 0.5 * t * t * dirichlet_energy(u, rule)
    return make_report(f"mgf(t={t:g})", N, u.label, lhs, rhs, tol, eq_tol)


@dataclass(frozen=True)
class CltRow:
    N: int
    G: float
    target: float
    ratio: float
    lower: float
    in_bracket: bool


def clt_probe(u: TestFunction, rule: QuadratureRule, N_list, t: float = 1.0) -> list:
    """G_N(t, u) against its large-N limit (t^2 / 2) D(u)."""
    target = 0.5 * t * t * dirichlet_energy(u, rule)
    rows = []
    for N in N_list:
        G = fluctuation_mgf(N, t, u, _rule_for(rule, N - 1))
        ratio = G / target if target > 0 else float("nan")
        lower = N / (N + 1.0)
        rows.append(CltRow(int(N), G, target, ratio, lower, bool(lower <= ratio <= 1.0)))
    return rows


def sharpness_fit(m: int, rule: QuadratureRule, lambdas=None, consts=(-2.0, -1.0, 0.0, 1.0, 2.0)):
    """Recover the optimal constants (A, B) in -L_m(u) <= -A int u omega_0 + B D(u).

    A is the least-squares slope of c -> L_m(c).  B_min is the sup of
    (-L_m(u) + A int u omega_0) / D(u) over the saturating potentials
    (m + 2) u_lambda, centered to mean zero.  Returns (A, B_min, best_lambda).
    """
    rule = _rule_for(rule, m)
    c = np.asarray(consts, dtype=float)
    Lc = np.array([logdet_L(m, constant(ci), rule) for ci in c])
    A = float(np.polyfit(c, Lc, 1)[0])
    if lambdas is None:
        lambdas = np.exp(np.linspace(-2.0, 2.0, 41))
    best, best_lam = -np.inf, None
    for lam in lambdas:
        u = (m + 2) * dilation(lam)
        u = u - mean_value(u, rule)
        D = dirichlet_energy(u, rule)
        if D < 1e-12:
            continue
        val = (-logdet_L(m, u, rule) + A * mean_value(u, rule)) / D
        if val > best:
            best, best_lam = val, float(lam)
    return A, float(best), best_lam


@dataclass(frozen=True)
class AsymptoticRow:
    k: int
    normL: float
    kE: float
    gap: float


def asymptotic_energy_probe(u: TestFunction, k_list, rule: QuadratureRule) -> list:
    """normL = L_{k-2}(k u) / (k - 1) against k (-D(u)/2 + int u omega_0)."""
    D, mu = dirichlet_energy(u, rule), mean_value(u, rule)
    rows = []
    for k in k_list:
        if k < 3:
            raise ValueError("k must be >= 3")
        m = k - 2
        normL = logdet_L(m, k * u, _rule_for(rule, m)) / (k - 1)
        kE = k * (-0.5 * D + mu)
        rows.append(AsymptoticRow(int(k), normL, kE, normL - kE))
    return rows


CSV_FIELDS = ["name", "m", "u_label", "lhs", "rhs", "slack", "verdict"]


def reports_to_csv(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(CSV_FIELDS)
        for r in reports:
            wr.writerow([r.name, r.m, r.u_label, repr(r.lhs), repr(r.rhs), repr(r.slack), r.verdict])


def aggregate(suite: str, reports) -> dict:
    reports = list(reports)
    fails = [r for r in reports if r.verdict == "fail"]
    return {
        "suite": suite,
        "passes": len(reports) - len(fails),
        "failures": len(fails),
        "worst_slack": min((r.slack for r in reports), default=None),
        "rows": [asdict(r) for r in reports],
    }


def aggregate_json(suite: str, reports, path) -> None:
    with open(path, "w") as fh:
        json.dump(aggregate(suite, reports), fh, indent=2)

import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sphere_toeplitz.energy import dirichlet_energy
from sphere_toeplitz.functions import constant, dilation, harmonic1, random_fourier, random_test_function, saturating_potential
from sphere_toeplitz.geometry import MobiusMap
from sphere_toeplitz.inequalities import (
    aggregate,
    aggregate_json,
    asymptotic_energy_probe,
    check_det_bound,
    check_mgf_bound,
    check_moser,
    check_onofri,
    clt_probe,
    fluctuation_mgf,
    make_report,
    mgf_admissible,
    reports_to_csv,
    sharpness_fit,
)


def test_verdicts():
    assert make_report("x", 0, "u", 1.0, 1.0).verdict == "equality"
    assert make_report("x", 0, "u", 1.0, 2.0).verdict == "pass"
    assert make_report("x", 0, "u", 2.0, 1.0).verdict == "fail"
    assert not make_report("x", 0, "u", 2.0, 1.0).ok


@pytest.mark.parametrize("m", [0, 1, 3, 6])
def test_moser_equality_on_saturating(m, rule):
    F = MobiusMap.random(np.random.default_rng(m))
    rep = check_moser(m, saturating_potential(F, m), rule)
    assert rep.verdict == "equality", rep


@pytest.mark.parametrize("m", [0, 2, 5])
def test_moser_strict_off_family(m, rule):
    rep = check_moser(m, random_fourier(3), rule)
    assert rep.verdict == "pass" and rep.slack > 1e-4


@given(st.integers(0, 2**31), st.integers(0, 6))
def test_moser_holds_randomly(seed, m):
    from sphere_toeplitz.quadrature import build_quadrature

    rule = build_quadrature(16)
    u = random_test_function(np.random.default_rng(seed))
    assert check_moser(m, u, rule).slack >= -1e-8


def test_det_bound_matches_moser(rule):
    u = random_fourier(5)
    for m in (0, 3):
        assert check_det_bound(m, u, rule).slack == pytest.approx(check_moser(m, u, rule).slack, abs=1e-10)


def test_onofri(rule):
    assert check_onofri(2 * dilation(1.7), rule).verdict == "equality"
    assert check_onofri(random_fourier(1), rule).slack > 0


def test_mgf_bound_and_admissibility(rule):
    u = harmonic1()
    assert fluctuation_mgf(4, 0.0, u, rule) == 0.0
    with pytest.raises(ValueError):
        fluctuation_mgf(0, 1.0, u, rule)
    for t in (-2.0, 0.5, 3.0):
        assert check_mgf_bound(4, t, u, rule).ok
    assert mgf_admissible(4, 1.0, u, rule)
    assert not mgf_admissible(1, 100.0, u, rule)


def test_mgf_convex_in_t(rule):
    u = random_fourier(2)
    ts = np.linspace(-2, 2, 9)
    G = np.array([fluctuation_mgf(3, t, u, rule) for t in ts])
    assert np.all(np.diff(G, 2) >= -1e-10)


def test_clt_probe_monotone(rule):
    rows = clt_probe(harmonic1(), rule, [1, 2, 4, 8])
    ratios = [r.ratio for r in rows]
    assert all(0 <= r <= 1 for r in ratios)
    assert np.all(np.diff(ratios) > 0)


def test_sharpness_constants(rule):
    A, B, lam = sharpness_fit(3, rule)
    assert A == pytest.approx(4.0, abs=1e-10)
    assert B == pytest.approx(4 / 5 / 2, abs=1e-6)
    assert lam is not None


def test_asymptotic_gap_shrinks(rule24):
    u = 0.3 * random_fourier(4)
    rows = asymptotic_energy_probe(u, [3, 6, 12], rule24)
    # leading order: the gap is o(k) and nonnegative by the sharp bound
    rel = [r.gap / r.k for r in rows]
    assert all(r.gap >= -1e-10 for r in rows)
    assert np.all(np.diff(rel) < 0)
    with pytest.raises(ValueError):
        asymptotic_energy_probe(u, [2], rule24)


def test_csv_and_aggregate(tmp_path, rule):
    reps = [check_moser(1, constant(0.5), rule), make_report("x", 0, "u", 2.0, 1.0)]
    reports_to_csv(reps, tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "name,m,u_label,lhs,rhs,slack,verdict" and len(lines) == 3
    agg = aggregate("s", reps)
    assert agg["passes"] == 1 and agg["failures"] == 1 and agg["worst_slack"] == pytest.approx(-1.0)
    aggregate_json("s", reps, tmp_path / "a.json")
    assert json.loads((tmp_path / "a.json").read_text())["suite"] == "s"
    assert dirichlet_energy(constant(0.5), rule) == 0

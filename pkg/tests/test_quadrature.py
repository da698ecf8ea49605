import dataclasses

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import comb

from sphere_toeplitz.quadrature import NonFiniteIntegrand, build_quadrature, integrate, integrate_ambient, moment_errors


def test_weights_sum_to_one(rule):
    assert abs(rule.weights.sum() - 1) < 1e-14
    assert rule.x.shape == (rule.size, 3)


def test_level_validation():
    with pytest.raises(ValueError):
        build_quadrature(0)


@given(st.integers(0, 20), st.data())
def test_moments(m, data):
    rule = build_quadrature(20)
    i = data.draw(st.integers(0, m))
    r2 = np.abs(rule.z) ** 2
    val = integrate(lambda z: np.abs(z) ** (2 * i) / (1 + np.abs(z) ** 2) ** m, rule)
    assert abs(val - 1 / ((m + 1) * comb(m, i))) < 1e-12
    assert r2.shape == (rule.size,)


def test_moment_table(rule):
    assert moment_errors(rule, 16).max() < 1e-13


def test_spherical_harmonics_vanish(rule):
    # degree-1 and degree-2 harmonics integrate to zero
    assert abs(integrate_ambient(lambda x: x[..., 2], rule)) < 1e-14
    assert abs(integrate_ambient(lambda x: 3 * x[..., 0] ** 2 - 1, rule)) < 1e-13
    assert abs(integrate_ambient(lambda x: x[..., 0] * x[..., 1], rule)) < 1e-14


def test_nonfinite_reports_node(rule):
    with pytest.raises(NonFiniteIntegrand), np.errstate(divide="ignore"):
        integrate(lambda z: 1 / (np.abs(z) - np.abs(rule.z[3])), rule)


def test_corrupted_weights_detected(rule):
    bad = dataclasses.replace(rule, weights=rule.weights * 1.001)
    assert moment_errors(bad, 5).max() > 1e-6


def test_csv_roundtrip(rule, tmp_path):
    rule.to_csv(tmp_path / "q.csv")
    data = np.loadtxt(tmp_path / "q.csv", delimiter=",", skiprows=1)
    assert data.shape[0] == rule.size

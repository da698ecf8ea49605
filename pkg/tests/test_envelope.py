import numpy as np
import pytest
from hypothesis import given, strategies as st

from sphere_toeplitz.envelope import (
    NotPsh,
    RadialFunction,
    check_functionals_along_geodesic,
    check_orthogonality,
    critical_point_solver,
    derivative_of_composed_energy,
    discrete_energy,
    distance_to_dilation_family,
    geodesic_radial,
    ma_measure_radial,
    project_envelope,
    t_grid,
)
from sphere_toeplitz.energy import energy_E
from sphere_toeplitz.functions import constant, dilation, random_radial
from sphere_toeplitz.quadrature import build_quadrature

GRID = t_grid(12.0, 513)


def _wiggly(seed, amp):
    rng = np.random.default_rng(seed)
    a, f = rng.normal(size=3), rng.uniform(0.5, 3.0, size=3)
    return RadialFunction.from_callable(lambda t: amp * sum(ai * np.sin(fi * t) / np.cosh(t / 4) for ai, fi in zip(a, f)), GRID)


def test_validation():
    with pytest.raises(ValueError):
        RadialFunction(np.array([0.0, 0.0]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        RadialFunction(np.array([0.0, 1.0]), np.array([1.0, np.nan]))
    with pytest.raises(ValueError):
        RadialFunction.from_test_function(dilation(2.0).rotated(np.array([[1, 0, 0], [0, 0, 1], [0, -1, 0.0]])))


def test_extrapolation():
    f = RadialFunction(np.array([0.0, 1.0]), np.array([0.0, 1.0]), left_slope=0.5, right_slope=2.0)
    assert f(-2.0) == pytest.approx(-1.0) and f(3.0) == pytest.approx(5.0) and f(0.5) == pytest.approx(0.5)


@given(st.integers(0, 2**31), st.floats(0.1, 3.0))
def test_projection_properties(seed, amp):
    k = 3.0
    u = _wiggly(seed, amp)
    Pu = project_envelope(u, k)
    assert np.all(Pu.values <= u.values + 1e-12)
    assert Pu.is_psh(k)
    # idempotent, and psh inputs are fixed
    assert np.allclose(project_envelope(Pu, k).values, Pu.values, atol=1e-10)
    assert abs(check_orthogonality(u, k)) < 1e-9 * (1 + amp)
    assert ma_measure_radial(Pu, k).sum() == pytest.approx(1.0, abs=1e-12)


def test_ma_measure_rejects_non_psh():
    u = _wiggly(1, 5.0)
    assert not u.is_psh(2.0)
    with pytest.raises(NotPsh):
        ma_measure_radial(u, 2.0)


def test_discrete_energy_matches_quadrature():
    k = 4
    u = RadialFunction.from_test_function(dilation(1.7))
    assert discrete_energy(u, k) == pytest.approx(energy_E(dilation(1.7), k, build_quadrature(64)), abs=1e-4)
    assert discrete_energy(RadialFunction.from_test_function(constant(2.0)), k) == pytest.approx(2.0)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_composed_energy_derivative(seed):
    k = 3.0
    u, v = _wiggly(seed, 2.0), _wiggly(seed + 100, 0.5)
    fd, exact = derivative_of_composed_energy(u, v, k, step=1e-5)
    assert fd == pytest.approx(exact, abs=1e-4)


def test_dilation_geodesic():
    k, lam = 4, 2.5
    u0 = RadialFunction.from_test_function(constant(0.0))
    u1 = RadialFunction.from_test_function(k * dilation(lam))
    g = geodesic_radial(u0, u1, k)
    t = np.linspace(-8, 8, 33)
    s_t = 1 / (1 + np.exp(-t))
    for s in (0.0, 0.3, 1.0):
        assert np.allclose(g(t, s), (k * dilation(lam**s)).profile(s_t)[0], atol=1e-8)
    mid = g.test_function(0.5)
    d, lam_fit = distance_to_dilation_family(lambda s: mid.profile(s)[0], k)
    assert d < 1e-6 and lam_fit == pytest.approx(np.sqrt(lam), rel=1e-4)


def test_geodesic_errors():
    u0 = RadialFunction.from_test_function(constant(0.0))
    bad = RadialFunction.from_test_function(10 * dilation(3.0))
    with pytest.raises(NotPsh):
        geodesic_radial(u0, bad, 2)
    g = geodesic_radial(u0, RadialFunction.from_test_function(2 * dilation(1.5)), 4)
    with pytest.raises(ValueError):
        check_functionals_along_geodesic(g, 3, build_quadrature(8))


def test_functionals_along_geodesic():
    k, m = 4, 2
    # u0 = 0 maximizes F, so F stays below its starting value
    u0 = RadialFunction.from_test_function(constant(0.0))
    u1 = RadialFunction.from_test_function(2 * dilation(2.0) + random_radial(3, 4, 0.3))
    rep = check_functionals_along_geodesic(geodesic_radial(u0, u1, k), m, build_quadrature(16), n_s=9)
    assert rep.ok, rep


def test_critical_solver():
    u = RadialFunction.from_test_function(random_radial(5, 4, 0.3))
    res = critical_point_solver(2, u)
    assert res.converged and res.residual <= 1e-6 and res.distance_to_family <= 1e-4
    with pytest.raises(ValueError):
        critical_point_solver(2, u, damping=0.0)
    with pytest.raises(NotPsh):
        critical_point_solver(0, _wiggly(1, 5.0))

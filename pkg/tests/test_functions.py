import numpy as np
import pytest
from hypothesis import given, strategies as st

from sphere_toeplitz.functions import (
    constant,
    dilation,
    harmonic1,
    make_test_function,
    mobius,
    radial_bump,
    random_fourier,
    random_radial,
    random_rotated,
    random_test_function,
    saturating_potential,
    standard_battery,
)
from sphere_toeplitz.geometry import MobiusMap, lift_array, random_rotation


def _fd_checks(u, x, h=1e-5):
    """Tangent gradient and Laplacian against differences along great circles."""
    val, grad, lap = u.evaluate(x)
    rng = np.random.default_rng(0)
    e = rng.normal(size=3)
    e -= (e @ x) * x
    e /= np.linalg.norm(e)
    f = e
    g = np.cross(x, e)
    arc = lambda d, t: np.cos(t) * x + np.sin(t) * d  # noqa: E731
    dd = (u.at(arc(f, h)) - u.at(arc(f, -h))) / (2 * h)
    lap_fd = sum((u.at(arc(d, h)) - 2 * val + u.at(arc(d, -h))) / h**2 for d in (f, g))
    return abs(dd - grad @ f), abs(lap_fd - lap)


@pytest.mark.parametrize("u", standard_battery(0, 8), ids=lambda u: u.label[:40])
def test_derivatives_match_differences(u):
    rng = np.random.default_rng(1)
    for _ in range(3):
        x = lift_array(complex(*rng.normal(size=2)))
        eg, el = _fd_checks(u, x)
        assert eg < 1e-6 and el < 1e-3


def test_tangent_gradient():
    u = random_fourier(3)
    x = lift_array(np.array([0.3 + 0.1j, -2.0j]))
    _, g, _ = u.evaluate(x)
    assert np.allclose(np.sum(g * x, axis=-1), 0)


def test_harmonic1_is_eigenfunction():
    x = lift_array(np.array([0.2, 1 + 1j, -3j]))
    v, _, lap = harmonic1().evaluate(x)
    assert np.allclose(lap, -2 * v)


@given(st.floats(0.2, 5.0))
def test_dilation_matches_mobius(lam):
    x = lift_array(np.array([0.4 - 0.3j, 2.0, -0.1j]))
    # the det-1 normalization shifts the potential by a constant
    assert np.allclose(dilation(lam).at(x) - np.log(lam), mobius(MobiusMap.dilation(lam)).at(x))


@given(st.integers(0, 2**31))
def test_mobius_potential_constant_free(seed):
    F = MobiusMap.random(np.random.default_rng(seed))
    x = lift_array(np.array([0.0, 1j, 3.0]))
    v, _, lap = mobius(F).evaluate(x)
    # omega_0 + dd^c u_F is the pull-back of omega_0, hence positive
    assert np.all(1 + lap / 2 > 0)


def test_rotation_invariance_of_values():
    rng = np.random.default_rng(4)
    R = random_rotation(rng)
    u = random_fourier(7)
    x = lift_array(np.array([0.3 + 0.4j, -1.2]))
    assert np.allclose(u.rotated(R).at(x), u.at(x @ R.T))


def test_rotated_radial_keeps_profile():
    u = radial_bump(1.0, 0.2, 0.3)
    assert u.rotated(np.eye(3)).radial
    assert not random_rotated(u, 3).radial
    flip = np.diag([1.0, -1.0, -1.0])
    x = lift_array(np.array([0.5j, 2.0]))
    assert np.allclose(u.rotated(flip).at(x), u.at(x @ flip.T))


def test_arithmetic():
    u, v = harmonic1(), dilation(2.0)
    x = lift_array(np.array([0.1, 2j]))
    assert np.allclose((2 * u + v - 1.0).at(x), 2 * u.at(x) + v.at(x) - 1)
    assert np.allclose((-u).evaluate(x)[2], -u.evaluate(x)[2])
    assert (random_fourier(1) + v).profile is None and (u + v + constant(1)).radial


def test_saturating_scaling():
    F = MobiusMap.dilation(2.0)
    x = lift_array(np.array([0.3]))
    assert np.allclose(saturating_potential(F, 3).at(x), 5 * mobius(F).at(x))


def test_registry():
    assert make_test_function("dilation", **{"lambda": 3.0}).label == dilation(3.0).label
    with pytest.raises(ValueError, match="unknown"):
        make_test_function("nope")
    assert random_radial(1).radial


def test_random_test_function_deterministic():
    a = random_test_function(np.random.default_rng(5))
    b = random_test_function(np.random.default_rng(5))
    x = lift_array(np.array([0.7j]))
    assert a.label == b.label and np.allclose(a.at(x), b.at(x))

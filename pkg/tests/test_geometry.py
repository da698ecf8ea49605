import numpy as np
import pytest
from hypothesis import given, strategies as st

from sphere_toeplitz.geometry import (
    MobiusMap,
    SpherePoint,
    StereoCoord,
    chordal_sq,
    fubini_study_weight,
    hopf,
    hopf_section,
    lift_array,
    project_array,
    random_rotation,
    rotation_from_unitary,
    stereo_lift,
    stereo_project,
    su2_from_rotation,
)

finite = st.floats(-50, 50, allow_nan=False)
chart_point = st.builds(complex, finite, finite)


@given(chart_point)
def test_stereo_roundtrip(z):
    x = lift_array(z)
    assert abs(np.linalg.norm(x) - 1) < 1e-12
    assert abs(project_array(x) - z) <= 1e-9 * (1 + abs(z) ** 2)


def test_poles():
    assert stereo_project(SpherePoint(0, 0, 1)).at_infinity
    assert stereo_lift(StereoCoord.infinity()) == SpherePoint(0.0, 0.0, 1.0)
    assert np.allclose(lift_array(0j), [0, 0, -1])
    with pytest.raises(ValueError):
        SpherePoint(1.0, 1.0, 0.0)
    with pytest.raises(ValueError, match="chart"):
        fubini_study_weight(StereoCoord.infinity())


@given(chart_point, chart_point)
def test_chordal_identity(z, w):
    d = np.sum((lift_array(z) - lift_array(w)) ** 2)
    assert abs(chordal_sq(z, w) - d) < 1e-9


def test_antipodal_chordal():
    assert np.isclose(np.log(chordal_sq(0.0, 1e8)), np.log(4.0))
    assert np.isclose(chordal_sq(2.0 + 1j, -1 / np.conj(2.0 + 1j)), 4.0)


@given(st.integers(0, 2**31))
def test_hopf_section_and_rotation(seed):
    rng = np.random.default_rng(seed)
    x = lift_array(complex(*rng.normal(size=2)))
    assert np.allclose(hopf(hopf_section(x)), x)
    R = random_rotation(rng)
    assert np.allclose(R @ R.T, np.eye(3)) and np.isclose(np.linalg.det(R), 1)
    W = su2_from_rotation(R)
    assert np.allclose(rotation_from_unitary(W), R, atol=1e-12)


@given(st.integers(0, 2**31))
def test_mobius_group(seed):
    rng = np.random.default_rng(seed)
    F, G = MobiusMap.random(rng), MobiusMap.random(rng)
    assert np.isclose(np.linalg.det(F.matrix), 1)
    z = complex(*rng.normal(size=2))
    assert np.isclose((F @ G)(z), F(G(z)))
    assert np.isclose(F.inverse()(F(z)), z)


def test_su2_is_rotation():
    F = MobiusMap.su2(1 + 1j, 0.5)
    assert F.is_unitary
    z = np.array([0.3 + 0.2j, -1.5j])
    assert np.allclose(chordal_sq(F(z[0]), F(z[1])), chordal_sq(z[0], z[1]))

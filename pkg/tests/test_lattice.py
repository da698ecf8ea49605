import numpy as np
import pytest
from hypothesis import given, strategies as st

from sphere_toeplitz.functions import constant, dilation, harmonic1, random_fourier
from sphere_toeplitz.lattice import (
    LatticeCount,
    chain_bound,
    count_brute_force,
    count_lattice_points,
    counts_to_csv,
    log_unit_ball_volume,
    minkowski_check,
    real_form,
    unnormalized_gram,
    volume_identity_check,
)
from sphere_toeplitz.quadrature import build_quadrature

RULE = build_quadrature(8)


def test_unit_ball_volume():
    assert np.exp(log_unit_ball_volume(2)) == pytest.approx(np.pi)
    assert np.exp(log_unit_ball_volume(4)) == pytest.approx(np.pi**2 / 2)


def test_gaussian_integers_in_unit_disc():
    # 0, +-1, +-i
    c = count_lattice_points(0, constant(0.0), RULE)
    assert c.count == 5 and c.h0 == pytest.approx(np.log(5))
    assert c.minkowski_bound == pytest.approx(np.log(np.pi) - 2 * np.log(2))


def test_monomial_gram():
    # int |z|^{2i} (1 + |z|^2)^{-m} omega_0 = 1 / ((m + 1) C(m, i))
    G = unnormalized_gram(3, constant(0.0), RULE)
    assert np.allclose(G, np.diag([1 / 4, 1 / 12, 1 / 12, 1 / 4]), atol=1e-14)


def test_real_form():
    G = unnormalized_gram(2, random_fourier(1), RULE)
    a = np.array([1 + 2j, -1j, 3.0])
    x = np.concatenate([a.real, a.imag])
    assert x @ real_form(G) @ x == pytest.approx(np.real(a.conj() @ G @ a))


def test_cap():
    with pytest.raises(ValueError, match="enumeration dimension cap exceeded"):
        count_lattice_points(5, constant(0.0), build_quadrature(8))


@given(st.floats(-3.0, 0.0), st.floats(0.0, 0.5), st.integers(0, 2))
def test_monotone_in_u(c, dc, m):
    a = count_lattice_points(m, constant(c), RULE).count
    b = count_lattice_points(m, constant(c + dc), RULE).count
    assert b >= a


@pytest.mark.parametrize("m,u", [(1, harmonic1()), (2, dilation(1.5) - 1.0), (3, constant(-0.5))])
def test_against_brute_force(m, u):
    Q = real_form(unnormalized_gram(m, u, RULE))
    assert count_lattice_points(m, u, RULE, threads=3).count == count_brute_force(Q)


@pytest.mark.parametrize("m", range(5))
def test_chain_and_volume(m):
    u = random_fourier(4)
    c = minkowski_check(m, u, RULE)
    ch = chain_bound(m, u, RULE)
    assert abs(ch["minkowski"] - c.minkowski_bound) < 1e-8
    assert ch["energy"] <= ch["minkowski"] + 1e-8 <= c.h0 + 2e-8
    assert abs(volume_identity_check(m, u, RULE)) < 1e-9


def test_record_validation(tmp_path):
    with pytest.raises(ValueError):
        LatticeCount(0, "u", 0, 0.0, 0.0, 0.0)
    with pytest.raises(ArithmeticError):
        LatticeCount(0, "u", 1, 0.0, 0.0, 1.0)
    c = count_lattice_points(0, constant(0.0), RULE)
    counts_to_csv([c], tmp_path / "l.csv")
    rows = (tmp_path / "l.csv").read_text().splitlines()
    assert rows[0] == "m,u_label,count,h0,log_ball_volume,minkowski_bound,slack"
    assert rows[1].split(",")[2] == "5"

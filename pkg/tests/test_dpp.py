import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import ks_2samp

from sphere_toeplitz.dpp import (
    McEstimate,
    PointConfiguration,
    chernoff_bound,
    chernoff_experiment,
    density_log_chart,
    density_log_unnormalized,
    mc_linear_statistic,
    nearest_neighbor_distances,
    partition_constant,
    partition_constant_ambient,
    sample_batch,
    sample_kernel_projection,
    sample_random_matrix,
    samples_to_csv,
    summary_to_json,
)
from sphere_toeplitz.functions import constant, harmonic1
from sphere_toeplitz.geometry import lift_array


@given(st.integers(0, 2**40), st.integers(1, 8))
def test_samples_on_sphere(seed, N):
    for conf in (sample_random_matrix(N, seed), sample_kernel_projection(N, seed)):
        assert conf.N == N
        assert np.allclose(np.sum(conf.points**2, axis=1), 1.0)
        assert len(conf.sphere_points()) == N


def test_configuration_validation():
    with pytest.raises(ValueError):
        PointConfiguration(np.array([[1.0, 1.0, 0.0]]), 0, "random-matrix")
    with pytest.raises(ValueError):
        sample_random_matrix(0, 1)
    with pytest.raises(ValueError):
        sample_batch(3, 2, 0, sampler="metropolis")


@pytest.mark.parametrize("sampler", ["random-matrix", "kernel-projection"])
def test_batch_independent_of_threads(sampler):
    a = sample_batch(4, 300, 7, sampler, threads=1)
    b = sample_batch(4, 300, 7, sampler, threads=4)
    assert np.array_equal(a, b)
    c = sample_batch(4, 300, 8, sampler)
    assert not np.array_equal(a, c)


def test_batch_matches_single_draws():
    batch = sample_batch(5, 10, 3)
    for i in (0, 9):
        assert np.allclose(batch[i], sample_random_matrix(5, 3, i).points)


def test_partition_constants():
    assert partition_constant(1) == pytest.approx(0.0, abs=1e-15)
    # int |x - y|^2 over two independent uniform points is 2
    assert partition_constant_ambient(2) == pytest.approx(np.log(2.0))
    with pytest.raises(ValueError):
        partition_constant(0)


def test_density_forms_agree():
    rng = np.random.default_rng(0)
    z = rng.normal(size=5) + 1j * rng.normal(size=5)
    amb = density_log_unnormalized(lift_array(z))
    # ambient and chart forms differ by C(N, 2) log 4
    assert amb - density_log_chart(z) == pytest.approx(10 * np.log(4.0))


def test_coincidence_sentinel():
    p = lift_array(np.array([0.3 + 0.1j, 0.3 + 0.1j, -2.0]))
    assert density_log_unnormalized(p) == -np.inf
    assert density_log_chart(np.array([1.0, 1.0])) == -np.inf


def test_samplers_agree_in_law():
    a = nearest_neighbor_distances(sample_batch(5, 600, 1, "random-matrix"))
    b = nearest_neighbor_distances(sample_batch(5, 600, 2, "kernel-projection"))
    assert ks_2samp(a, b).pvalue > 1e-3


def test_linear_statistic_mean():
    # E sum x3 = N int x3 omega_0 = 0; E sum 1 = N exactly
    est = mc_linear_statistic(harmonic1(), 6, 4000, seed=5, t=0.5)
    assert abs(est.mean.z_score(0.0)) < 5
    assert est.mgf.mean >= 1.0 - 5 * est.mgf.std_error
    c = mc_linear_statistic(constant(1.0), 6, 100, seed=5)
    assert c.mean.mean == pytest.approx(6.0) and c.variance.mean == pytest.approx(0.0, abs=1e-20)
    with pytest.raises(ValueError):
        mc_linear_statistic(harmonic1(), 6, 10, seed=5)


def test_chernoff():
    with pytest.raises(ValueError, match="center u first"):
        chernoff_experiment(constant(1.0), 4, 0.1, 100, 0)
    res = chernoff_experiment(harmonic1(), 4, 0.3, 2000, 0)
    assert res.empirical_tail <= res.bound
    assert chernoff_bound(4, 0.3, 2 / 3) == pytest.approx(np.exp(-16 * 0.09 * 5 / (8 * 2 / 3)))


def test_mc_estimate():
    e = McEstimate.from_samples([1.0, 2.0, 3.0])
    assert e.mean == 2.0 and e.std_error == pytest.approx(1 / np.sqrt(3))
    assert McEstimate(1.0, 0.0, 1).z_score(1.0) == 0.0


def test_outputs(tmp_path):
    s = sample_batch(3, 2, 0)
    samples_to_csv(s, tmp_path / "s.csv")
    rows = (tmp_path / "s.csv").read_text().splitlines()
    assert rows[0] == "sample_id,point_id,x,y,z" and len(rows) == 7
    out = summary_to_json(tmp_path / "s.json", 3, 2, 0, {"m": McEstimate(0.1, 0.1, 2)}, {"m": 0.0})
    assert out["z_scores"]["m"] == pytest.approx(1.0)

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate, stats

from ergolab.exceptions import CapExceededError, DimensionError
from ergolab.measure_core import (AtomicMeasure, Categorical, MetricSpec,
                                  bl_atomic, gaussian_hellinger_gap,
                                  gaussian_seq_tv_bound,
                                  hellinger_gaussian_affinity,
                                  poisson_hellinger_gap, product_tv_bound,
                                  stratified_subsample, systematic_resample,
                                  tv_atomic, tv_categorical,
                                  tv_joint_from_conditionals)
from ergolab.rng import as_generator, role_key, stream


def test_categorical_validation():
    with pytest.raises(ValueError):
        Categorical([0.5, 0.6])
    with pytest.raises(ValueError):
        Categorical([1.5, -0.5])
    with pytest.raises(ValueError):
        Categorical([])
    assert Categorical.point(3, 1).probs.tolist() == [0.0, 1.0, 0.0]
    assert Categorical.normalized([1, 3]).probs.tolist() == [0.25, 0.75]


def test_tv_categorical():
    assert tv_categorical(Categorical.point(3, 0),
                          Categorical.point(3, 2)) == 2.0
    p = Categorical([0.2, 0.3, 0.5])
    assert tv_categorical(p, p) == 0.0
    with pytest.raises(DimensionError):
        tv_categorical(Categorical.uniform(2), Categorical.uniform(3))


def test_tv_atomic_merges_atoms():
    p = AtomicMeasure.uniform(np.array([[0.0], [1.0]]))
    q = AtomicMeasure.uniform(np.array([[1.0], [2.0]]))
    assert tv_atomic(p, q) == pytest.approx(1.0, abs=1e-15)
    assert tv_atomic(p, p) == 0.0


def test_bl_diracs():
    metric = MetricSpec.euclidean()
    zero = AtomicMeasure.dirac([0.0])
    assert bl_atomic(zero, AtomicMeasure.dirac([0.5]),
                     metric) == pytest.approx(0.5, abs=1e-9)
    assert bl_atomic(zero, AtomicMeasure.dirac([3.0]),
                     metric) == pytest.approx(2.0, abs=1e-9)
    assert bl_atomic(zero, zero, metric) == 0.0


def test_bl_below_tv_and_symmetric():
    rng = np.random.default_rng(3)
    metric = MetricSpec.euclidean()
    for _ in range(10):
        p = AtomicMeasure.uniform(rng.normal(size=(15, 2)))
        q = AtomicMeasure.uniform(rng.normal(0.5, 1.0, size=(12, 2)))
        bl = bl_atomic(p, q, metric)
        assert 0 <= bl <= tv_atomic(p, q) + 1e-9
        assert bl == pytest.approx(bl_atomic(q, p, metric), abs=1e-8)


def test_bl_cap():
    cloud = AtomicMeasure.uniform(np.arange(10.0)[:, None])
    with pytest.raises(CapExceededError):
        bl_atomic(cloud, cloud, MetricSpec.euclidean(), cap=15)


def test_bl_random_diracs():
    rng = np.random.default_rng(17)
    metric = MetricSpec.euclidean()
    for _ in range(200):
        x, y = rng.normal(0, 1.5, size=(2, 3))
        expected = min(2.0, float(np.linalg.norm(x - y)))
        assert bl_atomic(AtomicMeasure.dirac(x), AtomicMeasure.dirac(y),
                         metric) == pytest.approx(expected, abs=1e-9)


def test_bl_split_mass_against_midpoint():
    metric = MetricSpec.euclidean()
    split = AtomicMeasure.uniform(np.array([[0.0], [2.0]]))
    middle = AtomicMeasure.dirac([1.0])
    assert bl_atomic(split, middle, metric) == pytest.approx(1.0, abs=1e-9)


def test_bl_assignment_agrees_with_lp():
    rng = np.random.default_rng(23)
    metric = MetricSpec.euclidean()
    for _ in range(5):
        a = rng.normal(size=(30, 2))
        b = rng.normal(0.7, 1.2, size=(30, 2))
        p = AtomicMeasure.uniform(a)
        # Same measure as the uniform cloud on ``b``, but with one atom
        # split in two, so the LP handles it.
        weights = np.full(31, 1.0 / 30)
        weights[0] = weights[-1] = 0.5 / 30
        q_split = AtomicMeasure(np.vstack([b, b[:1]]), weights)
        fast = bl_atomic(p, AtomicMeasure.uniform(b), metric)
        assert fast == pytest.approx(bl_atomic(p, q_split, metric),
                                     abs=1e-8)


def test_affinity_matches_quadrature():
    for a, b in [(0.0, 0.0), (0.0, 1.0), (-1.5, 2.0), (3.0, -0.2)]:
        value, _ = integrate.quad(
            lambda u: np.sqrt(stats.norm.pdf(u, a) * stats.norm.pdf(u, b)),
            -np.inf, np.inf, epsabs=1e-13, epsrel=1e-12)
        assert hellinger_gaussian_affinity(a, b) == pytest.approx(
            value, abs=1e-8)


def test_gaussian_sequence_bound_dominates_exact_tv():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        gaps = rng.normal(0, rng.uniform(0.01, 2.0), size=rng.integers(1, 6))
        delta = np.sqrt(np.sum(gaps ** 2))
        exact = 2 * (2 * stats.norm.cdf(delta / 2) - 1)
        assert exact <= gaussian_seq_tv_bound(gaps) + 1e-12


def test_gaussian_sequence_bound_monte_carlo():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        dim = rng.integers(1, 5)
        gaps = rng.normal(0, 0.7, size=dim)
        x = rng.standard_normal((2000, dim))
        log_ratio = -0.5 * np.sum((x - gaps) ** 2 - x ** 2, axis=1)
        samples = np.abs(1 - np.exp(log_ratio))
        estimate = samples.mean()
        stderr = samples.std(ddof=1) / np.sqrt(samples.size)
        assert estimate <= gaussian_seq_tv_bound(gaps) + 3 * stderr


def test_product_tv_bound():
    assert product_tv_bound([1.0, 1.0]) == 0.0
    assert product_tv_bound([0.0]) == 2.0
    with pytest.raises(ValueError):
        product_tv_bound([1.2])


def test_tv_joint_from_conditionals_matches_enumeration():
    rng = np.random.default_rng(1)
    for _ in range(100):
        m = rng.dirichlet(np.ones(4))
        K = rng.dirichlet(np.ones(4), size=4)
        K2 = rng.dirichlet(np.ones(4), size=4)
        joint = np.abs(m[:, None] * K - m[:, None] * K2).sum()
        assert tv_joint_from_conditionals(m, K, K2) == pytest.approx(
            joint, abs=1e-12)
    with pytest.raises(DimensionError):
        tv_joint_from_conditionals(np.ones(3) / 3, np.eye(4), np.eye(4))


def test_gaussian_hellinger_gap():
    assert gaussian_hellinger_gap(np.zeros(3), 0.5) == 0.0
    gap = gaussian_hellinger_gap([2.0], 1.0)
    assert gap == pytest.approx(2 - 2 * np.exp(-0.5))
    assert gap <= 2.0 ** 2 / 4
    diff = np.array([0.3, -1.2])
    assert gaussian_hellinger_gap(diff, np.array([0.5, 2.0])) == \
        pytest.approx(gaussian_hellinger_gap(diff, np.diag([0.5, 2.0])))
    batch = gaussian_hellinger_gap(np.ones((4, 2)), 1.0)
    assert batch.shape == (4,)


def test_poisson_hellinger_gap():
    assert poisson_hellinger_gap(2.0, 2.0) == 0.0
    assert poisson_hellinger_gap(1.0, 4.0) == pytest.approx(
        poisson_hellinger_gap(4.0, 1.0))
    assert poisson_hellinger_gap(0.0, 1e6) <= 2.0


def test_systematic_resample_counts():
    rng = np.random.default_rng(0)
    weights = rng.dirichlet(np.ones(7))
    index = systematic_resample(weights, 100, rng)
    counts = np.bincount(index, minlength=7)
    assert np.all(np.abs(counts - 100 * weights) < 1 + 1e-9)
    assert np.all(systematic_resample([0.0, 1.0, 0.0], 5, rng) == 1)


def test_stratified_subsample():
    small = AtomicMeasure.uniform(np.arange(5.0)[:, None])
    assert stratified_subsample(small, 10, 0) is small
    big = AtomicMeasure.uniform(np.arange(500.0)[:, None])
    reduced = stratified_subsample(big, 50, 0)
    assert reduced.size == 50
    assert_allclose(reduced.weights, 1 / 50)
    again = stratified_subsample(big, 50, 0)
    assert np.array_equal(reduced.atoms, again.atoms)


def test_metric_spec():
    with pytest.raises(ValueError):
        MetricSpec('taxicab')
    with pytest.raises(ValueError):
        MetricSpec('hamming')
    with pytest.raises(ValueError):
        MetricSpec.euclidean([1.0, 0.0])

    sobolev = MetricSpec.sobolev([1.0, 2.0], s=1.0)
    assert sobolev.distance([0.0, 0.0], [1.0, 1.0]) == pytest.approx(
        np.sqrt(5.0))
    hamming = MetricSpec.hamming([0.5, 0.25, 0.25])
    assert hamming.distance([0, 1, 1], [1, 1, 0]) == pytest.approx(0.75)
    sup = MetricSpec.supremum()
    assert sup.distance([0.0, 3.0], [1.0, -1.0]) == pytest.approx(4.0)
    with pytest.raises(DimensionError):
        hamming.distance([0, 1], [1, 1])


def test_metric_complex_and_paired():
    metric = MetricSpec.euclidean()
    x = np.array([[1 + 1j, 0], [0, 2j]])
    y = np.zeros((2, 2), dtype=complex)
    assert_allclose(metric.paired(x, y), [np.sqrt(2.0), 2.0])
    X = np.random.default_rng(2).normal(size=(5, 3))
    Y = np.random.default_rng(3).normal(size=(5, 3))
    for m in (metric, MetricSpec.supremum(),
              MetricSpec.sobolev([1.0, 2.0, 3.0])):
        assert_allclose(m.paired(X, Y), np.diag(m.pairwise(X, Y)),
                        rtol=1e-12)


def test_streams():
    a = stream(7, 2, 'signal').random(5)
    assert np.array_equal(a, stream(7, 2, 'signal').random(5))
    assert not np.array_equal(a, stream(7, 2, 'observations').random(5))
    assert not np.array_equal(a, stream(7, 3, 'signal').random(5))
    assert role_key('signal') == role_key('signal')
    rng = np.random.default_rng(0)
    assert as_generator(rng) is rng
    with pytest.raises(ValueError):
        stream(None)

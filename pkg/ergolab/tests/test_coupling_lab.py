from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ergolab.coupling_lab import (CoupledPair, alpha_estimate,
                                  disagreement_decay, fit_decay_rate,
                                  hellinger_gap_quadrature,
                                  hellinger_lipschitz_check,
                                  independent_coupling_run,
                                  monotone_coupling_run, sample_pairs,
                                  synchronous_coupling_run, trajectory,
                                  wilson_interval)
from ergolab.exceptions import CouplingOrderError
from ergolab.markov_lab import FiniteChain
from ergolab.measure_core import MetricSpec
from ergolab.models import (DelayModel, FiniteChainModel, HeatModel,
                            NSModel, SpinModel, spin_pair_step)


class ConstantGapModel:
    """Observations that always differ, whatever the states."""

    name = 'constant_gap'
    coupling_metric = MetricSpec.euclidean()

    def hellinger_gap(self, x, xb):
        return 1.0


@pytest.fixture(scope='module')
def heat():
    return HeatModel(modes=4)


def test_coupled_pair_checks_distances():
    x = np.zeros((3, 2))
    metric = MetricSpec.euclidean()
    with pytest.raises(ValueError):
        CoupledPair(x, x, np.array([0.0, 1.0, 0.0]), np.zeros(3), metric,
                    metric)
    with pytest.raises(ValueError):
        CoupledPair(x, np.zeros((2, 2)), np.zeros(3), np.zeros(3), metric,
                    metric)
    pair = CoupledPair(x, x, np.zeros(3), np.zeros(3), metric, metric)
    assert pair.T == 2
    assert pair.tail_sum() == 0.0
    assert pair.disagreements().tolist() == [0, 0, 0]


def test_synchronous_heat_contracts_exactly(heat):
    x0 = np.ones(4)
    x0b = -np.ones(4)
    pair = synchronous_coupling_run(heat, x0, x0b, 30, seed=1)
    weights = np.pi ** 2 * heat.wavenumbers ** 2
    for n in range(31):
        gap = heat.decay ** n * (x0 - x0b)
        assert pair.d_tilde[n] == pytest.approx(
            np.sqrt(np.sum(weights * gap ** 2)), abs=1e-10)
    assert np.all(pair.d <= pair.d_tilde)
    assert pair.tail_sum() < 1e-6
    assert_allclose(pair.x, trajectory(heat, x0, 30, seed=1))


def test_independent_heat_does_not_couple(heat):
    pair = independent_coupling_run(heat, np.zeros(4), np.zeros(4), 40,
                                    seed=0)
    assert pair.tail_sum() > 1e-3


def test_alpha_estimate_heat(heat):
    pairs = sample_pairs(heat, 3, seed=0)
    assert len(pairs) == 3
    assert pairs[0][0].shape == (4,)
    report = alpha_estimate(heat, 'synchronous', pairs, replicas=4, T=100,
                            seed=2, check_doubling=True)
    assert report.alpha_hat == 1.0
    assert report.successes == 4
    assert report.alpha_doubled == 1.0
    assert report.tail_sums.shape == (3, 4)
    assert report.tail_sums_doubled.shape == (3, 4)
    assert report.interval[1] == pytest.approx(1.0)

    independent = alpha_estimate(heat, 'independent', pairs, replicas=3,
                                 T=40, seed=2)
    assert independent.alpha_hat == 0.0
    assert independent.interval[0] == pytest.approx(0.0)

    with pytest.raises(ValueError):
        alpha_estimate(heat, 'synchronous', [], replicas=3)


def test_alpha_estimate_is_thread_independent(heat):
    pairs = sample_pairs(heat, 2, seed=5)
    serial = alpha_estimate(heat, 'independent', pairs, 3, T=20, seed=9)
    with ThreadPoolExecutor(max_workers=4) as executor:
        threaded = alpha_estimate(heat, 'independent', pairs, 3, T=20,
                                  seed=9, executor=executor)
    assert np.array_equal(serial.tail_sums, threaded.tail_sums)


def test_finite_chain_coupling():
    model = FiniteChainModel(FiniteChain([[0.5, 0.5], [0.5, 0.5]]))
    pair = synchronous_coupling_run(model, np.array([0]), np.array([1]), 10,
                                    seed=0)
    # Shared uniforms merge the copies after the first step.
    assert np.all(pair.x[1:] == pair.xb[1:])
    assert pair.tail_sum() == 0.0

    frozen = FiniteChainModel(FiniteChain(np.eye(2)))
    report = alpha_estimate(frozen, 'synchronous',
                            [(np.array([0]), np.array([1]))], 5, T=10)
    assert report.alpha_hat == 0.0


def test_wilson_interval():
    assert wilson_interval(0, 0) == (0.0, 1.0)
    low, high = wilson_interval(5, 10)
    assert low < 0.5 < high
    assert low + high == pytest.approx(1.0)
    low, high = wilson_interval(10, 10)
    assert 0.6 < low < 1.0
    assert high == pytest.approx(1.0)


def test_monotone_spin_keeps_order():
    model = SpinModel(length=12)
    low = np.zeros(12, dtype=np.int8)
    high = np.ones(12, dtype=np.int8)
    pair = monotone_coupling_run(model, low, high, 40, seed=3)
    assert np.all(pair.x <= pair.xb)
    assert pair.events > 0
    assert pair.disagreements()[0] == 12
    with pytest.raises(ValueError):
        monotone_coupling_run(model, high, low, 5, seed=3)


def test_order_violation_is_reported():
    model = FiniteChainModel(FiniteChain([[0.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(CouplingOrderError):
        monotone_coupling_run(model, np.array([0]), np.array([1]), 2, seed=0)


class RepellingRing:
    """Three sites whose up-probability falls with the up neighbours."""

    name = 'repelling_ring'
    length = 3
    p_up = np.array([0.9, 0.5, 0.1])
    metric = coupling_metric = MetricSpec.hamming([1.0, 1.0, 1.0])
    clock = (np.array([0, 0]), np.array([0.5, 0.95]))

    def draw_noise(self, rng):
        return self.clock

    def pair_step(self, s, sb, noise):
        return spin_pair_step(self, s, sb, noise)


def test_pair_step_counts_passing_violations():
    # The first event breaks the order and the second restores it.
    s, sb, violations = spin_pair_step(RepellingRing(), [0, 0, 0],
                                       [0, 1, 0], RepellingRing.clock)
    assert violations == 1
    assert np.all(s <= sb)


def test_order_violation_inside_a_step_is_reported():
    with pytest.raises(CouplingOrderError, match='1 time'):
        monotone_coupling_run(RepellingRing(), np.array([0, 0, 0]),
                              np.array([0, 1, 0]), 1, seed=0)


@pytest.mark.slow
def test_monotone_spin_keeps_order_for_a_million_events():
    model = SpinModel(length=32)
    pair = monotone_coupling_run(model, np.zeros(32, dtype=np.int8),
                                 np.ones(32, dtype=np.int8), 64000, seed=7)
    assert pair.events >= 10 ** 6
    assert np.all(pair.x <= pair.xb)


def test_disagreement_decay_spin():
    model = SpinModel(length=16)
    mean, fit = disagreement_decay(model, np.zeros(16, dtype=np.int8),
                                   np.ones(16, dtype=np.int8), 20, 20,
                                   seed=0)
    assert mean.shape == (21,)
    assert mean[0] == 16
    assert mean[-1] < mean[0]
    assert fit.rate > 0


def test_fit_decay_rate():
    t = np.arange(10.0)
    fit = fit_decay_rate(t, 3 * np.exp(-0.7 * t))
    assert fit.rate == pytest.approx(0.7)
    assert fit.intercept == pytest.approx(np.log(3))
    assert fit.points == 10
    assert fit.excludes_zero
    with pytest.raises(ValueError):
        fit_decay_rate(t, np.r_[1.0, 0.5, np.zeros(8)])


def test_hellinger_check_heat(heat):
    report = hellinger_lipschitz_check(heat, sample_pairs(heat, 200, 1))
    assert report.n_pairs == 200
    assert report.finite
    assert report.bound == pytest.approx(3 / (12 * heat.obs_var))
    assert report.within_bound
    assert 0 < report.max_gap <= 2


def test_hellinger_check_spin_and_failures():
    spin = SpinModel(length=10)
    report = hellinger_lipschitz_check(spin, sample_pairs(spin, 50, 2))
    assert report.finite
    assert report.bound is None
    assert report.within_bound

    constant = hellinger_lipschitz_check(
        ConstantGapModel(), [(np.zeros(2), np.zeros(2))])
    assert not constant.finite

    chain = FiniteChainModel(FiniteChain(np.eye(2)))
    with pytest.raises(ValueError):
        hellinger_lipschitz_check(chain, [])


def test_quadrature_matches_closed_form(heat):
    x, xb = sample_pairs(heat, 1, 4)[0]
    closed = heat.hellinger_gap(x, xb)
    numeric = hellinger_gap_quadrature(heat.field(x), heat.field(xb),
                                       heat.obs_var)
    assert numeric == pytest.approx(closed, abs=1e-8)


@pytest.mark.slow
def test_alpha_estimate_navier_stokes():
    model = NSModel()
    report = alpha_estimate(model, 'synchronous',
                            sample_pairs(model, 10, seed=4), replicas=2,
                            seed=6)
    assert report.alpha_hat >= 0.9


@pytest.mark.slow
def test_alpha_estimate_delay():
    model = DelayModel()
    report = alpha_estimate(model, 'synchronous',
                            sample_pairs(model, 5, seed=8), replicas=2,
                            T=60, seed=10)
    assert report.alpha_hat == 1.0


@pytest.mark.slow
def test_disagreement_decay_rate_is_positive():
    model = SpinModel(length=32, beta=0.4)
    mean, fit = disagreement_decay(model, np.zeros(32, dtype=np.int8),
                                   np.ones(32, dtype=np.int8), 100, 50,
                                   seed=12)
    assert mean[0] == 32
    assert fit.rate > 0
    assert fit.excludes_zero

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ergolab.conditional_lab import simulate
from ergolab.exceptions import CapExceededError
from ergolab.filter_engine import (FilterState, ParticleConfig,
                                   StabilityCurve, brute_force_filter,
                                   effective_sample_size, filter_run_exact,
                                   filter_update_exact, filter_update_particle,
                                   gamma_ergodic_averages, gamma_run,
                                   gamma_step, initial_filter,
                                   local_window_tv, particle_fidelity,
                                   stability_run)
from ergolab.measure_core import AtomicMeasure, Categorical
from ergolab.models import EmbeddedHMM
from ergolab.models.fixtures import (MIXING3_P0, flat_hmm, mixing3_hmm,
                                     parity_degenerate_hmm)


@pytest.mark.parametrize('seed', [0, 1, 2])
def test_exact_filter_matches_brute_force(seed):
    hmm = mixing3_hmm()
    _, y = simulate(hmm, 8, seed)
    for mu in (None, Categorical([0.7, 0.2, 0.1])):
        brute = brute_force_filter(hmm, y, mu)
        start = mu or Categorical(hmm.joint_stationary.sum(axis=1))
        exact = filter_run_exact(hmm, start, y)
        assert len(exact) == len(brute) == 9
        for a, b in zip(exact, brute):
            assert_allclose(a.probs, b.probs, atol=1e-12)


def test_brute_force_cap():
    hmm = mixing3_hmm()
    _, y = simulate(hmm, 11, 0)
    with pytest.raises(CapExceededError):
        brute_force_filter(hmm, y)


def test_flat_observations_give_the_prior_flow():
    hmm = flat_hmm()
    nu = Categorical([0.2, 0.5, 0.3])
    post = filter_update_exact(hmm, nu, 1, 0)
    assert_allclose(post.probs, nu.probs @ MIXING3_P0, atol=1e-12)

    curve = stability_run(hmm, Categorical.point(3, 0),
                          Categorical.point(3, 1), None, 10)
    for n, d in zip(curve.n, curve.distance):
        Pn = np.linalg.matrix_power(MIXING3_P0, n)
        assert d == pytest.approx(np.abs(Pn[0] - Pn[1]).sum(), abs=1e-12)


def test_mixing3_filters_forget_their_start():
    hmm = mixing3_hmm()
    curve = stability_run(hmm, Categorical.point(3, 0),
                          Categorical.point(3, 2), None, 50, seed=3)
    assert curve.kind == 'tv'
    assert curve.distance[0] == 2.0
    assert curve.stable()
    assert curve.distance[-1] < 1e-6


def test_mixing3_forgets_on_every_path():
    hmm = mixing3_hmm()
    for replica in range(100):
        curve = stability_run(hmm, Categorical.point(3, 0),
                              Categorical.point(3, 2), None, 200, seed=7,
                              replica=replica)
        assert curve.distance[-1] < 1e-6


def test_degenerate_filters_stay_apart():
    hmm = parity_degenerate_hmm()
    curve = stability_run(hmm, Categorical.point(4, 0),
                          Categorical.point(4, 2), Categorical.point(4, 0),
                          20)
    assert_allclose(curve.distance, 2.0)
    assert not curve.stable()


def test_stability_curve_validation():
    curve = StabilityCurve([0, 1, 2], [0.0, 0.0, 0.0], 'bl', 'window:0')
    assert curve.ratio == 0.0
    assert curve.rows[0] == (0, 0.0, 'bl', 'window:0')
    assert StabilityCurve([0, 1], [0.0, 0.5], 'tv').ratio == np.inf
    assert StabilityCurve([0, 1], [2.0, 0.1], 'tv').ratio == \
        pytest.approx(0.05)
    with pytest.raises(ValueError):
        StabilityCurve([0, 1], [0.5, 2.5], 'tv')
    with pytest.raises(ValueError):
        StabilityCurve([0, 1], [0.5, 0.5], 'hellinger')
    with pytest.raises(ValueError):
        StabilityCurve([1, 0], [0.5, 0.5], 'tv')


def test_particle_config_validation():
    with pytest.raises(ValueError):
        ParticleConfig(N=1)
    with pytest.raises(ValueError):
        ParticleConfig(resample_threshold=0.0)
    with pytest.raises(ValueError):
        ParticleConfig(resampling='multinomial')


def test_effective_sample_size():
    assert effective_sample_size(np.full(8, 1 / 8)) == pytest.approx(8)
    assert effective_sample_size([1.0, 0.0]) == pytest.approx(1)


def test_initial_filter():
    hmm = mixing3_hmm()
    state = initial_filter(hmm, Categorical.uniform(3))
    assert state.exact
    assert state.n == 0
    with pytest.raises(TypeError):
        initial_filter(hmm, 0.5)
    with pytest.raises(TypeError):
        FilterState(np.ones(3) / 3)

    embedded = EmbeddedHMM(hmm)
    cloud = initial_filter(embedded, Categorical.uniform(3),
                           ParticleConfig(N=50), seed=1)
    assert not cloud.exact
    assert cloud.measure.size == 50


def test_local_window_tv():
    atoms = np.array([[0, 1, 5], [1, 1, 6]])
    a = AtomicMeasure.uniform(atoms)
    b = AtomicMeasure.uniform(atoms[:, [0, 1, 2]] + [0, 0, 10])
    assert local_window_tv(a, b, [0, 1]) == 0.0
    assert local_window_tv(a, b, [2]) == 2.0


def test_particle_filter_tracks_exact_filter():
    embedded = EmbeddedHMM(mixing3_hmm())
    errors = particle_fidelity(embedded, Categorical.uniform(3), 10,
                               ParticleConfig(N=2000), seed=0)
    assert errors.shape == (11,)
    assert errors.max() < 0.15


@pytest.mark.slow
def test_particle_filter_error_at_scale():
    embedded = EmbeddedHMM(mixing3_hmm())
    worst = [particle_fidelity(embedded, Categorical.uniform(3), 100,
                               ParticleConfig(N=10000), seed=seed).max()
             for seed in range(20)]
    assert sum(w <= 0.05 for w in worst) >= 19


def test_particle_filter_is_unbiased_for_flat_observations():
    embedded = EmbeddedHMM(flat_hmm())
    nu = Categorical([0.6, 0.3, 0.1])
    cfg = ParticleConfig(N=20000)
    rng = np.random.default_rng(31)
    cloud = initial_filter(embedded, nu, cfg, seed=rng).measure
    for _ in range(5):
        cloud = filter_update_particle(embedded, cloud, 0, cfg, rng)
    assert_allclose(cloud.weights, 1 / cfg.N)
    law = nu.probs @ np.linalg.matrix_power(MIXING3_P0, 5)
    states = np.arange(3.0)
    mean = law @ states
    stderr = np.sqrt(law @ (states - mean) ** 2 / cfg.N)
    assert abs(cloud.atoms.mean() - mean) < 3 * stderr


def test_gamma_chain():
    hmm = mixing3_hmm()
    nu, y = gamma_step(hmm, (Categorical.uniform(3), 0), seed=2)
    assert isinstance(nu, Categorical)
    assert y in (0, 1)

    filters, ys = gamma_run(hmm, Categorical.point(3, 0), 1, 200, seed=0)
    assert filters.shape == (201, 3)
    assert ys.shape == (201,)
    assert_allclose(filters.sum(axis=1), 1.0)
    assert ys[0] == 1
    again, _ = gamma_run(hmm, Categorical.point(3, 0), 1, 200, seed=0)
    assert np.array_equal(filters, again)


@pytest.mark.slow
def test_gamma_averages_do_not_depend_on_the_start():
    hmm = mixing3_hmm()
    a = gamma_ergodic_averages(hmm, Categorical.point(3, 0), 0, 100000,
                               seed=1, burn_in=100)
    b = gamma_ergodic_averages(hmm, Categorical.point(3, 2), 1, 100000,
                               seed=2, burn_in=100)
    assert a.moments.shape == (2,)
    assert a.y_freq.sum() == pytest.approx(1.0)
    assert a.agrees_with(b, sigmas=3.0)


def test_particle_update_resamples_on_low_ess():
    embedded = EmbeddedHMM(mixing3_hmm())
    cloud = AtomicMeasure.uniform(np.repeat([[0.0], [1.0], [2.0]], 20,
                                            axis=0))
    kept = filter_update_particle(embedded, cloud, 0,
                                  ParticleConfig(N=60,
                                                 resample_threshold=1e-6),
                                  seed=4)
    assert kept.size == 60
    assert kept.weights.sum() == pytest.approx(1.0)
    assert np.ptp(kept.weights) > 0
    resampled = filter_update_particle(embedded, cloud, 0,
                                       ParticleConfig(N=60,
                                                      resample_threshold=1.0),
                                       seed=4)
    assert resampled.size == 60
    assert_allclose(resampled.weights, 1 / 60)

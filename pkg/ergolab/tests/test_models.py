import numpy as np
import pytest
from numpy.testing import assert_allclose

from ergolab.conditional_lab import FiniteHMM
from ergolab.coupling_lab import synchronous_coupling_run
from ergolab.exceptions import NumericalBlowupError
from ergolab.measure_core import Categorical
from ergolab.models import (DelayModel, EmbeddedHMM, FiniteChainModel,
                            HeatModel, NSModel, SpinModel,
                            check_forcing_set, dissipativity_constant,
                            heat_observe, heat_step, make_fixture, make_model,
                            spin_step)
from ergolab.models.fixtures import mixing3_hmm
from ergolab.rng import stream

DEFAULT_FORCING = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1))


# -- heat ---------------------------------------------------------------------

def test_heat_step():
    model = HeatModel(modes=5)
    x = np.arange(1.0, 6.0)
    assert_allclose(heat_step(model, x, np.zeros(5)), model.decay * x)
    with pytest.raises(ValueError):
        heat_step(model, x, np.zeros(4))
    with pytest.raises(ValueError):
        HeatModel(modes=0)
    with pytest.raises(ValueError):
        HeatModel(obs_points=(0.5, 1.0))


def test_heat_stationary_cloud_is_invariant():
    model = HeatModel(modes=4)
    cloud = model.sample_prior(stream(0, 0, 'prior'), 20000)
    moved = model.propagate(cloud.atoms, stream(0, 0, 'move'))
    assert_allclose(moved.var(axis=0), model.stationary_variance, rtol=0.1)
    rates = model.energy_rate(cloud.atoms)
    stderr = rates.std() / np.sqrt(rates.size)
    assert abs(rates.mean()) < 4 * stderr


def test_heat_observations():
    model = HeatModel(modes=4)
    cloud = model.sample_prior(stream(1), 7)
    assert_allclose(heat_observe(model, cloud.atoms[0], np.zeros(3)),
                    model.field(cloud.atoms[0]))
    y = model.observe(cloud.atoms[0], stream(2))
    assert y.shape == (3,)
    assert model.obs_logpdf(cloud.atoms, y).shape == (7,)
    assert model.hellinger_gap(cloud.atoms[0], cloud.atoms[0]) == 0.0


def test_heat_decay_matches_closed_form():
    model = HeatModel(modes=8)
    k = np.arange(1, 9)
    assert_allclose(model.decay, np.exp(-np.pi ** 2 * k ** 2 * 0.1),
                    rtol=0, atol=1e-10)
    assert_allclose(model.stationary_variance,
                    k ** -2.0 / (2 * np.pi ** 2 * k ** 2), rtol=1e-12)


@pytest.mark.slow
def test_heat_variances_from_rest():
    model = HeatModel(modes=8)
    atoms = np.zeros((20000, 8))
    rng = stream(2, 0, 'move')
    for _ in range(60):
        atoms = model.propagate(atoms, rng)
    variance = model.stationary_variance
    stderr = variance * np.sqrt(2.0 / atoms.shape[0])
    assert np.all(np.abs(np.mean(atoms ** 2, axis=0) - variance)
                  < 3 * stderr)


# -- Navier-Stokes ------------------------------------------------------------

def test_forcing_set_checks():
    assert check_forcing_set(DEFAULT_FORCING, 5) == []
    even = ((2, 0), (-2, 0), (0, 2), (0, -2), (2, 2), (-2, -2))
    problems = check_forcing_set(even, 5)
    assert problems == ["Integer linear combinations of the forced modes "
                        "must generate Z^2"]
    assert any('symmetric' in p
               for p in check_forcing_set(((1, 0), (0, 1)), 5))
    assert any('zero mode' in p
               for p in check_forcing_set(((0, 0), (1, 0), (-1, 0)), 5))
    assert any('outside' in p
               for p in check_forcing_set(((9, 0), (-9, 0)), 5))
    assert check_forcing_set((), 5) == ["The forced set is empty"]
    with pytest.raises(ValueError, match='generate Z'):
        NSModel(forced=even)


@pytest.fixture(scope='module')
def ns():
    return NSModel()


def test_ns_state_is_real_and_divergence_free(ns):
    v = ns.sample_prior(stream(3), 1).atoms[0]
    v = ns.step(v, ns.draw_noise(stream(4)))
    assert_allclose(np.fft.ifft2(v).imag, 0.0, atol=1e-12)
    assert_allclose(ns.divergence_hat(v), 0.0, atol=1e-12)
    assert np.all(v[~ns.mask] == 0)


def test_ns_nonlinearity_conserves_energy_and_enstrophy(ns):
    v = ns.sample_prior(stream(5), 1).atoms[0]
    N = ns.nonlinear(v)
    scale = np.sum(np.abs(v) * np.abs(N))
    assert abs(np.sum(np.conj(v) * N).real) < 1e-10 * scale
    assert abs(np.sum(np.conj(v) * N * ns.inv_ksq).real) < 1e-10 * scale


def test_ns_interface(ns):
    cloud = ns.sample_prior(stream(6), 5)
    y = ns.observe(cloud.atoms[0], stream(7))
    assert y.shape == (4,)
    assert ns.obs_logpdf(cloud.atoms, y).shape == (5,)
    assert ns.propagate(cloud.atoms, stream(8)).shape == (5, 16, 16)
    with pytest.raises(ValueError):
        ns.step(cloud.atoms[0], np.zeros((1, 2, 2)))
    mode = ns.mode_state((1, 0), 2.0)
    assert_allclose(ns.physical(mode)[:, 0],
                    2.0 * np.cos(2 * np.pi * np.arange(16) / 16),
                    atol=1e-12)
    assert ns.energy_injection == 6.0


def test_ns_single_mode_decays_linearly(ns):
    v = ns.mode_state((1, 0), 2.0)
    v = ns.step(v, np.zeros((ns.n_inner, ns.n_pairs, 2)))
    expected = 2.0 * np.exp(-0.5 * 0.2) * np.cos(
        2 * np.pi * np.arange(16) / 16)
    assert_allclose(ns.physical(v)[:, 0], expected, atol=1e-6)


def test_ns_energy_balance(ns):
    cloud = ns.sample_prior(stream(9), 4000)
    rates = ns.dissipation(cloud.atoms)
    stderr = rates.std(ddof=1) / np.sqrt(rates.size)
    assert abs(rates.mean() - ns.energy_injection) < 3 * stderr


# -- spin ---------------------------------------------------------------------

def test_spin_rates():
    model = SpinModel(length=8)
    assert model.check_detailed_balance() < 1e-12
    assert model.check_attractive()
    assert model.gibbs_up(1, 1) == pytest.approx(model.p_up[2])
    assert model.window == (2, 3, 4, 5)
    with pytest.raises(ValueError):
        SpinModel(beta=-0.1)
    with pytest.raises(ValueError):
        SpinModel(length=2)


def test_spin_step_preserves_order():
    model = SpinModel(length=10)
    rng = np.random.default_rng(0)
    for _ in range(200):
        low = (rng.random(10) < 0.3).astype(np.int8)
        high = np.maximum(low, rng.random(10) < 0.5).astype(np.int8)
        clock = model.draw_noise(rng)
        assert np.all(spin_step(model, low, clock)
                      <= spin_step(model, high, clock))


def test_spin_step_counts_flips():
    model = SpinModel(length=6)
    s = np.zeros(6, dtype=np.int8)
    out, flips = spin_step(model, s, ([0, 0, 3], [0.0, 0.99, 0.0]),
                           count_flips=True)
    assert out.tolist() == [0, 0, 0, 1, 0, 0]
    assert flips.tolist() == [2, 0, 0, 1, 0, 0]


def test_spin_interface():
    model = SpinModel(length=8)
    assert np.all(model.sample_prior(stream(0), 3, -0.5).atoms == 0)
    assert np.all(model.sample_prior(stream(0), 3, 0.5).atoms == 1)
    cloud = model.sample_prior(stream(1), 20)
    moved = model.propagate(cloud.atoms, stream(2))
    assert moved.shape == (20, 8)
    assert set(np.unique(moved)) <= {0, 1}
    y = model.observe(cloud.atoms[0], stream(3))
    assert isinstance(y, int) and y >= 0
    assert model.obs_logpdf(cloud.atoms, y).shape == (20,)


# -- delay --------------------------------------------------------------------

def test_delay_deterministic_decay():
    model = DelayModel(b=0.0, sigma=0.0)
    x = model.step(model.constant_state(1.0), model.draw_noise(stream(0)))
    assert x.shape == (101,)
    assert x[-1] == pytest.approx((1 - 2.0 * 0.01) ** 100, rel=1e-12)


def test_delay_euler_error_is_first_order():
    errors = []
    for h in (0.01, 0.005):
        model = DelayModel(b=0.0, sigma=0.0, euler_step=h)
        x = model.step(model.constant_state(1.0), np.zeros(model.n_inner))
        errors.append(abs(x[-1] - np.exp(-2.0)))
        assert errors[-1] <= h
    assert errors[0] / errors[1] == pytest.approx(2.0, rel=0.05)


def test_delay_synchronous_coupling_contracts():
    model = DelayModel()
    assert dissipativity_constant(model) == pytest.approx(1.5)
    pair = synchronous_coupling_run(model, model.constant_state(-1.0),
                                    model.constant_state(1.0), 20, seed=0)
    assert pair.d_tilde[-1] < 1e-3 * pair.d_tilde[0]
    assert np.all(pair.d <= pair.d_tilde + 1e-12)


def test_delay_guards():
    with pytest.raises(NumericalBlowupError):
        DelayModel(guard=0.5).step(np.ones(101), np.zeros(100))
    with pytest.raises(ValueError):
        DelayModel().step(np.ones(5), np.zeros(100))
    with pytest.raises(ValueError):
        DelayModel(delay=0.015)


# -- fixtures and the model catalog -------------------------------------------

def test_fixture_catalog():
    flip = make_fixture('two_state_flip', p=0.25)
    assert flip.facts['tv_rate'] == 0.5
    assert make_fixture('product_flip', d=2).n_states == 4
    with pytest.raises(ValueError, match='known fixtures'):
        make_fixture('no_such_chain')
    with pytest.raises(ValueError):
        make_fixture('two_state_flip', p=1.5)


def test_finite_chain_model():
    model = FiniteChainModel(make_fixture('two_state_flip', p=0.25))
    assert model.step(np.array([0]), 0.7).tolist() == [0]
    assert model.step(np.array([0]), 0.8).tolist() == [1]
    moved = model.propagate(np.zeros((20000, 1)), stream(0))
    assert moved.mean() == pytest.approx(0.25, abs=0.02)


def test_embedded_hmm():
    model = EmbeddedHMM(mixing3_hmm())
    assert model.obs_logpdf(np.array([[0.0], [2.0]]), 0) == \
        pytest.approx(np.log([0.8, 0.2]))
    cloud = model.as_cloud(Categorical([0.2, 0.3, 0.5]))
    assert cloud.atoms[:, 0].tolist() == [0.0, 1.0, 2.0]
    assert cloud.weights.tolist() == [0.2, 0.3, 0.5]

    g = np.ones((2, 2, 2, 2))
    g[:, 0, :, 0] = g[:, 1, :, 1] = 2.0
    coupled = FiniteHMM(np.full((2, 2), 0.5), np.full((2, 2), 0.5), g)
    with pytest.raises(ValueError):
        EmbeddedHMM(coupled)


def test_make_model():
    heat = make_model('heat', {'modes': 4})
    assert heat.state_shape == (4,)
    ns = make_model('navier_stokes',
                    {'forced': [list(k) for k in DEFAULT_FORCING]})
    assert ns.forced == DEFAULT_FORCING
    with pytest.raises(ValueError, match='known models'):
        make_model('burgers')
    with pytest.raises(TypeError):
        make_model('heat', {'nodes': 4})

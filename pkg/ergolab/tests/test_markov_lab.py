import numpy as np
import pytest
from numpy.testing import assert_allclose

from ergolab.exceptions import (CapExceededError, DimensionError,
                                StationaryError)
from ergolab.markov_lab import (VERDICT_NEGATIVE, VERDICT_POSITIVE,
                                FiniteChain, Projection, beta_mixing_coeff,
                                communicating_classes, local_mixing_probe,
                                local_path_tv, local_path_tv_limit,
                                marginal_tv, path_tv_profile,
                                projected_path_law, stationary,
                                zero_two_probe)
from ergolab.measure_core import Categorical
from ergolab.models.fixtures import (FIXTURES, MIXING3_P0, make_fixture,
                                     periodic2, product_flip,
                                     two_state_flip)


def test_chain_validation():
    with pytest.raises(DimensionError):
        FiniteChain(np.ones((2, 3)) / 3)
    with pytest.raises(ValueError):
        FiniteChain([[0.5, 0.6], [0.5, 0.5]])
    with pytest.raises(ValueError):
        FiniteChain([[1.5, -0.5], [0.5, 0.5]])
    with pytest.raises(ValueError):
        FiniteChain([[0.0, 1.0], [1.0, 0.0]], Categorical([0.9, 0.1]))


def test_projection():
    assert Projection.identity(3).injective
    proj = Projection([0, 1, 1])
    assert proj.alphabet_size == 2
    assert not proj.injective
    assert proj.masks().tolist() == [[1, 0, 0], [0, 1, 1]]
    with pytest.raises(ValueError):
        Projection([0, 2], 2)
    with pytest.raises(ValueError):
        Projection([-1, 0])


def test_product_chain_layout():
    product = product_flip(3, 0.25)
    assert product.sizes == (2, 2, 2)
    assert product.n_states == 8
    assert product.state_index((1, 0, 1)) == 5
    assert product.coordinates[5].tolist() == [1, 0, 1]
    proj = product.projection([0])
    assert proj.map.tolist() == [0, 0, 0, 0, 1, 1, 1, 1]
    assert product.projection([]).alphabet_size == 1
    with pytest.raises(ValueError):
        product.projection([0, 0])
    with pytest.raises(ValueError):
        product.projection([3])
    assert_allclose(product.chain.P.sum(axis=1), 1.0)
    assert_allclose(product.chain.stationary.probs, 1 / 8)


def test_communicating_classes():
    chain = FiniteChain([[1.0, 0.0, 0.0],
                         [0.5, 0.0, 0.5],
                         [0.0, 0.5, 0.5]])
    classes, closed = communicating_classes(chain)
    assert sorted(classes) == [[0], [1, 2]]
    assert closed == [[0]]


def test_stationary():
    chain = FiniteChain(MIXING3_P0)
    lam = stationary(chain).probs
    assert_allclose(lam @ MIXING3_P0, lam, atol=1e-12)
    assert lam.sum() == pytest.approx(1.0)

    with pytest.raises(StationaryError) as exc:
        stationary(FiniteChain(np.eye(2)))
    assert sorted(exc.value.classes) == [[0], [1]]


def test_marginal_and_beta_on_flip():
    chain = two_state_flip(0.25)
    for n in range(8):
        assert marginal_tv(chain, 0, 1, n) == pytest.approx(2 * 0.5 ** n)
        assert beta_mixing_coeff(chain, n) == pytest.approx(0.5 ** n)


def test_beta_vanishes_for_identity_flip():
    chain = two_state_flip(0.5)
    assert beta_mixing_coeff(chain, 1) == pytest.approx(0.0, abs=1e-15)


def test_projected_path_law():
    chain = two_state_flip(0.25)
    proj = Projection.identity(2)
    law = projected_path_law(chain, 0, proj, 1, 0)
    assert law.probs[(0,)] == pytest.approx(0.75)
    assert law.probs[(1,)] == pytest.approx(0.25)

    law = projected_path_law(chain, Categorical.uniform(2), proj, 0, 2)
    assert law.length == 3
    assert sum(law.probs.values()) == pytest.approx(1.0)
    assert law.probs[(0, 0, 0)] == pytest.approx(0.5 * 0.75 * 0.75)

    # A constant projection makes every start look the same.
    flat = Projection([0, 0], 1)
    assert local_path_tv(periodic2(), 0, 1, flat, 0, 3) == 0.0


def test_path_tv_equals_marginal_tv_for_identity():
    chain = FiniteChain(MIXING3_P0)
    proj = Projection.identity(3)
    for n in range(4):
        profile = path_tv_profile(chain, 0, 2, proj, n, 3)
        assert_allclose(profile, marginal_tv(chain, 0, 2, n), atol=1e-12)


def test_local_path_tv_limit_settles():
    chain = two_state_flip(0.25)
    value, k = local_path_tv_limit(chain, 0, 1, Projection.identity(2), 3)
    assert value == pytest.approx(2 * 0.5 ** 3)
    assert k < 10


def test_enumeration_cap():
    with pytest.raises(CapExceededError):
        path_tv_profile(two_state_flip(), 0, 1, Projection.identity(2), 0,
                        20)


def test_zero_two_periodic_is_negative():
    report = zero_two_probe(periodic2(), Projection.identity(2), n_max=10,
                            k_max=3)
    assert report.verdict == VERDICT_NEGATIVE
    assert not report.positive
    assert report.witness_n is None
    assert_allclose(report.tv_trace, 2.0)
    assert report.pair_witness == {(0, 1): None, (1, 0): None}


def test_zero_two_flip_is_positive():
    report = zero_two_probe(two_state_flip(0.25), Projection.identity(2),
                            n_max=5, k_max=3, alpha=1.2)
    assert report.verdict == VERDICT_POSITIVE
    assert report.witness_n == 2
    assert report.pair_witness == {(0, 1): 2, (1, 0): 2}
    assert_allclose(report.tv_trace, 2 * 0.5 ** np.arange(6), atol=1e-12)


def test_zero_two_rejects_bad_alpha():
    with pytest.raises(ValueError):
        zero_two_probe(periodic2(), Projection.identity(2), 3, alpha=0.0)
    with pytest.raises(DimensionError):
        zero_two_probe(periodic2(), Projection.identity(3), 3)


def test_local_mixing_product_flip():
    product = product_flip(3, 0.25)
    report = local_mixing_probe(product, [0], n_max=5, k_max=2, alpha=1.2)
    assert report.verdict == VERDICT_POSITIVE
    assert report.coordinates == (0,)
    assert_allclose(report.probe.tv_trace, 2 * 0.5 ** np.arange(6),
                    atol=1e-12)
    assert report.full_tv_trace[0] == 2.0
    assert np.all(report.full_tv_trace >= report.probe.tv_trace - 1e-12)


def random_chain(rng, size):
    return FiniteChain(rng.dirichlet(np.ones(size), size=size))


def fixture_chains():
    chains = []
    for name in sorted(FIXTURES):
        fixture = make_fixture(name)
        if hasattr(fixture, 'P0'):
            chains.append((name, FiniteChain(fixture.P0)))
        elif hasattr(fixture, 'components'):
            chains.append((name, fixture.chain))
        else:
            chains.append((name, fixture))
    return chains


@pytest.mark.parametrize('name, chain', fixture_chains())
def test_beta_is_nonincreasing(name, chain):
    betas = [beta_mixing_coeff(chain, n) for n in range(12)]
    assert np.all(np.diff(betas) <= 1e-12)
    for n, beta in enumerate(betas):
        worst = max(marginal_tv(chain, x, x2, n)
                    for x in range(chain.n_states)
                    for x2 in range(chain.n_states))
        assert beta <= worst + 1e-12


def test_identity_path_tv_on_random_chains():
    rng = np.random.default_rng(41)
    for _ in range(20):
        chain = random_chain(rng, 4)
        x, x2 = rng.choice(4, size=2, replace=False)
        for n in range(3):
            profile = path_tv_profile(chain, x, x2, Projection.identity(4),
                                      n, 6)
            assert_allclose(profile, marginal_tv(chain, x, x2, n),
                            atol=1e-12)


def test_path_tv_monotone_in_window_and_time():
    rng = np.random.default_rng(43)
    proj = Projection([0, 0, 1, 1])
    for _ in range(20):
        chain = random_chain(rng, 4)
        x, x2 = 0, 2
        previous = None
        for n in range(4):
            profile = path_tv_profile(chain, x, x2, proj, n, 8)
            assert np.all(np.diff(profile) >= -1e-12)
            if previous is not None:
                # The window from n + 1 is a marginal of the one from n.
                assert np.all(profile[:-1] <= previous[1:] + 1e-12)
            previous = profile
        limits = [local_path_tv_limit(chain, x, x2, proj, n)[0]
                  for n in range(4)]
        assert np.all(np.diff(limits) <= 1e-4)

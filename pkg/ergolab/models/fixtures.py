# Licensed under a 3-clause BSD style license - see LICENSE.rst
"""
Named finite chains and hidden Markov models with known answers.

Every fixture carries a ``facts`` dict (stationary law, decay rates,
expected verdicts) that the test oracles read instead of recomputing.
"""
import numpy as np

from ..conditional_lab import FiniteHMM
from ..markov_lab import FiniteChain, ProductChain
from ..measure_core import AtomicMeasure, Categorical, MetricSpec
from ..rng import as_generator

__all__ = ['FIXTURES', 'make_fixture', 'two_state_flip', 'product_flip',
           'periodic2', 'mixing3_hmm', 'revealing_hmm', 'flat_hmm',
           'parity_degenerate_hmm', 'FiniteChainModel', 'EmbeddedHMM']

MIXING3_P0 = np.array([[0.5, 0.3, 0.2],
                       [0.2, 0.5, 0.3],
                       [0.3, 0.2, 0.5]])

MIXING3_PHI = np.array([[0.8, 0.2],
                        [0.5, 0.5],
                        [0.2, 0.8]])


def two_state_flip(p=0.25):
    """Stay with probability ``1 - p``, switch with probability ``p``."""
    if not 0 <= p <= 1:
        raise ValueError("Flip probability must lie in [0, 1]")
    P = np.array([[1 - p, p], [p, 1 - p]])
    rate = abs(1 - 2 * p)
    facts = {'stationary': (0.5, 0.5),
             'tv_rate': rate,
             'beta_rate': rate,
             'locally_ergodic': 0 < p < 1}
    return FiniteChain(P, Categorical.uniform(2), facts)


def product_flip(d=3, p=0.25):
    """``d`` independent flips, each coordinate a Harris chain."""
    components = [two_state_flip(p) for _ in range(d)]
    facts = {'coordinate_tv_rate': abs(1 - 2 * p),
             'locally_mixing': 0 < p < 1,
             'dimension': d}
    return ProductChain(components, facts)


def periodic2():
    """The deterministic 2-cycle."""
    facts = {'stationary': (0.5, 0.5), 'locally_ergodic': False}
    return FiniteChain(np.array([[0.0, 1.0], [1.0, 0.0]]),
                       Categorical.uniform(2), facts)


def mixing3_hmm():
    """Three hidden states, two symbols, everything strictly positive."""
    facts = {'nondegenerate': True, 'conditional_decay': True}
    return FiniteHMM.from_observation_matrix(MIXING3_P0, MIXING3_PHI, facts)


def revealing_hmm(eps=0.0):
    """Observations show the hidden state, blurred with probability ``eps``."""
    if not 0 <= eps <= 1:
        raise ValueError("eps must lie in [0, 1]")
    Phi = (1 - eps) * np.eye(3) + eps / 3.0
    facts = {'nondegenerate': eps > 0, 'revealing': eps == 0}
    return FiniteHMM.from_observation_matrix(MIXING3_P0, Phi, facts)


def flat_hmm():
    """Observations independent of the hidden chain."""
    facts = {'nondegenerate': True, 'flat': True,
             'tv_rate': float(np.sort(np.abs(np.linalg.eigvals(MIXING3_P0)))
                              [-2])}
    return FiniteHMM.from_observation_matrix(MIXING3_P0,
                                             np.full((3, 2), 0.5), facts)


def parity_degenerate_hmm():
    """
    ``Z_n = (xi_n, xi_{n-1})`` for fair coin flips ``xi`` and
    ``Y_n = xi_n XOR xi_{n-1}``.

    The observations pin down the coin sequence once ``xi_0`` is known, so
    starts that disagree on ``xi_0`` stay distinguishable forever.
    """
    states = [(a, b) for a in (0, 1) for b in (0, 1)]
    P0 = np.zeros((4, 4))
    Phi = np.zeros((4, 2))
    for i, (a, b) in enumerate(states):
        Phi[i, a ^ b] = 1.0
        for j, (a2, b2) in enumerate(states):
            if b2 == a:
                P0[i, j] = 0.5
    facts = {'nondegenerate': False, 'conditional_decay': False,
             'states': states}
    return FiniteHMM.from_observation_matrix(P0, Phi, facts)


FIXTURES = {
    'two_state_flip': two_state_flip,
    'product_flip': product_flip,
    'periodic2': periodic2,
    'mixing3_hmm': mixing3_hmm,
    'revealing_hmm': revealing_hmm,
    'flat_hmm': flat_hmm,
    'parity_degenerate_hmm': parity_degenerate_hmm,
}


def make_fixture(name, **params):
    """
    Build a catalog fixture by name.

    >>> make_fixture('two_state_flip', p=0.25).facts['tv_rate']
    0.5
    """
    try:
        factory = FIXTURES[name]
    except KeyError:
        raise ValueError("Unknown fixture {0!r}; known fixtures: {1}".format(
            name, ', '.join(sorted(FIXTURES)))) from None
    return factory(**params)


class FiniteChainModel:
    """
    A finite chain driven by one uniform per step, so two copies can share
    their noise.
    """

    name = 'finite_chain'
    stability_distance = 'tv'

    def __init__(self, chain):
        self.chain = chain
        cum = np.cumsum(chain.P, axis=1)
        cum[:, -1] = 1.0
        self._cum = cum
        self.metric = MetricSpec.hamming([1.0])
        self.coupling_metric = self.metric

    @property
    def state_shape(self):
        return (1,)

    def draw_noise(self, rng):
        return as_generator(rng).random()

    def step(self, x, noise):
        x = int(np.ravel(x)[0])
        return np.array([np.searchsorted(self._cum[x], noise, side='right')])

    def propagate(self, atoms, rng):
        rng = as_generator(rng)
        states = np.asarray(atoms).reshape(-1).astype(np.intp)
        u = rng.random(states.size)
        return (self._cum[states] <= u[:, None]).sum(axis=1)[:, None]


class EmbeddedHMM(FiniteChainModel):
    """
    A hidden Markov model in observation-matrix form, with hidden states
    embedded in the real line so the particle filter can run on it.
    """

    name = 'embedded_hmm'

    def __init__(self, hmm):
        joint = hmm.g * hmm.Q[None, :, None, :]
        Phi = joint[0, 0]
        if not np.allclose(joint, Phi[None, None], atol=1e-12):
            raise ValueError("Only observations drawn from the current "
                             "hidden state can be embedded")
        super().__init__(FiniteChain(hmm.P0))
        self.hmm = hmm
        self.Phi = Phi
        self.metric = MetricSpec.euclidean()
        self.coupling_metric = self.metric
        with np.errstate(divide='ignore'):
            self._log_phi = np.log(Phi)

    def step(self, x, noise):
        return super().step(x, noise).astype(float)

    def propagate(self, atoms, rng):
        return super().propagate(atoms, rng).astype(float)

    def observe(self, x, rng):
        x = int(np.ravel(x)[0])
        return int(as_generator(rng).choice(self.Phi.shape[1],
                                            p=self.Phi[x]))

    def obs_logpdf(self, atoms, y):
        states = np.asarray(atoms).reshape(-1).astype(np.intp)
        return self._log_phi[states, y]

    def sample_prior(self, rng, n, law=None):
        """Equally weighted cloud of ``n`` draws from ``law``."""
        law = law or Categorical.uniform(self.chain.n_states)
        states = law.sample(as_generator(rng), size=n)
        return AtomicMeasure.uniform(states[:, None].astype(float))

    def as_cloud(self, law):
        """An exact categorical law written as a weighted cloud."""
        return AtomicMeasure(np.arange(law.size, dtype=float)[:, None],
                             law.probs)

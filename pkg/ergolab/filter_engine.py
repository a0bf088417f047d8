# Licensed under a 3-clause BSD style license - see LICENSE.rst
"""
The nonlinear filter.

The filter at time ``n`` is the law of the hidden state given
``Y_0, ..., Y_n``. It starts from the prior (``pi_0 = mu``) and evolves by
``pi_{n+1} = U(pi_n, Y_n, Y_{n+1})``, exactly on finite models and with a
bootstrap particle filter elsewhere.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .conditional_lab import FiniteHMM, ObservationPath, simulate
from .conf import (BL_SUBSAMPLE, BRUTE_FORCE_MAX_PATHS, BRUTE_FORCE_MAX_STATES,
                   BRUTE_FORCE_MAX_T, PARTICLES, RESAMPLE_THRESHOLD,
                   STABILITY_RATIO, TV_MAX)
from .exceptions import CapExceededError, DegenerateModelError
from .measure_core import (AtomicMeasure, Categorical, bl_atomic,
                           stratified_subsample, systematic_resample,
                           tv_atomic, tv_categorical)
from .rng import as_generator, stream

__all__ = ['FilterState', 'ParticleConfig', 'StabilityCurve',
           'GammaAverages', 'filter_update_exact', 'filter_update_particle',
           'filter_run_exact', 'brute_force_filter', 'initial_filter',
           'effective_sample_size', 'local_window_tv', 'stability_run',
           'particle_fidelity', 'gamma_step', 'gamma_run',
           'gamma_ergodic_averages']

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FilterState:
    """A filter at step ``n``: a `Categorical` or a weighted cloud."""

    measure: object
    n: int = 0

    def __post_init__(self):
        if not isinstance(self.measure, (Categorical, AtomicMeasure)):
            raise TypeError("A filter is a Categorical or an AtomicMeasure")

    @property
    def exact(self):
        return isinstance(self.measure, Categorical)


@dataclass(frozen=True)
class ParticleConfig:
    """Particle count and resampling rule."""

    N: int = PARTICLES
    resample_threshold: float = RESAMPLE_THRESHOLD
    resampling: str = 'systematic'

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("A particle filter needs at least two particles")
        if not 0 < self.resample_threshold <= 1:
            raise ValueError("resample_threshold must lie in (0, 1]")
        if self.resampling != 'systematic':
            raise ValueError("Only systematic resampling is available")


@dataclass(frozen=True, eq=False)
class StabilityCurve:
    """
    Distance between two filters driven by the same observations.

    ``kind`` is ``'tv'`` or ``'bl'``; ``sigma_field`` names what the
    distance sees (``'full'`` or the observed window of sites).
    """

    n: np.ndarray
    distance: np.ndarray
    kind: str
    sigma_field: str = 'full'

    def __post_init__(self):
        n = np.asarray(self.n, dtype=int)
        distance = np.asarray(self.distance, dtype=float)
        if n.shape != distance.shape:
            raise ValueError("Steps and distances differ in length")
        if np.any(np.diff(n) <= 0):
            raise ValueError("Steps must be strictly increasing")
        if np.any(distance < 0) or np.any(distance > TV_MAX):
            raise ValueError("Distances must lie in [0, 2]")
        if self.kind not in ('tv', 'bl'):
            raise ValueError("Unknown distance kind {0!r}".format(self.kind))
        object.__setattr__(self, 'n', n)
        object.__setattr__(self, 'distance', distance)

    @property
    def rows(self):
        return [(int(n), float(d), self.kind, self.sigma_field)
                for n, d in zip(self.n, self.distance)]

    @property
    def ratio(self):
        """Final over initial distance (0 when both vanish)."""
        first, last = self.distance[0], self.distance[-1]
        if first == 0:
            return 0.0 if last == 0 else np.inf
        return float(last / first)

    def stable(self, threshold=STABILITY_RATIO):
        return self.ratio < threshold


def filter_update_exact(hmm, nu, y, y2):
    """
    ``U(nu, y, y2)(x') ~ sum_x nu(x) P0(x, x') g(x, y, x', y2)``.

    >>> from ergolab.models import make_fixture
    >>> hmm = make_fixture('flat_hmm')
    >>> nu = Categorical([1.0, 0.0, 0.0])
    >>> post = filter_update_exact(hmm, nu, 0, 1)
    >>> [round(p, 12) for p in post.probs.tolist()]
    [0.5, 0.3, 0.2]
    """
    weights = nu.probs @ hmm.transition_likelihood(y, y2)
    total = weights.sum()
    if not total > 0:
        raise DegenerateModelError(
            "Filter normalizer vanished for observations ({0}, {1})".format(
                y, y2))
    return Categorical(weights / total)


def filter_run_exact(hmm, mu, y):
    """Filters ``pi_0 = mu, ..., pi_T`` along the observations ``y``."""
    y = y.symbols if isinstance(y, ObservationPath) else np.asarray(y)
    filters = [mu]
    for t in range(1, len(y)):
        filters.append(filter_update_exact(hmm, filters[-1], y[t - 1], y[t]))
    return filters


def brute_force_filter(hmm, y, mu=None):
    """
    Filters by enumerating every hidden path; the reference for
    `filter_run_exact`.
    """
    y = y.symbols if isinstance(y, ObservationPath) else np.asarray(y)
    T, m = len(y) - 1, hmm.n_hidden
    if T > BRUTE_FORCE_MAX_T or m > BRUTE_FORCE_MAX_STATES:
        raise CapExceededError(
            "Brute force is limited to T <= {0} and {1} states".format(
                BRUTE_FORCE_MAX_T, BRUTE_FORCE_MAX_STATES))
    if m ** (T + 1) > BRUTE_FORCE_MAX_PATHS:
        raise CapExceededError("{0} hidden paths exceed the cap of {1}"
                               .format(m ** (T + 1), BRUTE_FORCE_MAX_PATHS))
    if mu is None:
        mu = Categorical(hmm.joint_stationary.sum(axis=1))
    paths = np.stack(np.unravel_index(np.arange(m ** (T + 1)),
                                      (m,) * (T + 1)), axis=1)
    weight = mu.probs[paths[:, 0]]
    posteriors = [Categorical.normalized(np.bincount(paths[:, 0], weight,
                                                     minlength=m))]
    for t in range(1, T + 1):
        L = hmm.transition_likelihood(y[t - 1], y[t])
        weight = weight * L[paths[:, t - 1], paths[:, t]]
        mass = np.bincount(paths[:, t], weight, minlength=m)
        if not mass.sum() > 0:
            raise DegenerateModelError("Observations have probability zero")
        posteriors.append(Categorical(mass / mass.sum()))
    return posteriors


def effective_sample_size(weights):
    weights = np.asarray(weights, dtype=float)
    return float(1.0 / np.sum(weights ** 2))


def filter_update_particle(model, cloud, y, cfg, seed):
    """
    One bootstrap step: propagate every atom, reweight by the observation
    density in log space and resample systematically when the effective
    sample size drops below ``cfg.resample_threshold * N``.
    """
    rng = as_generator(seed)
    atoms = model.propagate(cloud.atoms, rng)
    with np.errstate(divide='ignore'):
        log_w = np.log(cloud.weights) + model.obs_logpdf(atoms, y)
    if not np.any(np.isfinite(log_w)):
        raise DegenerateModelError("Every particle has zero likelihood for "
                                   "observation {0!r}".format(y))
    weights = np.exp(log_w - logsumexp(log_w))
    weights /= weights.sum()
    if effective_sample_size(weights) < cfg.resample_threshold * weights.size:
        index = systematic_resample(weights, cfg.N, rng)
        return AtomicMeasure.uniform(atoms[index])
    return AtomicMeasure(atoms, weights)


def _prior_cloud(model, prior, cfg, rng):
    if isinstance(prior, AtomicMeasure):
        return prior
    return model.sample_prior(rng, cfg.N, prior)


def initial_filter(model, prior, cfg=None, seed=0):
    """
    ``pi_0``: the prior itself on finite models, otherwise a cloud of
    ``cfg.N`` atoms drawn from it (``prior`` is then a cloud, a law or a
    shift understood by the model's ``sample_prior``).
    """
    if isinstance(model, FiniteHMM):
        if not isinstance(prior, Categorical):
            raise TypeError("Exact filters start from a Categorical prior")
        return FilterState(prior, 0)
    cfg = cfg or ParticleConfig()
    return FilterState(_prior_cloud(model, prior, cfg, as_generator(seed)), 0)


def local_window_tv(cloud, cloud_b, window):
    """Total variation between the laws of the coordinates in ``window``."""
    cols = list(window)
    return tv_atomic(AtomicMeasure(cloud.atoms[:, cols], cloud.weights),
                     AtomicMeasure(cloud_b.atoms[:, cols], cloud_b.weights))


def _cloud_distance(model, a, b, rng):
    if model.stability_distance == 'tv':
        return tv_atomic(a, b)
    if model.stability_distance == 'tv-window':
        return local_window_tv(a, b, model.window)
    return bl_atomic(stratified_subsample(a, BL_SUBSAMPLE, rng),
                     stratified_subsample(b, BL_SUBSAMPLE, rng),
                     model.metric)


def stability_run(model, mu, nu, gamma, T, cfg=None, seed=0, replica=0):
    """
    Run the filters started from ``mu`` and ``nu`` on one observation path
    drawn with hidden initial state ``gamma`` and record their distance.

    For a `FiniteHMM` the filters are exact and the distance is total
    variation. Otherwise ``gamma`` is an initial state (``None`` draws one
    from the model's prior) and the clouds are compared with the model's
    ``stability_distance``.
    """
    if isinstance(model, FiniteHMM):
        _, y = simulate(model, T, stream(seed, replica, 'signal'), gamma)
        pa = filter_run_exact(model, mu, y)
        pb = filter_run_exact(model, nu, y)
        distance = [tv_categorical(a, b) for a, b in zip(pa, pb)]
        return StabilityCurve(np.arange(T + 1), distance, 'tv')

    cfg = cfg or ParticleConfig()
    signal = stream(seed, replica, 'signal')
    observations = stream(seed, replica, 'observations')
    subsample = stream(seed, replica, 'subsample')
    filter_a = stream(seed, replica, 'filter-mu')
    filter_b = stream(seed, replica, 'filter-nu')
    x = gamma
    if x is None:
        x = model.sample_prior(signal, 1).atoms[0]
    a = _prior_cloud(model, mu, cfg, stream(seed, replica, 'prior-mu'))
    b = _prior_cloud(model, nu, cfg, stream(seed, replica, 'prior-nu'))
    distance = [_cloud_distance(model, a, b, subsample)]
    for n in range(1, T + 1):
        x = model.step(x, model.draw_noise(signal))
        y = model.observe(x, observations)
        a = filter_update_particle(model, a, y, cfg, filter_a)
        b = filter_update_particle(model, b, y, cfg, filter_b)
        distance.append(_cloud_distance(model, a, b, subsample))
        log.debug('%s stability step %d: %.4g', model.name, n, distance[-1])
    kind = 'bl' if model.stability_distance == 'bl' else 'tv'
    field = 'full'
    if model.stability_distance == 'tv-window':
        field = 'window:' + ','.join(map(str, model.window))
    return StabilityCurve(np.arange(T + 1), distance, kind, field)


def particle_fidelity(embedded, mu, T, cfg=None, seed=0, replica=0):
    """
    Total variation between the particle filter and the exact filter of an
    `~ergolab.models.EmbeddedHMM`, step by step along one simulated path.
    """
    cfg = cfg or ParticleConfig()
    hmm = embedded.hmm
    _, y = simulate(hmm, T, stream(seed, replica, 'signal'))
    exact = filter_run_exact(hmm, mu, y)
    cloud = _prior_cloud(embedded, mu, cfg, stream(seed, replica, 'prior-mu'))
    rng = stream(seed, replica, 'filter-mu')
    errors = [tv_atomic(cloud, embedded.as_cloud(exact[0]))]
    for t in range(1, T + 1):
        cloud = filter_update_particle(embedded, cloud, y[t], cfg, rng)
        errors.append(tv_atomic(cloud, embedded.as_cloud(exact[t])))
    return np.array(errors)


def gamma_step(hmm, state, seed):
    """
    One step of the filter chain: draw ``(x', y')`` from the predictive
    law given ``(nu, y)`` and return ``(U(nu, y, y'), y')``.
    """
    nu, y = state
    rng = as_generator(seed)
    x = nu.sample(rng)
    row = hmm.joint_kernel[x * hmm.n_symbols + y]
    y2 = int(rng.choice(row.size, p=row)) % hmm.n_symbols
    return filter_update_exact(hmm, nu, y, y2), y2


def gamma_run(hmm, nu0, y0, n_steps, seed):
    """
    ``n_steps`` steps of the filter chain from ``(nu0, y0)``.

    Returns the filters as an ``(n_steps + 1, m)`` array and the
    observations.
    """
    rng = as_generator(seed)
    m, s = hmm.n_hidden, hmm.n_symbols
    likelihood = np.array([[hmm.transition_likelihood(a, b)
                            for b in range(s)] for a in range(s)])
    cum = np.cumsum(hmm.joint_kernel, axis=1)
    cum[:, -1] = 1.0
    u = rng.random((n_steps, 2))
    filters = np.empty((n_steps + 1, m))
    ys = np.empty(n_steps + 1, dtype=np.intp)
    filters[0], ys[0] = nu0.probs, y0
    nu, y = nu0.probs, int(y0)
    for t in range(n_steps):
        c = np.cumsum(nu)
        x = min(int(np.searchsorted(c, u[t, 0] * c[-1], side='right')),
                m - 1)
        y2 = int(np.searchsorted(cum[x * s + y], u[t, 1], side='right')) % s
        nu = nu @ likelihood[y, y2]
        total = nu.sum()
        if not total > 0:
            raise DegenerateModelError("Filter normalizer vanished")
        nu = nu / total
        y = y2
        filters[t + 1], ys[t + 1] = nu, y
    return filters, ys


@dataclass(frozen=True, eq=False)
class GammaAverages:
    """
    Time averages along a filter chain with batch-means standard errors.

    ``moments`` are the averages of ``sum_x x nu(x)`` and
    ``sum_x x^2 nu(x)``; ``y_freq`` the observation frequencies.
    """

    moments: np.ndarray
    moments_stderr: np.ndarray
    y_freq: np.ndarray
    y_stderr: np.ndarray

    def agrees_with(self, other, sigmas=3.0):
        spread = np.sqrt(self.moments_stderr ** 2 + other.moments_stderr ** 2)
        return bool(np.all(np.abs(self.moments - other.moments)
                           <= sigmas * spread))


def _batch_means(series, batches):
    usable = (series.shape[0] // batches) * batches
    means = series[:usable].reshape(batches, -1, *series.shape[1:]).mean(1)
    return means.mean(axis=0), means.std(axis=0, ddof=1) / np.sqrt(batches)


def gamma_ergodic_averages(hmm, nu0, y0, n_steps, seed, batches=20,
                           burn_in=0):
    """Batch-means time averages of filter moments and observations."""
    filters, ys = gamma_run(hmm, nu0, y0, n_steps, seed)
    filters, ys = filters[burn_in + 1:], ys[burn_in + 1:]
    states = np.arange(hmm.n_hidden, dtype=float)
    moments = np.stack([filters @ states, filters @ states ** 2], axis=1)
    onehot = np.eye(hmm.n_symbols)[ys]
    mean, err = _batch_means(moments, batches)
    freq, freq_err = _batch_means(onehot, batches)
    return GammaAverages(mean, err, freq, freq_err)

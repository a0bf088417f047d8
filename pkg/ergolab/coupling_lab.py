# Licensed under a 3-clause BSD style license - see LICENSE.rst
"""
Couplings of two copies of a model and the statistics read off them.

A coupling run keeps both trajectories together with the per-step
distances ``d`` and ``d~`` of the model. A run counts as a success when the
tail sum ``sum_{n > T/2} d~_n^2`` stays below ``epsilon``, the finite-run
stand-in for square summability.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from .conf import COUPLING_EPSILON, COUPLING_HORIZON
from .exceptions import CouplingOrderError
from .measure_core import MetricSpec
from .rng import as_generator, stream

__all__ = ['CoupledPair', 'CouplingReport', 'DecayFit', 'HellingerReport',
           'trajectory', 'synchronous_coupling_run',
           'independent_coupling_run', 'monotone_coupling_run', 'COUPLINGS',
           'alpha_estimate', 'wilson_interval', 'fit_decay_rate',
           'disagreement_decay', 'hellinger_lipschitz_check',
           'hellinger_gap_quadrature', 'sample_pairs']

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CoupledPair:
    """Two trajectories of equal length and their per-step distances."""

    x: np.ndarray
    xb: np.ndarray
    d: np.ndarray
    d_tilde: np.ndarray
    metric: MetricSpec
    coupling_metric: MetricSpec
    events: int = 0

    def __post_init__(self):
        if self.x.shape != self.xb.shape:
            raise ValueError("Coupled trajectories differ in shape")
        if np.any(self.d < 0) or np.any(
                self.d > self.d_tilde * (1 + 1e-12) + 1e-12):
            raise ValueError("Distances must satisfy 0 <= d <= d~")

    @property
    def T(self):
        return self.d.size - 1

    def tail_sum(self):
        """``sum_{n > T/2} d~_n^2``."""
        return float(np.sum(self.d_tilde[self.T // 2 + 1:] ** 2))

    def disagreements(self):
        """Number of differing coordinates at every step."""
        diff = self.x != self.xb
        return diff.reshape(diff.shape[0], -1).sum(axis=1)


def _noise_size(noise):
    if isinstance(noise, tuple):
        return len(noise[0])
    return 0


def _run(model, x0, x0b, T, rng, rng_b=None, ordered=False):
    xs = [np.asarray(x0)]
    xbs = [np.asarray(x0b)]
    events = 0
    for n in range(T):
        noise = model.draw_noise(rng)
        noise_b = noise if rng_b is None else model.draw_noise(rng_b)
        events += _noise_size(noise)
        if ordered and hasattr(model, 'pair_step'):
            x, xb, violations = model.pair_step(xs[-1], xbs[-1], noise)
        else:
            x, xb = model.step(xs[-1], noise), model.step(xbs[-1], noise_b)
            violations = int(np.any(x > xb))
        if ordered and violations:
            raise CouplingOrderError(
                "Monotone coupling lost its order {0} time(s) during step "
                "{1}".format(violations, n + 1))
        xs.append(x)
        xbs.append(xb)
    x, xb = np.stack(xs), np.stack(xbs)
    return CoupledPair(x, xb, model.metric.paired(x, xb),
                       model.coupling_metric.paired(x, xb),
                       model.metric, model.coupling_metric, events)


def trajectory(model, x0, T, seed, replica=0):
    """One path of ``model`` driven by the stream a synchronous run uses."""
    rng = _stream(seed, replica, 'noise')
    xs = [np.asarray(x0)]
    for _ in range(T):
        xs.append(model.step(xs[-1], model.draw_noise(rng)))
    return np.stack(xs)


def _stream(seed, replica, role):
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(seed, replica, role)


def synchronous_coupling_run(model, x0, x0b, T, seed, replica=0):
    """Both copies driven by the identical noise."""
    return _run(model, x0, x0b, T, _stream(seed, replica, 'noise'))


def independent_coupling_run(model, x0, x0b, T, seed, replica=0):
    """Copies driven by independent streams."""
    return _run(model, x0, x0b, T, stream(seed, replica, 'leg-a'),
                stream(seed, replica, 'leg-b'))


def monotone_coupling_run(model, x0, x0b, T, seed, replica=0):
    """
    Attractive spin dynamics refreshed with shared ``(site, u)`` events;
    ``x0 <= x0b`` is kept for every event and a violation raises
    `~ergolab.exceptions.CouplingOrderError`.
    """
    if np.any(np.asarray(x0) > np.asarray(x0b)):
        raise ValueError("A monotone coupling needs x0 <= x0b")
    return _run(model, x0, x0b, T, _stream(seed, replica, 'noise'),
                ordered=True)


COUPLINGS = {
    'synchronous': synchronous_coupling_run,
    'independent': independent_coupling_run,
    'monotone': monotone_coupling_run,
}


def wilson_interval(successes, n, confidence=0.95):
    """Wilson score interval for a binomial proportion."""
    if n == 0:
        return 0.0, 1.0
    ci = stats.binomtest(int(successes), int(n)).proportion_ci(
        confidence_level=confidence, method='wilson')
    return float(ci.low), float(ci.high)


@dataclass(frozen=True, eq=False)
class CouplingReport:
    """
    Success counts of a coupling over initial pairs and replicas.

    ``alpha_hat`` is the smallest per-pair success fraction and
    ``successes`` belongs to that pair; ``tail_sums`` has one row per pair.
    """

    replicas: int
    successes: int
    alpha_hat: float
    tail_sums: np.ndarray
    pair_alpha: np.ndarray
    interval: tuple
    epsilon: float
    horizon: int
    alpha_doubled: float = None
    tail_sums_doubled: np.ndarray = None

    def __post_init__(self):
        if not 0 <= self.alpha_hat <= 1:
            raise ValueError("alpha_hat must lie in [0, 1]")


def alpha_estimate(model, coupling, init_pairs, replicas,
                   T=COUPLING_HORIZON, epsilon=COUPLING_EPSILON, seed=0,
                   check_doubling=False, executor=None):
    """
    Estimate the probability that a coupling brings the copies together.

    Parameters
    ----------
    model
        Any model with ``draw_noise``/``step``.
    coupling : str or callable
        A key of `COUPLINGS` or a function with their signature.
    init_pairs : sequence of (x0, x0b)
    replicas : int
        Runs per pair.
    T, epsilon
        Horizon and tail-sum threshold.
    check_doubling : bool
        Also rerun at ``2 T`` and report that estimate.
    executor : `concurrent.futures.Executor`, optional
        Runs are mapped through it in order.
    """
    run = COUPLINGS[coupling] if isinstance(coupling, str) else coupling
    init_pairs = list(init_pairs)
    if not init_pairs or replicas < 1:
        raise ValueError("alpha_estimate needs initial pairs and replicas")
    mapper = executor.map if executor is not None else map

    def tails(horizon):
        jobs = [(p, r) for p in range(len(init_pairs))
                for r in range(replicas)]

        def job(item):
            p, r = item
            x0, x0b = init_pairs[p]
            return run(model, x0, x0b, horizon, seed,
                       p * replicas + r).tail_sum()

        return np.array(list(mapper(job, jobs))).reshape(len(init_pairs),
                                                          replicas)

    tail_sums = tails(T)
    wins = (tail_sums < epsilon).sum(axis=1)
    worst = int(np.argmin(wins))
    doubled = tails_doubled = None
    if check_doubling:
        tails_doubled = tails(2 * T)
        doubled = float((tails_doubled < epsilon).sum(axis=1).min()
                        / replicas)
    report = CouplingReport(replicas, int(wins[worst]),
                            float(wins[worst] / replicas), tail_sums,
                            wins / replicas,
                            wilson_interval(wins[worst], replicas),
                            epsilon, T, doubled, tails_doubled)
    log.info('%s coupling: alpha_hat %.3f over %d pairs', model.name,
             report.alpha_hat, len(init_pairs))
    return report


@dataclass(frozen=True, eq=False)
class DecayFit:
    """Exponential rate fitted to a decreasing curve."""

    rate: float
    interval: tuple
    intercept: float
    points: int

    @property
    def excludes_zero(self):
        return self.interval[0] > 0 or self.interval[1] < 0


def fit_decay_rate(times, values, confidence=0.95):
    """
    Regress ``log(values)`` on ``times``; the rate is minus the slope and
    the interval uses Student's t with ``n - 2`` degrees of freedom.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = values > 0
    if keep.sum() < 3:
        raise ValueError("At least three positive values are needed")
    fit = stats.linregress(times[keep], np.log(values[keep]))
    half = stats.t.ppf(0.5 + confidence / 2, keep.sum() - 2) * fit.stderr
    rate = -fit.slope
    return DecayFit(float(rate), (float(rate - half), float(rate + half)),
                    float(fit.intercept), int(keep.sum()))


def disagreement_decay(model, x0, x0b, T, replicas, seed):
    """
    Mean number of disagreeing sites under the monotone coupling and its
    fitted decay rate (time measured in model time units).
    """
    counts = np.array([monotone_coupling_run(model, x0, x0b, T, seed,
                                             r).disagreements()
                       for r in range(replicas)])
    mean = counts.mean(axis=0)
    times = np.arange(T + 1) * model.delta
    return mean, fit_decay_rate(times, mean)


def sample_pairs(model, n, seed):
    """``n`` independent pairs of states drawn from the model's prior."""
    rng = as_generator(seed)
    atoms = model.sample_prior(rng, 2 * n).atoms
    return list(zip(atoms[:n], atoms[n:]))


@dataclass(frozen=True, eq=False)
class HellingerReport:
    """
    Largest ratio of the squared Hellinger gap of the observation laws to
    ``d~(x, x')^2`` over the sampled pairs.
    """

    max_ratio: float
    C_hat: float
    max_gap: float
    n_pairs: int
    gaps: np.ndarray
    distances: np.ndarray
    bound: float = None

    @property
    def within_bound(self):
        return self.bound is None or self.C_hat <= self.bound

    @property
    def finite(self):
        return bool(np.isfinite(self.C_hat))


def hellinger_lipschitz_check(model, pairs, metric=None):
    """Check the Hellinger-Lipschitz property of the observations."""
    gap_of = getattr(model, 'hellinger_gap', None)
    if gap_of is None:
        raise ValueError("Model {0!r} has no closed-form Hellinger gap"
                         .format(getattr(model, 'name', model)))
    metric = metric or model.coupling_metric
    ratios, gaps, dists = [], [], []
    for x, xb in pairs:
        gap = float(np.asarray(gap_of(x, xb)))
        dist = metric.distance(x, xb)
        gaps.append(gap)
        dists.append(dist)
        if dist > 0:
            ratios.append(gap / dist ** 2)
        elif gap > 0:
            ratios.append(np.inf)
    max_ratio = float(max(ratios, default=0.0))
    return HellingerReport(max_ratio, max_ratio, float(max(gaps, default=0)),
                           len(gaps), np.array(gaps), np.array(dists),
                           getattr(model, 'hellinger_constant', None))


def hellinger_gap_quadrature(mean, mean_b, var):
    """
    Squared Hellinger distance between two Gaussians with independent
    coordinates of variance ``var``, integrating each coordinate's
    affinity numerically.
    """
    sd = np.sqrt(var)
    affinity = 1.0
    for a, b in zip(np.ravel(mean), np.ravel(mean_b)):
        value, _ = integrate.quad(
            lambda u, a=a, b=b: np.sqrt(stats.norm.pdf(u, a, sd)
                                        * stats.norm.pdf(u, b, sd)),
            -np.inf, np.inf, epsabs=1e-13, epsrel=1e-12)
        affinity *= value
    return 2.0 - 2.0 * affinity

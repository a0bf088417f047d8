# Licensed under a 3-clause BSD style license - see LICENSE.rst
"""
The experiment catalog.

Each experiment kind declares the targets it runs on, its parameter table,
a ``run`` function producing `~ergolab.runner.records.ResultRecord` lists
and a ``summarize`` function that derives every reported verdict from
those records (plus the configuration) alone.
"""
import json
import logging
from dataclasses import dataclass, field
from itertools import combinations, permutations

import numpy as np

from ..conditional_lab import (FiniteHMM, inheritance_experiment,
                               truncation_stability, window_margin)
from ..coupling_lab import (COUPLINGS, alpha_estimate, disagreement_decay,
                            fit_decay_rate, hellinger_gap_quadrature,
                            hellinger_lipschitz_check, sample_pairs,
                            wilson_interval)
from ..filter_engine import (ParticleConfig, gamma_ergodic_averages,
                             stability_run)
from ..markov_lab import (VERDICT_NEGATIVE, VERDICT_POSITIVE, FiniteChain,
                          ProductChain, Projection, beta_mixing_coeff,
                          local_mixing_probe, zero_two_probe)
from ..measure_core import Categorical
from ..models import (FIXTURES, MODELS, FiniteChainModel, NSModel, SpinModel,
                      make_fixture, make_model)
from ..rng import stream
from .records import ResultRecord, by_replica, series

__all__ = ['Parameter', 'Experiment', 'EXPERIMENTS', 'build_target',
           'target_category', 'run_experiment', 'summarize', 'catalog',
           'list_experiments']

log = logging.getLogger(__name__)

CONCLUSIONS = {VERDICT_POSITIVE: 'locally ergodic',
               VERDICT_NEGATIVE: 'not locally ergodic'}


@dataclass(frozen=True)
class Parameter:
    """
    One entry of an experiment's ``[parameters]`` table.

    ``conf`` names a constant of the pinned defaults module that supplies
    the default instead of ``default``.
    """

    type: str
    default: object = None
    help: str = ''
    conf: str = None
    choices: tuple = None

    def resolve_default(self, defaults):
        if self.conf is not None:
            return defaults[self.conf]
        return self.default


@dataclass(frozen=True)
class Experiment:
    kind: str
    description: str
    targets: tuple
    run: object
    summarize: object
    parameters: dict = field(default_factory=dict)
    horizon: int = 100
    plot_metrics: tuple = ()
    check: object = None
    horizon_conf: str = None

    def default_horizon(self, defaults):
        if self.horizon_conf is not None:
            return defaults[self.horizon_conf]
        return self.horizon


def target_category(target):
    if isinstance(target, FiniteHMM):
        return 'hmm'
    if isinstance(target, ProductChain):
        return 'product'
    if isinstance(target, FiniteChain):
        return 'chain'
    return 'model'


def build_target(source, name, params):
    """Instantiate a fixture or a continuous model."""
    if source == 'fixture':
        return make_fixture(name, **params)
    return make_model(name, params)


def _record(cfg, replica, step, metric, value, metadata=''):
    return ResultRecord(cfg.name, replica, step, metric, value, metadata)


def _map(executor, func, items):
    if executor is None:
        return list(map(func, items))
    return list(executor.map(func, items))


def _values(records, metric):
    return [r.value for r in records if r.metric == metric]


# -- zero-two and local mixing ------------------------------------------------

def _chain_and_projection(target, coordinates):
    if isinstance(target, ProductChain):
        return target.chain, target.projection(tuple(coordinates or (0,)))
    return target, Projection.identity(target.n_states)


def _witness_records(cfg, report):
    out = []
    for (x, x2), n in sorted(report.pair_witness.items()):
        out.append(_record(cfg, 0, 0, 'pair_witness', -1 if n is None else n,
                           'pair={0}-{1}'.format(x, x2)))
    return out


def _run_zero_two(cfg, target, executor):
    p = cfg.parameters
    chain, proj = _chain_and_projection(target, p['coordinates'])
    report = zero_two_probe(chain, proj, p['n_max'], p['k_max'], p['alpha'])
    records = [_record(cfg, 0, n, 'tv', v)
               for n, v in enumerate(report.tv_trace)]
    return records + _witness_records(cfg, report)


def _dichotomy_summary(records, cfg):
    witness = _values(records, 'pair_witness')
    positive = all(w >= 0 for w in witness)
    verdict = VERDICT_POSITIVE if positive else VERDICT_NEGATIVE
    _, trace = series(records, 'tv')
    alpha = cfg.parameters['alpha']
    return {'verdict': verdict,
            'conclusion': CONCLUSIONS[verdict],
            'witness_n': int(max(witness, default=0)) if positive else None,
            'alpha': alpha,
            'threshold': 2.0 - alpha,
            'initial_tv': trace[0],
            'final_tv': trace[-1]}


def _check_enumeration_size(cfg, target):
    p = cfg.parameters
    if target_category(target) not in ('chain', 'product'):
        return []
    if isinstance(target, ProductChain):
        coordinates = tuple(p['coordinates'] or (0,))
        if any(not 0 <= j < len(target.sizes) for j in coordinates):
            return [('parameters.coordinates',
                     "Coordinates must lie in [0, {0})".format(
                         len(target.sizes)))]
        alphabet = int(np.prod([target.sizes[j] for j in coordinates]))
    else:
        if p['coordinates']:
            return [('parameters.coordinates',
                     "coordinates only apply to product chains")]
        alphabet = target.n_states
    count = alphabet ** (p['k_max'] + 1)
    cap = cfg.defaults_table['PATH_ENUMERATION_CAP']
    if count > cap:
        return [('parameters.k_max',
                 "{0} symbol strings of length {1} exceed the enumeration "
                 "cap of {2}".format(count, p['k_max'] + 1, cap))]
    if not 0 < p['alpha'] <= 2:
        return [('parameters.alpha', "alpha must lie in (0, 2]")]
    return []


def _run_local_mixing(cfg, target, executor):
    p = cfg.parameters
    report = local_mixing_probe(target, tuple(p['coordinates']), p['n_max'],
                                p['k_max'], p['alpha'])
    records = [_record(cfg, 0, n, 'tv', v)
               for n, v in enumerate(report.probe.tv_trace)]
    records += [_record(cfg, 0, n, 'full_tv', v)
                for n, v in enumerate(report.full_tv_trace)]
    return records + _witness_records(cfg, report.probe)


def _local_mixing_summary(records, cfg):
    summary = _dichotomy_summary(records, cfg)
    _, full = series(records, 'full_tv')
    summary['coordinates'] = list(cfg.parameters['coordinates'])
    summary['final_full_tv'] = full[-1]
    return summary


# -- absolute regularity ------------------------------------------------------

def _beta_chain(target):
    if isinstance(target, FiniteHMM):
        return target.joint_chain
    if isinstance(target, ProductChain):
        return target.chain
    return target


def _run_beta_decay(cfg, target, executor):
    chain = _beta_chain(target)
    return [_record(cfg, 0, n, 'beta', beta_mixing_coeff(chain, n))
            for n in range(cfg.parameters['n_max'] + 1)]


def _rate_summary(times, values):
    try:
        fit = fit_decay_rate(times, values)
    except ValueError:
        return None, None
    return fit.rate, list(fit.interval)


def _beta_summary(records, cfg):
    n, beta = series(records, 'beta')
    rate, interval = _rate_summary(n[1:], beta[1:])
    return {'monotone': bool(np.all(np.diff(beta) <= 1e-12)),
            'final_beta': beta[-1],
            'rate': rate,
            'rate_interval': interval}


# -- conditional inheritance --------------------------------------------------

def _run_inheritance(cfg, target, executor):
    p = cfg.parameters
    table = inheritance_experiment(target, cfg.replicas, cfg.horizon,
                                   p['lags'], cfg.seed)
    records = []
    for lag, worst, mean in zip(table.lags, table.max_tv, table.mean_tv):
        records.append(_record(cfg, 0, lag, 'max_tv', worst))
        records.append(_record(cfg, 0, lag, 'mean_tv', mean))
    records.append(_record(cfg, 0, table.lags[-1], 'joint_beta',
                           table.joint_beta))
    records.append(_record(cfg, 0, 0, 'nondegenerate',
                           float(table.nondegenerate)))
    if p['truncation']:
        change = truncation_stability(target, cfg.horizon, table.lags,
                                      cfg.seed)
        records.append(_record(cfg, 0, 0, 'truncation_change', change))
    return records


def _inheritance_summary(records, cfg):
    lags, worst = series(records, 'max_tv')
    tolerance = cfg.defaults_table['INHERITANCE_TOL']
    summary = {'lags': lags.tolist(),
               'max_tv': worst.tolist(),
               'paths': cfg.replicas,
               'tolerance': tolerance,
               'decays': bool(worst[-1] < tolerance),
               'monotone': bool(np.all(np.diff(worst) <= 1e-12)),
               'nondegenerate': bool(_values(records, 'nondegenerate')[0]),
               'joint_beta': _values(records, 'joint_beta')[0]}
    change = _values(records, 'truncation_change')
    if change:
        summary['truncation_change'] = change[0]
        summary['truncation_stable'] = bool(
            change[0] <= cfg.defaults_table['TRUNCATION_TOL'])
    return summary


def _check_inheritance(cfg, target):
    T = cfg.horizon
    bad = [n for n in cfg.parameters['lags']
           if n < 0 or n > T - window_margin(T)]
    if bad:
        return [('parameters.lags',
                 "Lags {0} leave less than the margin {1} before the end of "
                 "the window T = {2}".format(bad, window_margin(T), T))]
    if not cfg.parameters['lags']:
        return [('parameters.lags', "At least one lag is required")]
    return []


# -- filter stability ---------------------------------------------------------

def _law(values, size, default_index):
    if values is None:
        return Categorical.point(size, default_index)
    return Categorical(np.asarray(values, dtype=float))


def _shift(model, value):
    if isinstance(model, NSModel):
        return model.mode_state((1, 0), value)
    return float(value)


def _filter_inputs(cfg, target):
    p = cfg.parameters
    if isinstance(target, FiniteHMM):
        m = target.n_hidden
        gamma = None if p['gamma'] is None else _law(p['gamma'], m, 0)
        return _law(p['mu'], m, 0), _law(p['nu'], m, m - 1), gamma, None
    particles = ParticleConfig(p['particles'], p['resample_threshold'])
    return (_shift(target, p['mu_shift']), _shift(target, p['nu_shift']),
            None, particles)


def _run_filter_stability(cfg, target, executor):
    mu, nu, gamma, particles = _filter_inputs(cfg, target)

    def replica(r):
        curve = stability_run(target, mu, nu, gamma, cfg.horizon, particles,
                              cfg.seed, r)
        return [_record(cfg, r, n, curve.kind, d, curve.sigma_field)
                for n, d in zip(curve.n, curve.distance)]

    return [rec for block in _map(executor, replica, range(cfg.replicas))
            for rec in block]


def _filter_summary(records, cfg):
    metric = 'tv' if any(r.metric == 'tv' for r in records) else 'bl'
    curves = by_replica(records, metric)
    matrix = np.array([values for _, values in curves.values()])
    median = np.median(matrix, axis=0)
    first, last = median[0], median[-1]
    if first == 0:
        ratio = 0.0 if last == 0 else float('inf')
    else:
        ratio = float(last / first)
    threshold = cfg.parameters['threshold']
    return {'distance': metric,
            'replicas': len(curves),
            'median_initial': first,
            'median_final': last,
            'ratio': ratio,
            'threshold': threshold,
            'stable': bool(ratio < threshold),
            'decreasing': bool(last < first),
            'decreasing_steps': float(np.mean(np.diff(median) <= 0)),
            'max_final': float(matrix[:, -1].max())}


def _check_filter(cfg, target):
    p = cfg.parameters
    problems = []
    if isinstance(target, FiniteHMM):
        for key in ('mu', 'nu', 'gamma'):
            value = p[key]
            if value is None:
                continue
            if len(value) != target.n_hidden:
                problems.append(('parameters.' + key,
                                 "{0} needs {1} probabilities".format(
                                     key, target.n_hidden)))
            elif abs(sum(value) - 1) > 1e-9 or min(value) < 0:
                problems.append(('parameters.' + key,
                                 "{0} must be a probability vector".format(
                                     key)))
    else:
        if p['particles'] < 2:
            problems.append(('parameters.particles',
                             "A particle filter needs at least two "
                             "particles"))
        if not 0 < p['resample_threshold'] <= 1:
            problems.append(('parameters.resample_threshold',
                             "resample_threshold must lie in (0, 1]"))
    return problems


# -- couplings ----------------------------------------------------------------

def _coupling_model(target):
    if isinstance(target, FiniteChain):
        return FiniteChainModel(target)
    return target


def _initial_pairs(cfg, model):
    p = cfg.parameters
    n = p['pairs']
    if isinstance(model, FiniteChainModel):
        pairs = list(permutations(range(model.chain.n_states), 2))[:n]
        return [(np.array([a]), np.array([b])) for a, b in pairs]
    rng = stream(cfg.seed, 0, 'pairs')
    if p['coupling'] == 'monotone':
        L = model.length
        pairs = [(np.zeros(L, dtype=np.int8), np.ones(L, dtype=np.int8))]
        for a, b in sample_pairs(model, n - 1, rng):
            pairs.append((np.minimum(a, b), np.maximum(a, b)))
        return pairs
    return sample_pairs(model, n, rng)


def _run_coupling(cfg, target, executor):
    p = cfg.parameters
    model = _coupling_model(target)
    pairs = _initial_pairs(cfg, model)
    report = alpha_estimate(model, p['coupling'], pairs, cfg.replicas,
                            cfg.horizon, p['epsilon'], cfg.seed,
                            p['check_doubling'], executor)
    records = []
    for name, tails in (('tail_sum', report.tail_sums),
                        ('tail_sum_doubled', report.tail_sums_doubled)):
        if tails is None:
            continue
        for (pair, r), value in np.ndenumerate(tails):
            records.append(_record(cfg, pair * cfg.replicas + r, 0, name,
                                   value, 'pair={0}'.format(pair)))
    if p['coupling'] == 'monotone' and p['decay_replicas'] > 0:
        x0, x0b = pairs[0]
        mean, _ = disagreement_decay(model, x0, x0b, cfg.horizon,
                                     p['decay_replicas'], cfg.seed)
        records += [_record(cfg, 0, n, 'mean_disagreement', v)
                    for n, v in enumerate(mean)]
        records.append(_record(cfg, 0, 0, 'delta', model.delta))
    return records


def _alpha_from(records, metric, epsilon):
    tails = {}
    for r in records:
        if r.metric == metric:
            tails.setdefault(r.metadata, []).append(r.value)
    wins = [sum(v < epsilon for v in values) for values in tails.values()]
    return min(wins), len(tails)


def _coupling_summary(records, cfg):
    p = cfg.parameters
    replicas = cfg.replicas
    successes, n_pairs = _alpha_from(records, 'tail_sum', p['epsilon'])
    summary = {'coupling': p['coupling'],
               'pairs': n_pairs,
               'replicas': replicas,
               'successes': successes,
               'alpha_hat': successes / replicas,
               'wilson_95': list(wilson_interval(successes, replicas)),
               'epsilon': p['epsilon'],
               'horizon': cfg.horizon}
    if any(r.metric == 'tail_sum_doubled' for r in records):
        doubled, _ = _alpha_from(records, 'tail_sum_doubled',
                                 p['epsilon'])
        summary['alpha_hat_doubled'] = doubled / replicas
    if any(r.metric == 'mean_disagreement' for r in records):
        n, mean = series(records, 'mean_disagreement')
        delta = _values(records, 'delta')[0]
        rate, interval = _rate_summary(n * delta, mean)
        summary['decay_rate'] = rate
        summary['decay_rate_interval'] = interval
        summary['decay_excludes_zero'] = bool(
            interval is not None and (interval[0] > 0 or interval[1] < 0))
    return summary


def _check_coupling(cfg, target):
    p = cfg.parameters
    problems = []
    if p['coupling'] == 'monotone' and not isinstance(target, SpinModel):
        problems.append(('parameters.coupling',
                         "The monotone coupling needs the spin model"))
    if p['coupling'] != 'monotone' and p['decay_replicas'] > 0:
        problems.append(('parameters.decay_replicas',
                         "decay_replicas only applies to the monotone "
                         "coupling"))
    if p['pairs'] < 1:
        problems.append(('parameters.pairs', "At least one initial pair is "
                         "required"))
    if p['epsilon'] <= 0:
        problems.append(('parameters.epsilon', "epsilon must be positive"))
    return problems


# -- Hellinger-Lipschitz observations -----------------------------------------

def _run_hellinger(cfg, target, executor):
    p = cfg.parameters
    pairs = sample_pairs(target, p['pairs'], stream(cfg.seed, 0, 'pairs'))
    report = hellinger_lipschitz_check(target, pairs)
    records = []
    for i, (gap, dist) in enumerate(zip(report.gaps, report.distances)):
        records.append(_record(cfg, 0, i, 'gap', gap))
        records.append(_record(cfg, 0, i, 'd_tilde', dist))
    if report.bound is not None:
        records.append(_record(cfg, 0, 0, 'bound', report.bound))
    for i, (x, xb) in enumerate(pairs[:p['quadrature_pairs']]):
        closed = float(target.hellinger_gap(x, xb))
        quad = hellinger_gap_quadrature(target.field(x), target.field(xb),
                                        target.obs_var)
        records.append(_record(cfg, 0, i, 'quadrature_error',
                               abs(closed - quad)))
    return records


def _hellinger_summary(records, cfg):
    _, gaps = series(records, 'gap')
    _, dists = series(records, 'd_tilde')
    positive = dists > 0
    ratios = gaps[positive] / dists[positive] ** 2
    C_hat = float(ratios.max()) if ratios.size else 0.0
    if np.any(gaps[~positive] > 0):
        C_hat = float('inf')
    summary = {'pairs': int(gaps.size),
               'C_hat': C_hat,
               'finite': bool(np.isfinite(C_hat)),
               'max_gap': float(gaps.max(initial=0.0)),
               'gap_at_most_2': bool(np.all(gaps <= 2.0))}
    bound = _values(records, 'bound')
    if bound:
        summary['bound'] = bound[0]
        summary['within_bound'] = bool(C_hat <= bound[0])
    errors = _values(records, 'quadrature_error')
    if errors:
        summary['quadrature_max_error'] = max(errors)
    return summary


def _check_hellinger(cfg, target):
    p = cfg.parameters
    if p['pairs'] < 1:
        return [('parameters.pairs', "At least one pair is required")]
    if p['quadrature_pairs'] and not hasattr(target, 'obs_var'):
        return [('parameters.quadrature_pairs',
                 "Quadrature is only available for Gaussian observations")]
    return []


# -- filter chain ergodicity --------------------------------------------------

def _gamma_inits(cfg, hmm):
    inits = cfg.parameters['inits']
    if inits is None:
        m = hmm.n_hidden
        return [Categorical.point(m, 0), Categorical.point(m, m - 1)]
    return [Categorical(np.asarray(v, dtype=float)) for v in inits]


def _run_gamma(cfg, target, executor):
    p = cfg.parameters

    def replica(item):
        i, nu0 = item
        avg = gamma_ergodic_averages(target, nu0, p['y0'], cfg.horizon,
                                     stream(cfg.seed, i, 'gamma'),
                                     p['batches'], p['burn_in'])
        out = []
        for k in range(avg.moments.size):
            out.append(_record(cfg, i, k + 1, 'moment', avg.moments[k]))
            out.append(_record(cfg, i, k + 1, 'moment_stderr',
                               avg.moments_stderr[k]))
        for y in range(avg.y_freq.size):
            out.append(_record(cfg, i, y, 'y_freq', avg.y_freq[y]))
            out.append(_record(cfg, i, y, 'y_stderr', avg.y_stderr[y]))
        return out

    inits = list(enumerate(_gamma_inits(cfg, target)))
    return [rec for block in _map(executor, replica, inits)
            for rec in block]


def _gamma_summary(records, cfg):
    moments = by_replica(records, 'moment')
    errors = by_replica(records, 'moment_stderr')
    worst = 0.0
    for a, b in combinations(sorted(moments), 2):
        spread = np.sqrt(errors[a][1] ** 2 + errors[b][1] ** 2)
        diff = np.abs(moments[a][1] - moments[b][1])
        z = np.divide(diff, spread, out=np.where(diff > 0, np.inf, 0.0),
                      where=spread > 0)
        worst = max(worst, float(z.max()))
    return {'initializations': len(moments),
            'moments': {str(i): v.tolist() for i, (_, v) in moments.items()},
            'max_z': worst,
            'agree_3_sigma': bool(worst <= 3.0)}


def _check_gamma(cfg, target):
    p = cfg.parameters
    problems = []
    if not 0 <= p['y0'] < target.n_symbols:
        problems.append(('parameters.y0', "y0 must be an observation symbol"))
    if p['batches'] < 2:
        problems.append(('parameters.batches', "At least two batches are "
                         "required"))
    if cfg.horizon - p['burn_in'] < p['batches']:
        problems.append(('parameters.burn_in', "Too few steps are left "
                         "after the burn-in"))
    inits = p['inits']
    if inits is not None:
        if len(inits) < 2:
            problems.append(('parameters.inits', "At least two initial "
                             "filters are required"))
        for law in inits:
            if (len(law) != target.n_hidden or min(law) < 0
                    or abs(sum(law) - 1) > 1e-9):
                problems.append(('parameters.inits', "Every initial filter "
                                 "must be a probability vector of length "
                                 "{0}".format(target.n_hidden)))
                break
    return problems


# -- catalog ------------------------------------------------------------------

_DICHOTOMY = {
    'n_max': Parameter('int', 20, "Largest starting time searched"),
    'k_max': Parameter('int', help="Window of the future sigma-field",
                       conf='K_MAX'),
    'alpha': Parameter('float', 1.0, "Required drop below 2"),
}

EXPERIMENTS = {
    'zero_two': Experiment(
        'zero_two',
        "Zero-two probe of a projected finite chain",
        ('chain', 'product'), _run_zero_two, _dichotomy_summary,
        dict(_DICHOTOMY, coordinates=Parameter(
            'int-list', None, "Observed coordinates of a product chain")),
        horizon=1, plot_metrics=('tv',), check=_check_enumeration_size),
    'local_mixing': Experiment(
        'local_mixing',
        "Zero-two probe of a product chain on a window of coordinates",
        ('product',), _run_local_mixing, _local_mixing_summary,
        dict(_DICHOTOMY, coordinates=Parameter(
            'int-list', (0,), "Observed coordinates")),
        horizon=1, plot_metrics=('tv', 'full_tv'),
        check=_check_enumeration_size),
    'beta_decay': Experiment(
        'beta_decay',
        "Absolute regularity coefficient of a stationary chain",
        ('chain', 'product', 'hmm'), _run_beta_decay, _beta_summary,
        {'n_max': Parameter('int', 20, "Largest lag")},
        horizon=1, plot_metrics=('beta',)),
    'conditional_inheritance': Experiment(
        'conditional_inheritance',
        "Decay of the conditional chain given the observations",
        ('hmm',), _run_inheritance, _inheritance_summary,
        {'lags': Parameter('int-list', (1, 2, 5, 10, 20, 30),
                           "Lags tabulated"),
         'truncation': Parameter('bool', False,
                                 "Also compare with a doubled window")},
        horizon=40, plot_metrics=('max_tv', 'mean_tv'),
        check=_check_inheritance),
    'filter_stability': Experiment(
        'filter_stability',
        "Distance between two filters fed the same observations",
        ('hmm', 'model'), _run_filter_stability, _filter_summary,
        {'mu': Parameter('float-list', None, "First prior (finite models)"),
         'nu': Parameter('float-list', None, "Second prior (finite models)"),
         'gamma': Parameter('float-list', None,
                            "Law of the hidden start (finite models)"),
         'mu_shift': Parameter('float', 0.0, "First prior shift"),
         'nu_shift': Parameter('float', 0.5, "Second prior shift"),
         'particles': Parameter('int', help="Particles per filter",
                                conf='PARTICLES'),
         'resample_threshold': Parameter('float', help="ESS fraction",
                                         conf='RESAMPLE_THRESHOLD'),
         'threshold': Parameter('float', help="Final/initial ratio",
                                conf='STABILITY_RATIO')},
        horizon=50, plot_metrics=('tv', 'bl'), check=_check_filter),
    'coupling_alpha': Experiment(
        'coupling_alpha',
        "Success probability of an asymptotic coupling",
        ('chain', 'model'), _run_coupling, _coupling_summary,
        {'coupling': Parameter('str', 'synchronous', "Coupling",
                               choices=tuple(COUPLINGS)),
         'pairs': Parameter('int', 10, "Initial pairs"),
         'epsilon': Parameter('float', help="Tail-sum threshold",
                              conf='COUPLING_EPSILON'),
         'check_doubling': Parameter('bool', False, "Rerun at 2 T"),
         'decay_replicas': Parameter('int', 0,
                                     "Replicas of the disagreement fit")},
        plot_metrics=('mean_disagreement',), check=_check_coupling,
        horizon_conf='COUPLING_HORIZON'),
    'hellinger_check': Experiment(
        'hellinger_check',
        "Hellinger-Lipschitz constant of the observations",
        ('model',), _run_hellinger, _hellinger_summary,
        {'pairs': Parameter('int', 1000, "Sampled pairs"),
         'quadrature_pairs': Parameter('int', 0,
                                       "Pairs cross-checked by quadrature")},
        horizon=1, check=_check_hellinger),
    'gamma_ergodicity': Experiment(
        'gamma_ergodicity',
        "Time averages of the filter chain from several initial filters",
        ('hmm',), _run_gamma, _gamma_summary,
        {'inits': Parameter('float-table', None, "Initial filters"),
         'y0': Parameter('int', 0, "Initial observation"),
         'batches': Parameter('int', 20, "Batch-means batches"),
         'burn_in': Parameter('int', 0, "Discarded steps")},
        horizon=100000, check=_check_gamma),
}


def summarize(records, cfg):
    """The summary of a run, computed from its records and configuration."""
    summary = {'experiment': cfg.name,
               'kind': cfg.kind,
               'seed': cfg.seed,
               'replicas': cfg.replicas,
               'horizon': cfg.horizon,
               'target': cfg.target,
               'defaults': cfg.defaults}
    summary.update(EXPERIMENTS[cfg.kind].summarize(records, cfg))
    return summary


def run_experiment(cfg, executor=None):
    """Run a validated configuration; returns ``(records, summary)``."""
    target = build_target(cfg.source, cfg.target, cfg.target_params)
    experiment = EXPERIMENTS[cfg.kind]
    log.info('running %s (%s) on %s', cfg.name, cfg.kind, cfg.target)
    records = experiment.run(cfg, target, executor)
    return records, summarize(records, cfg)


def catalog():
    """The experiment kinds, their parameters and the shipped targets."""
    from .config import example_configs
    kinds = []
    for kind, experiment in EXPERIMENTS.items():
        params = {name: {'type': p.type,
                         'default': p.conf or p.default,
                         'help': p.help}
                  for name, p in experiment.parameters.items()}
        kinds.append({'kind': kind,
                      'description': experiment.description,
                      'targets': list(experiment.targets),
                      'required': ['experiment.seed', 'model'],
                      'parameters': params})
    return {'experiments': kinds,
            'fixtures': sorted(FIXTURES),
            'models': sorted(MODELS),
            'examples': sorted(example_configs())}


def list_experiments(fmt='text'):
    """
    Catalog text, or JSON with ``fmt='json'``.

    >>> 'gamma_ergodicity' in list_experiments()
    True
    """
    data = catalog()
    if fmt == 'json':
        return json.dumps(data, indent=2, sort_keys=True, default=list)
    lines = ['Experiments', '===========', '']
    for entry in data['experiments']:
        lines.append('{0}: {1}'.format(entry['kind'], entry['description']))
        lines.append('    targets: {0}'.format(', '.join(entry['targets'])))
        lines.append('    required: {0}'.format(
            ', '.join(entry['required'])))
        for name, p in sorted(entry['parameters'].items()):
            lines.append('    parameters.{0} ({1}, default {2}): {3}'.format(
                name, p['type'], p['default'], p['help']))
        lines.append('')
    lines.append('Fixtures: ' + ', '.join(data['fixtures']))
    lines.append('Models: ' + ', '.join(data['models']))
    lines.append('Example configs: ' + ', '.join(data['examples']))
    return '\n'.join(lines) + '\n'

# Licensed under a 3-clause BSD style license - see LICENSE.rst
"""
Conditional ergodicity of finite hidden Markov models.

Given an observation window ``y_0, ..., y_T`` the hidden process is again a
Markov chain, but an inhomogeneous one whose transition matrices depend on
the whole window. `conditional_transitions` builds these matrices from
backward variables kept in log space; everything else in the module is a
product of them.

A `FiniteHMM` is stored in the factored form

    P((x, y), (x', y')) = g(x, y, x', y') P0(x, x') Q(y, y')

with ``g`` rescaled at construction so the joint kernel is stochastic.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .conf import (CONDITIONAL_ROW_TOL, INHERITANCE_TOL, TRUNCATION_TOL,
                   TV_MAX, WINDOW_MARGIN_FRACTION)
from .exceptions import DegenerateModelError, DimensionError
from .markov_lab import (FiniteChain, beta_mixing_coeff, check_stochastic,
                         stationary)
from .measure_core import Categorical
from .rng import as_generator, stream

__all__ = ['FiniteHMM', 'ObservationPath', 'ConditionalChain',
           'InheritanceTable', 'simulate', 'conditional_transitions',
           'conditional_initial', 'conditional_tv', 'conditional_beta',
           'smoother_marginals', 'inheritance_experiment',
           'truncation_stability', 'window_margin']

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FiniteHMM:
    """
    A hidden Markov model with ``m`` hidden states and ``s`` symbols.

    Parameters
    ----------
    P0 : array, shape (m, m)
        Reference kernel of the hidden chain.
    Q : array, shape (s, s)
        Reference kernel of the observations.
    g : array, shape (m, s, m, s)
        Non-negative density ``g(x, y, x', y')``; rescaled so that the joint
        kernel has unit row sums.
    facts : dict
        Analytic facts attached by the fixture catalog.
    """

    P0: np.ndarray
    Q: np.ndarray
    g: np.ndarray
    facts: dict = field(default_factory=dict)

    def __post_init__(self):
        P0 = check_stochastic(self.P0, what='P0')
        Q = check_stochastic(self.Q, what='Q')
        m, s = P0.shape[0], Q.shape[0]
        g = np.array(self.g, dtype=float)
        if g.shape != (m, s, m, s):
            raise DimensionError("g must have shape {0}, got {1}".format(
                (m, s, m, s), g.shape))
        if np.any(g < 0) or not np.all(np.isfinite(g)):
            raise ValueError("g must be finite and non-negative")
        mass = np.einsum('iajb,ij,ab->ia', g, P0, Q)
        if np.any(mass <= 0):
            raise DegenerateModelError("The joint kernel has an empty row")
        g = g / mass[:, :, None, None]
        g.setflags(write=False)
        object.__setattr__(self, 'P0', P0)
        object.__setattr__(self, 'Q', Q)
        object.__setattr__(self, 'g', g)

    @classmethod
    def from_observation_matrix(cls, P0, Phi, facts=None):
        """
        The classical hidden Markov form: ``Y_n`` is drawn from
        ``Phi(X_n, .)`` independently of everything else.
        """
        Phi = check_stochastic_rows(Phi)
        m, s = Phi.shape
        Q = np.full((s, s), 1.0 / s)
        g = np.broadcast_to(s * Phi[None, None, :, :], (m, s, m, s))
        return cls(P0, Q, g, dict(facts or {}))

    @property
    def n_hidden(self):
        return self.P0.shape[0]

    @property
    def n_symbols(self):
        return self.Q.shape[0]

    @property
    def nondegenerate(self):
        return bool(self.g.min() > 0)

    def transition_likelihood(self, y, y2):
        """``L(x, x') = P0(x, x') g(x, y, x', y2)``, the filter's kernel."""
        return self.P0 * self.g[:, y, :, y2]

    @cached_property
    def joint_kernel(self):
        """Joint kernel on pairs ``(x, y)`` indexed as ``x * s + y``."""
        m, s = self.n_hidden, self.n_symbols
        K = np.einsum('iajb,ij,ab->iajb', self.g, self.P0, self.Q)
        return K.reshape(m * s, m * s)

    @cached_property
    def joint_chain(self):
        return FiniteChain(self.joint_kernel)

    @cached_property
    def joint_stationary(self):
        """Stationary law of the pair as an ``(m, s)`` array."""
        lam = stationary(self.joint_chain).probs
        return lam.reshape(self.n_hidden, self.n_symbols)


def check_stochastic_rows(Phi):
    Phi = np.array(Phi, dtype=float)
    if Phi.ndim != 2:
        raise DimensionError("An observation matrix must be two-dimensional")
    if np.any(Phi < 0) or np.any(np.abs(Phi.sum(axis=1) - 1) > 1e-12):
        raise ValueError("Observation matrix rows must be probability "
                         "vectors")
    return Phi


@dataclass(frozen=True, eq=False)
class ObservationPath:
    """Observed symbols ``y_0, ..., y_T``."""

    symbols: np.ndarray
    alphabet_size: int

    def __post_init__(self):
        symbols = np.array(self.symbols, dtype=np.intp)
        if symbols.ndim != 1 or symbols.size == 0:
            raise ValueError("An observation path needs at least one symbol")
        if np.any(symbols < 0) or np.any(symbols >= self.alphabet_size):
            raise ValueError("Observation symbols out of range")
        symbols.setflags(write=False)
        object.__setattr__(self, 'symbols', symbols)

    @property
    def T(self):
        return self.symbols.size - 1

    def __len__(self):
        return self.symbols.size

    def __getitem__(self, item):
        return self.symbols[item]

    def head(self, T):
        return ObservationPath(self.symbols[:T + 1], self.alphabet_size)


def _as_path(hmm, y):
    if isinstance(y, ObservationPath):
        if y.alphabet_size != hmm.n_symbols:
            raise DimensionError("Observation path and model disagree on "
                                 "the alphabet")
        return y
    return ObservationPath(y, hmm.n_symbols)


@dataclass(frozen=True, eq=False)
class ConditionalChain:
    """
    Transition matrices ``M_1, ..., M_T`` of the hidden chain given one
    observation window; ``matrices[t - 1]`` is ``M_t``.
    """

    matrices: np.ndarray
    log_backward: np.ndarray
    path: ObservationPath

    def __post_init__(self):
        worst = np.abs(self.matrices.sum(axis=2) - 1.0).max(initial=0.0)
        if worst > CONDITIONAL_ROW_TOL:
            raise ValueError("Conditional rows deviate from 1 by {0:.3g}"
                             .format(worst))

    @property
    def T(self):
        return self.matrices.shape[0]

    @property
    def n_states(self):
        return self.log_backward.shape[1]

    def product(self, n):
        """``M_1 M_2 ... M_n`` (the identity for ``n = 0``)."""
        R = np.eye(self.n_states)
        for M in self.matrices[:n]:
            R = R @ M
        return R

    def marginals(self, init):
        """Laws of ``Z_0, ..., Z_T`` for ``Z_0 ~ init``."""
        out = np.empty((self.T + 1, self.n_states))
        out[0] = init.probs if isinstance(init, Categorical) else init
        for t, M in enumerate(self.matrices, start=1):
            out[t] = out[t - 1] @ M
        return out


def window_margin(T):
    return int(T * WINDOW_MARGIN_FRACTION)


def _check_lag(T, n):
    if n < 0 or n > T - window_margin(T):
        raise ValueError(
            "Lag {0} is too close to the end of a window of length {1} "
            "(margin {2})".format(n, T, window_margin(T)))


def simulate(hmm, T, seed, init=None):
    """
    Draw ``(z_0..z_T, y_0..y_T)`` from the stationary joint chain, or with
    ``Z_0 ~ init`` and ``Y_0`` from its stationary conditional law.

    Returns the hidden path as an array and the observations as an
    `ObservationPath`.
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    rng = as_generator(seed)
    s = hmm.n_symbols
    start = hmm.joint_stationary
    if init is not None:
        mass = start.sum(axis=1, keepdims=True)
        given = np.divide(start, mass, out=np.full(start.shape, 1.0 / s),
                          where=mass > 0)
        start = init.probs[:, None] * given
    lam = np.cumsum(start.ravel())
    cum = np.cumsum(hmm.joint_kernel, axis=1)
    cum[:, -1] = 1.0
    lam[-1] = 1.0
    u = rng.random(T + 1)
    states = np.empty(T + 1, dtype=np.intp)
    states[0] = np.searchsorted(lam, u[0], side='right')
    for t in range(1, T + 1):
        states[t] = np.searchsorted(cum[states[t - 1]], u[t], side='right')
    return states // s, ObservationPath(states % s, s)


def conditional_transitions(hmm, y):
    """
    Conditional transition matrices of the hidden chain given ``y``.

    ``M_t(z, z')`` is proportional to
    ``P0(z, z') g(z, y_{t-1}, z', y_t) beta_t(z')``; the factor
    ``Q(y_{t-1}, y_t)`` does not depend on the hidden states and is dropped.
    Backward variables are carried as logarithms with the running maximum
    subtracted.
    """
    y = _as_path(hmm, y)
    T, m = y.T, hmm.n_hidden
    log_beta = np.zeros((T + 1, m))
    matrices = np.empty((T, m, m))
    for t in range(T, 0, -1):
        shift = log_beta[t].max()
        weighted = (hmm.transition_likelihood(y[t - 1], y[t])
                    * np.exp(log_beta[t] - shift)[None, :])
        rows = weighted.sum(axis=1)
        if np.any(rows <= 0):
            raise DegenerateModelError(
                "Backward variable vanished at t={0} for states {1}; the "
                "model is degenerate for this observation window".format(
                    t - 1, np.flatnonzero(rows <= 0).tolist()))
        matrices[t - 1] = weighted / rows[:, None]
        log_beta[t - 1] = np.log(rows) + shift
    return ConditionalChain(matrices, log_beta, y)


def conditional_initial(hmm, y, chain=None):
    """Law of ``Z_0`` given the whole window."""
    y = _as_path(hmm, y)
    chain = chain or conditional_transitions(hmm, y)
    with np.errstate(divide='ignore'):
        log_w = np.log(hmm.joint_stationary[:, y[0]]) + chain.log_backward[0]
    if not np.any(np.isfinite(log_w)):
        raise DegenerateModelError("The observation window has probability "
                                   "zero")
    return Categorical.normalized(np.exp(log_w - log_w.max()))


def conditional_tv(hmm, y, z0, z0b, n, chain=None):
    """
    Total variation between the conditional laws of ``Z_n`` started from
    ``z0`` and ``z0b``, given the window ``y``.
    """
    y = _as_path(hmm, y)
    _check_lag(y.T, n)
    chain = chain or conditional_transitions(hmm, y)
    R = chain.product(n)
    return float(min(TV_MAX, np.abs(R[z0] - R[z0b]).sum()))


def conditional_beta(hmm, y, n, chain=None):
    """
    Conditional absolute regularity coefficient
    ``sum_z w(z) || row_z(M_1 ... M_n) - w M_1 ... M_n ||`` with ``w`` the
    law of ``Z_0`` given the window.
    """
    y = _as_path(hmm, y)
    _check_lag(y.T, n)
    chain = chain or conditional_transitions(hmm, y)
    w = conditional_initial(hmm, y, chain).probs
    R = chain.product(n)
    mixture = w @ R
    return float(w @ np.abs(R - mixture[None, :]).sum(axis=1))


def smoother_marginals(hmm, y, init=None):
    """
    Forward-backward smoothing: ``P[Z_t = z | y_0, ..., y_T]`` as a
    ``(T + 1, m)`` array.

    Without ``init`` the pair starts from its stationary law, so ``y_0``
    enters through ``lambda(z, y_0)``; an explicit ``init`` is the law of
    ``Z_0`` given ``y_0``.
    """
    y = _as_path(hmm, y)
    chain = conditional_transitions(hmm, y)
    if init is None:
        alpha = hmm.joint_stationary[:, y[0]].copy()
    else:
        alpha = np.array(init.probs, dtype=float)
    out = np.empty((y.T + 1, hmm.n_hidden))
    for t in range(y.T + 1):
        if t:
            alpha = alpha @ hmm.transition_likelihood(y[t - 1], y[t])
        alpha /= alpha.sum()
        with np.errstate(divide='ignore'):
            log_post = np.log(alpha) + chain.log_backward[t]
        post = np.exp(log_post - log_post.max())
        out[t] = post / post.sum()
    return out


def _pair_spread(R):
    """Largest and mean total variation over ordered pairs of rows."""
    m = R.shape[0]
    if m < 2:
        return 0.0, 0.0
    spread = np.abs(R[:, None, :] - R[None, :, :]).sum(axis=2)
    off = spread[~np.eye(m, dtype=bool)]
    return float(min(TV_MAX, off.max())), float(off.mean())


@dataclass(frozen=True, eq=False)
class InheritanceTable:
    """
    Conditional TV decay over sampled observation paths.

    ``max_tv[j]`` and ``mean_tv[j]`` are taken over paths and ordered pairs
    of initial states at ``lags[j]``; ``joint_beta`` is the absolute
    regularity coefficient of the joint chain at the largest lag.
    """

    lags: np.ndarray
    max_tv: np.ndarray
    mean_tv: np.ndarray
    n_paths: int
    nondegenerate: bool
    joint_beta: float
    tolerance: float = INHERITANCE_TOL

    @property
    def decays(self):
        return bool(self.max_tv[-1] < self.tolerance)

    @property
    def monotone(self):
        return bool(np.all(np.diff(self.max_tv) <= 1e-12))


def inheritance_experiment(hmm, n_paths, T, lags, seed):
    """
    Sample ``n_paths`` stationary observation windows of length ``T`` and
    tabulate the conditional TV between hidden starts at each lag.

    Degenerate models are run as well; the table then records whether the
    decay failed instead of refusing the model.
    """
    lags = np.array(sorted({int(n) for n in lags}))
    if lags.size == 0:
        raise ValueError("At least one lag is required")
    for n in lags:
        _check_lag(T, n)
    if not hmm.nondegenerate:
        log.warning('Model is degenerate; conditional decay is not '
                    'guaranteed')
    max_tv = np.zeros(lags.size)
    total = np.zeros(lags.size)
    for p in range(n_paths):
        _, y = simulate(hmm, T, stream(seed, p, 'observations'))
        chain = conditional_transitions(hmm, y)
        R = np.eye(hmm.n_hidden)
        done = 0
        for j, n in enumerate(lags):
            for M in chain.matrices[done:n]:
                R = R @ M
            done = n
            worst, mean = _pair_spread(R)
            max_tv[j] = max(max_tv[j], worst)
            total[j] += mean
    joint_beta = beta_mixing_coeff(hmm.joint_chain, int(lags[-1]))
    table = InheritanceTable(lags, max_tv, total / max(n_paths, 1), n_paths,
                             hmm.nondegenerate, joint_beta)
    log.info('inheritance: max conditional TV %.3g at lag %d over %d paths',
             max_tv[-1], lags[-1], n_paths)
    return table


def truncation_stability(hmm, T, lags, seed):
    """
    Largest change of the pairwise conditional TVs when the observation
    window is doubled from ``T`` to ``2 T``.
    """
    _, y_long = simulate(hmm, 2 * T, stream(seed, 0, 'truncation'))
    short = conditional_transitions(hmm, y_long.head(T))
    long = conditional_transitions(hmm, y_long)
    change = 0.0
    for n in lags:
        _check_lag(T, n)
        A, B = short.product(n), long.product(n)
        tv_a = np.abs(A[:, None, :] - A[None, :, :]).sum(axis=2)
        tv_b = np.abs(B[:, None, :] - B[None, :, :]).sum(axis=2)
        change = max(change, float(np.abs(tv_a - tv_b).max()))
    if change > TRUNCATION_TOL:
        log.warning('Doubling the window moved conditional TV by %.3g',
                    change)
    return change

# Licensed under a 3-clause BSD style license - see LICENSE.rst
"""
Exact ergodic probes for finite-state chains.

Everything here is linear algebra on stochastic matrices. The law of a
projected segment ``(iota(X_n), ..., iota(X_{n+k}))`` is obtained by
forward recursions constrained to one symbol string at a time, so the cost
is ``states x alphabet**(k+1)`` rather than ``states**(k+1)``.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property, reduce
from itertools import combinations, permutations

import numpy as np
from scipy.sparse.csgraph import connected_components

from .conf import (K_CONVERGENCE, K_MAX, PATH_ENUMERATION_CAP, PATH_LAW_TOL,
                   PRODUCT_STATE_CAP, ROW_TOL, STATIONARY_TOL, TV_MAX)
from .exceptions import CapExceededError, DimensionError, StationaryError
from .measure_core import Categorical

__all__ = ['FiniteChain', 'Projection', 'ProductChain', 'PathLaw',
           'ZeroTwoReport', 'LocalMixingReport', 'communicating_classes',
           'stationary', 'marginal_tv', 'projected_path_law',
           'path_tv_profile', 'local_path_tv', 'local_path_tv_limit',
           'beta_mixing_coeff', 'zero_two_probe', 'local_mixing_probe',
           'VERDICT_POSITIVE', 'VERDICT_NEGATIVE']

log = logging.getLogger(__name__)

VERDICT_POSITIVE = 'locally-irreducible'
VERDICT_NEGATIVE = 'not-locally-irreducible'


def check_stochastic(P, tol=ROW_TOL, what='Transition matrix'):
    P = np.array(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise DimensionError("{0} must be square, got shape {1}"
                             .format(what, P.shape))
    if np.any(P < 0) or not np.all(np.isfinite(P)):
        raise ValueError("{0} has negative or non-finite entries"
                         .format(what))
    worst = np.max(np.abs(P.sum(axis=1) - 1.0))
    if worst > tol:
        raise ValueError("{0} rows deviate from 1 by {1:.3g}"
                         .format(what, worst))
    P.setflags(write=False)
    return P


@dataclass(frozen=True, eq=False)
class FiniteChain:
    """
    A time-homogeneous chain on ``{0, ..., n - 1}``.

    ``facts`` carries analytic facts attached by the fixture catalog.
    """

    P: np.ndarray
    stationary: Categorical = None
    facts: dict = field(default_factory=dict)

    def __post_init__(self):
        P = check_stochastic(self.P)
        object.__setattr__(self, 'P', P)
        if self.stationary is not None:
            lam = self.stationary.probs
            if lam.size != P.shape[0]:
                raise DimensionError("Stationary vector has the wrong size")
            residual = np.abs(lam @ P - lam).sum()
            if residual > STATIONARY_TOL:
                raise ValueError("Supplied stationary vector has residual "
                                 "{0:.3g}".format(residual))

    @property
    def n_states(self):
        return self.P.shape[0]

    def power(self, n):
        return np.linalg.matrix_power(self.P, n)


@dataclass(frozen=True, eq=False)
class Projection:
    """A map from states to symbols ``{0, ..., alphabet_size - 1}``."""

    map: np.ndarray
    alphabet_size: int = None

    def __post_init__(self):
        symbols = np.array(self.map, dtype=np.intp)
        if symbols.ndim != 1 or np.any(symbols < 0):
            raise ValueError("A projection maps every state to a symbol >= 0")
        size = self.alphabet_size
        if size is None:
            size = int(symbols.max()) + 1 if symbols.size else 1
        if size < 1 or (symbols.size and symbols.max() >= size):
            raise ValueError("Projection symbols exceed the alphabet size")
        symbols.setflags(write=False)
        object.__setattr__(self, 'map', symbols)
        object.__setattr__(self, 'alphabet_size', int(size))

    @classmethod
    def identity(cls, n_states):
        return cls(np.arange(n_states), n_states)

    @property
    def injective(self):
        return np.unique(self.map).size == self.map.size

    def masks(self):
        """Indicator rows ``masks[s, x] = 1[iota(x) = s]``."""
        masks = np.zeros((self.alphabet_size, self.map.size))
        masks[self.map, np.arange(self.map.size)] = 1.0
        return masks


@dataclass(frozen=True, eq=False)
class ProductChain:
    """
    Independent coordinates run side by side.

    States are numbered in C order of the coordinate tuple, the first
    component being the most significant digit (the ``np.kron`` order).
    """

    components: tuple
    facts: dict = field(default_factory=dict)

    def __post_init__(self):
        components = tuple(self.components)
        if not components:
            raise ValueError("A product chain needs at least one component")
        object.__setattr__(self, 'components', components)
        if self.n_states > PRODUCT_STATE_CAP:
            raise CapExceededError(
                "Product chain has {0} states, above the cap of {1}".format(
                    self.n_states, PRODUCT_STATE_CAP))

    @property
    def sizes(self):
        return tuple(c.n_states for c in self.components)

    @property
    def n_states(self):
        return int(np.prod(self.sizes))

    @cached_property
    def chain(self):
        P = reduce(np.kron, [c.P for c in self.components])
        lam = None
        if all(c.stationary is not None for c in self.components):
            lam = Categorical(reduce(np.kron, [c.stationary.probs
                                               for c in self.components]))
        return FiniteChain(P, lam, dict(self.facts))

    @cached_property
    def coordinates(self):
        """Array of shape ``(n_states, d)`` with each state's coordinates."""
        return np.stack(np.unravel_index(np.arange(self.n_states),
                                         self.sizes), axis=1)

    def state_index(self, coords):
        return int(np.ravel_multi_index(tuple(coords), self.sizes))

    def projection(self, J):
        """Projection onto the coordinates listed in ``J``."""
        J = tuple(J)
        if not J:
            return Projection(np.zeros(self.n_states, dtype=np.intp), 1)
        if len(set(J)) != len(J) or min(J) < 0 or max(J) >= len(self.sizes):
            raise ValueError("Invalid coordinate set {0}".format(J))
        dims = tuple(self.sizes[j] for j in J)
        symbols = np.ravel_multi_index(tuple(self.coordinates[:, J].T), dims)
        return Projection(symbols, int(np.prod(dims)))


@dataclass(frozen=True, eq=False)
class PathLaw:
    """Law of a projected segment, keyed by symbol tuples."""

    probs: dict
    length: int

    def __post_init__(self):
        total = sum(self.probs.values())
        if abs(total - 1.0) > PATH_LAW_TOL:
            raise ValueError("Path law sums to {0!r}".format(total))

    def tv(self, other):
        keys = set(self.probs) | set(other.probs)
        return min(TV_MAX, sum(abs(self.probs.get(w, 0.0)
                                   - other.probs.get(w, 0.0)) for w in keys))


def communicating_classes(chain):
    """
    Return ``(classes, closed)``: all communicating classes and the closed
    (recurrent) ones, each as a sorted list of states.
    """
    adjacency = chain.P > 0
    n_classes, labels = connected_components(adjacency, directed=True,
                                             connection='strong')
    classes = [sorted(np.flatnonzero(labels == c).tolist())
               for c in range(n_classes)]
    closed = []
    for c, members in enumerate(classes):
        leaving = adjacency[members][:, labels != c]
        if not leaving.any():
            closed.append(members)
    return classes, closed


def stationary(chain):
    """
    The stationary law of a chain with a single closed class.

    A stationary vector attached to the chain is returned as is.
    """
    if chain.stationary is not None:
        return chain.stationary
    classes, closed = communicating_classes(chain)
    if len(closed) != 1:
        raise StationaryError(
            "Chain has {0} closed classes {1}; the stationary law is not "
            "unique".format(len(closed), closed), classes=closed)
    n = chain.n_states
    A = np.vstack([chain.P.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    lam = np.linalg.lstsq(A, b, rcond=None)[0]
    lam = np.clip(lam, 0.0, None)
    lam /= lam.sum()
    residual = np.abs(lam @ chain.P - lam).sum()
    if residual > STATIONARY_TOL:
        raise StationaryError("Stationary solve did not converge (residual "
                              "{0:.3g})".format(residual), classes=classes)
    return Categorical(lam)


def marginal_tv(chain, x, x2, n):
    """``|| delta_x P^n - delta_x2 P^n ||``."""
    Pn = chain.power(n)
    return float(min(TV_MAX, np.abs(Pn[x] - Pn[x2]).sum()))


def _check_enumeration(proj, k):
    count = proj.alphabet_size ** (k + 1)
    if count > PATH_ENUMERATION_CAP:
        raise CapExceededError(
            "{0} symbol strings of length {1} exceed the enumeration cap of "
            "{2}".format(count, k + 1, PATH_ENUMERATION_CAP))


def _check_projection(chain, proj):
    if proj.map.size != chain.n_states:
        raise DimensionError("Projection covers {0} states, chain has {1}"
                             .format(proj.map.size, chain.n_states))


def _extend(stacks, codes, P, masks):
    """Append one symbol to every string of every stack."""
    alphabet, n = masks.shape
    extended = []
    for stack in stacks:
        moved = stack @ P
        extended.append((moved[:, None, :] * masks[None, :, :])
                        .reshape(-1, n))
    codes = (codes[:, None] * alphabet + np.arange(alphabet)).ravel()
    return extended, codes


def _prune(stacks, codes):
    alive = np.zeros(codes.size, dtype=bool)
    for stack in stacks:
        alive |= stack.sum(axis=1) > 0
    return [stack[alive] for stack in stacks], codes[alive]


def _iter_path_masses(chain, starts, proj, n):
    """
    Yield, for k = 0, 1, ..., the string codes and the masses each start
    distribution gives to them.
    """
    P = chain.P
    masks = proj.masks()
    Pn = chain.power(n)
    stacks = [(np.asarray(start) @ Pn)[None, :] * masks for start in starts]
    codes = np.arange(proj.alphabet_size)
    while True:
        stacks, codes = _prune(stacks, codes)
        yield codes, [stack.sum(axis=1) for stack in stacks]
        stacks, codes = _extend(stacks, codes, P, masks)


def projected_path_law(chain, init, proj, n, k):
    """
    Exact law of ``(iota(X_n), ..., iota(X_{n+k}))`` for ``X_0 ~ init``.

    Parameters
    ----------
    chain : `FiniteChain`
    init : `~ergolab.measure_core.Categorical` or int
        Initial law, or a state index for a point mass.
    proj : `Projection`
    n, k : int
        Start time and window length (the segment has ``k + 1`` symbols).
    """
    _check_projection(chain, proj)
    _check_enumeration(proj, k)
    if not isinstance(init, Categorical):
        init = Categorical.point(chain.n_states, init)
    for step, (codes, (masses,)) in enumerate(
            _iter_path_masses(chain, [init.probs], proj, n)):
        if step == k:
            break
    digits = np.unravel_index(codes, (proj.alphabet_size,) * (k + 1))
    strings = zip(*(d.tolist() for d in digits))
    return PathLaw(dict(zip(strings, masses.tolist())), k + 1)


def _iter_path_tv(chain, x, x2, proj, n):
    size = chain.n_states
    starts = [np.eye(size)[x], np.eye(size)[x2]]
    for _, (first, second) in _iter_path_masses(chain, starts, proj, n):
        yield float(min(TV_MAX, np.abs(first - second).sum()))


def path_tv_profile(chain, x, x2, proj, n, k_max):
    """Path TV from point starts ``x`` and ``x2`` for windows 0..k_max."""
    _check_projection(chain, proj)
    _check_enumeration(proj, k_max)
    profile = []
    for value in _iter_path_tv(chain, x, x2, proj, n):
        profile.append(value)
        if len(profile) == k_max + 1:
            break
    return np.array(profile)


def local_path_tv(chain, x, x2, proj, n, k):
    """
    Total variation between the laws of the projected segments
    ``(iota(X_n), ..., iota(X_{n+k}))`` started from ``x`` and ``x2``.
    """
    return float(path_tv_profile(chain, x, x2, proj, n, k)[-1])


def local_path_tv_limit(chain, x, x2, proj, n, k_max=K_MAX,
                        tol=K_CONVERGENCE):
    """
    Grow the window until successive path TVs differ by less than ``tol``.

    Returns ``(value, k)``; ``k == k_max`` means the heuristic did not
    settle within the cap.
    """
    _check_projection(chain, proj)
    _check_enumeration(proj, k_max)
    previous = None
    for k, value in enumerate(_iter_path_tv(chain, x, x2, proj, n)):
        if previous is not None and abs(value - previous) < tol:
            return value, k
        if k == k_max:
            return value, k
        previous = value


def beta_mixing_coeff(chain, n):
    """
    Absolute regularity coefficient
    ``beta(n) = sum_x lambda(x) || delta_x P^n - lambda ||``.
    """
    lam = stationary(chain).probs
    Pn = chain.power(n)
    return float(lam @ np.abs(Pn - lam[None, :]).sum(axis=1))


@dataclass(frozen=True, eq=False)
class ZeroTwoReport:
    """
    Outcome of a zero-two probe.

    ``tv_trace[n]`` is the largest path TV over ordered pairs of starts at
    time ``n``; ``pair_witness`` maps each pair to the first ``n`` at which
    its TV fell to ``2 - alpha`` (None if it never did).
    """

    verdict: str
    witness_n: int
    tv_trace: np.ndarray
    pair_witness: dict
    alpha: float

    @property
    def positive(self):
        return self.verdict == VERDICT_POSITIVE


def zero_two_probe(chain, proj, n_max, k_max=K_MAX, alpha=1.0):
    """
    Search, for every ordered pair of starts, a time ``n <= n_max`` at which
    the projected future from ``n`` on can no longer be told apart with
    certainty (path TV over a window of ``k_max`` steps at most
    ``2 - alpha``).
    """
    if not 0 < alpha <= TV_MAX:
        raise ValueError("alpha must lie in (0, 2]")
    _check_projection(chain, proj)
    _check_enumeration(proj, k_max)
    threshold = TV_MAX - alpha
    pairs = list(combinations(range(chain.n_states), 2))
    trace = np.zeros(n_max + 1)
    pair_witness = dict.fromkeys(permutations(range(chain.n_states), 2))
    for n in range(n_max + 1):
        for x, x2 in pairs:
            tv = local_path_tv(chain, x, x2, proj, n, k_max)
            trace[n] = max(trace[n], tv)
            if tv <= threshold and pair_witness[(x, x2)] is None:
                # Path TV is symmetric in the two starts.
                pair_witness[(x, x2)] = pair_witness[(x2, x)] = n
    if all(w is not None for w in pair_witness.values()):
        verdict = VERDICT_POSITIVE
        witness_n = max(pair_witness.values(), default=0)
    else:
        verdict = VERDICT_NEGATIVE
        witness_n = None
    log.info('zero-two probe: %s (witness n=%s, trace min %.3g)', verdict,
             witness_n, trace.min())
    return ZeroTwoReport(verdict, witness_n, trace, pair_witness, alpha)


@dataclass(frozen=True, eq=False)
class LocalMixingReport:
    """
    A zero-two probe on a coordinate window, with the unprojected chain's
    largest pairwise marginal TV as contrast.
    """

    coordinates: tuple
    probe: ZeroTwoReport
    full_tv_trace: np.ndarray

    @property
    def verdict(self):
        return self.probe.verdict


def local_mixing_probe(product, J, n_max, k_max=K_MAX, alpha=1.0):
    """Zero-two probe of ``product`` projected onto the coordinates ``J``."""
    chain = product.chain
    probe = zero_two_probe(chain, product.projection(J), n_max, k_max, alpha)
    full = np.zeros(n_max + 1)
    Pn = np.eye(chain.n_states)
    for n in range(n_max + 1):
        if n:
            Pn = Pn @ chain.P
        # Path TV equals marginal TV for the injective projection.
        spread = max(np.abs(Pn - row).sum(axis=1).max() for row in Pn)
        full[n] = min(TV_MAX, spread)
    return LocalMixingReport(tuple(J), probe, full)

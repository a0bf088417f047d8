# Licensed under a 3-clause BSD style license - see LICENSE.rst
"""
Probability distances and bounds.

Total variation is reported in the ``sum |p - q|`` normalization, so every
distance in this module lives in ``[0, 2]``. The bounded-Lipschitz distance
between atomic measures is computed exactly as a linear program over the
function values on the union of atoms.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linear_sum_assignment, linprog
from scipy.spatial.distance import cdist

from .conf import BL_ATOM_CAP, BL_DUALITY_GAP, PROB_TOL, TV_MAX
from .exceptions import CapExceededError, DimensionError, SolverError
from .rng import as_generator

__all__ = ['Categorical', 'AtomicMeasure', 'MetricSpec', 'tv_categorical',
           'tv_atomic', 'bl_atomic', 'hellinger_gaussian_affinity',
           'gaussian_seq_tv_bound', 'product_tv_bound',
           'tv_joint_from_conditionals', 'gaussian_hellinger_gap',
           'poisson_hellinger_gap', 'systematic_resample',
           'stratified_subsample']

log = logging.getLogger(__name__)


def _frozen(array, dtype=float):
    array = np.array(array, dtype=dtype)
    array.setflags(write=False)
    return array


def _check_probabilities(probs, tol, what):
    if probs.ndim != 1 or probs.size == 0:
        raise ValueError("{0} must be a non-empty vector".format(what))
    if not np.all(np.isfinite(probs)) or np.any(probs < 0):
        raise ValueError("{0} must be finite and non-negative".format(what))
    total = probs.sum()
    if abs(total - 1.0) > tol:
        raise ValueError("{0} sum to {1!r}, not 1".format(what, total))


@dataclass(frozen=True, eq=False)
class Categorical:
    """
    A probability vector on the finite support ``{0, ..., n - 1}``.

    >>> Categorical([0.25, 0.75]).size
    2
    """

    probs: np.ndarray

    def __post_init__(self):
        probs = _frozen(self.probs)
        _check_probabilities(probs, PROB_TOL, 'Probabilities')
        object.__setattr__(self, 'probs', probs)

    @classmethod
    def point(cls, size, index):
        probs = np.zeros(size)
        probs[index] = 1.0
        return cls(probs)

    @classmethod
    def uniform(cls, size):
        return cls(np.full(size, 1.0 / size))

    @classmethod
    def normalized(cls, weights):
        """Normalize non-negative weights, clipping round-off negatives."""
        weights = np.clip(np.asarray(weights, dtype=float), 0.0, None)
        total = weights.sum()
        if not total > 0:
            raise ValueError("Cannot normalize weights with zero total mass")
        return cls(weights / total)

    @property
    def size(self):
        return self.probs.size

    def sample(self, rng, size=None):
        rng = as_generator(rng)
        return rng.choice(self.size, size=size, p=self.probs)


@dataclass(frozen=True, eq=False)
class AtomicMeasure:
    """
    A weighted point cloud.

    ``atoms`` has shape ``(n, ...)``: one row per atom, any trailing state
    shape, real, integer or complex entries.
    """

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        atoms = np.array(self.atoms)
        if atoms.ndim == 1:
            atoms = atoms[:, None]
        if atoms.shape[0] == 0:
            raise ValueError("An atomic measure needs at least one atom")
        atoms.setflags(write=False)
        weights = _frozen(self.weights)
        _check_probabilities(weights, PROB_TOL, 'Atom weights')
        if weights.size != atoms.shape[0]:
            raise DimensionError("{0} weights for {1} atoms".format(
                weights.size, atoms.shape[0]))
        object.__setattr__(self, 'atoms', atoms)
        object.__setattr__(self, 'weights', weights)

    @classmethod
    def uniform(cls, atoms):
        atoms = np.asarray(atoms)
        n = atoms.shape[0]
        return cls(atoms, np.full(n, 1.0 / n))

    @classmethod
    def dirac(cls, point):
        return cls(np.asarray(point)[None, ...], [1.0])

    @property
    def size(self):
        return self.weights.size

    def expectation(self, values):
        """Integrate per-atom ``values`` (shape ``(n, ...)``)."""
        return np.tensordot(self.weights, np.asarray(values), axes=1)


@dataclass(frozen=True, eq=False)
class MetricSpec:
    """
    A metric on flattened states.

    ``euclidean`` and ``sobolev`` are weighted Euclidean norms (a Sobolev
    weight is ``factor * scale**(2 s)`` per coordinate), ``hamming`` is
    ``sum_i alpha_i 1[u_i != v_i]`` and ``supremum`` is the maximum
    coordinate difference. Complex states count real and imaginary parts
    with the weight of their coordinate.
    """

    kind: str
    weights: np.ndarray = None
    order: float = 0.0

    KINDS = ('euclidean', 'sobolev', 'hamming', 'supremum')

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError("Unknown metric kind {0!r}".format(self.kind))
        if self.weights is not None:
            weights = _frozen(np.ravel(self.weights))
            if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
                raise ValueError("Metric weights must be strictly positive")
            object.__setattr__(self, 'weights', weights)
        elif self.kind == 'hamming':
            raise ValueError("A weighted-Hamming metric needs its weights")

    @classmethod
    def euclidean(cls, weights=None):
        return cls('euclidean', weights)

    @classmethod
    def sobolev(cls, scales, s=1.0, factor=1.0):
        scales = np.asarray(scales, dtype=float)
        return cls('sobolev', factor * scales ** (2 * s), order=s)

    @classmethod
    def hamming(cls, alpha):
        return cls('hamming', alpha)

    @classmethod
    def supremum(cls):
        return cls('supremum')

    def _flat(self, X):
        X = np.asarray(X)
        X = X.reshape(X.shape[0], -1)
        if self.weights is not None and X.shape[1] != self.weights.size:
            raise DimensionError("Metric has {0} weights, state has {1} "
                                 "coordinates".format(self.weights.size,
                                                      X.shape[1]))
        return X

    def embed(self, X):
        """
        Map a stack of states to real coordinates in which the metric is
        the plain Euclidean (or Hamming, or Chebyshev) one.
        """
        X = self._flat(X)
        complex_state = np.iscomplexobj(X)
        if self.kind in ('euclidean', 'sobolev') and self.weights is not None:
            X = X * np.sqrt(self.weights)
        if complex_state:
            X = np.hstack([X.real, X.imag])
        return np.asarray(X, dtype=float)

    def pairwise_embedded(self, A, B):
        if self.kind in ('euclidean', 'sobolev'):
            return cdist(A, B, 'euclidean')
        if self.kind == 'supremum':
            return cdist(A, B, 'chebyshev')
        alpha = self.weights
        out = np.empty((A.shape[0], B.shape[0]))
        for i, row in enumerate(A):
            out[i] = (row[None, :] != B) @ alpha
        return out

    def pairwise(self, X, Y):
        return self.pairwise_embedded(self.embed(X), self.embed(Y))

    def paired(self, X, Y):
        """Distances between corresponding rows of two stacks."""
        A, B = self.embed(X), self.embed(Y)
        if self.kind in ('euclidean', 'sobolev'):
            return np.sqrt(np.sum((A - B) ** 2, axis=1))
        if self.kind == 'supremum':
            return np.max(np.abs(A - B), axis=1)
        return (A != B) @ self.weights

    def distance(self, x, y):
        x = np.asarray(x)
        y = np.asarray(y)
        return float(self.pairwise(x[None, ...], y[None, ...])[0, 0])


def _probs(p):
    return p.probs if isinstance(p, Categorical) else np.asarray(p, float)


def tv_categorical(p, q):
    """
    Total variation ``sum_i |p_i - q_i|`` between two probability vectors.

    >>> round(tv_categorical(Categorical([0.3, 0.7]),
    ...                      Categorical([0.5, 0.5])), 12)
    0.4
    """
    p, q = _probs(p), _probs(q)
    if p.shape != q.shape:
        raise DimensionError("Cannot compare supports of sizes {0} and {1}"
                             .format(p.size, q.size))
    return float(min(TV_MAX, np.abs(p - q).sum()))


def _merge_atoms(p, q, coords_p, coords_q):
    coords = np.concatenate([coords_p, coords_q])
    unique, inverse = np.unique(coords, axis=0, return_inverse=True)
    signed = np.bincount(np.ravel(inverse),
                         weights=np.concatenate([p.weights, -q.weights]),
                         minlength=unique.shape[0])
    return unique, signed


def tv_atomic(p, q):
    """Exact total variation between two atomic measures."""
    flat_p = np.asarray(p.atoms).reshape(p.size, -1)
    flat_q = np.asarray(q.atoms).reshape(q.size, -1)
    if flat_p.shape[1] != flat_q.shape[1]:
        raise DimensionError("Atoms have different dimensions")
    if np.iscomplexobj(flat_p) or np.iscomplexobj(flat_q):
        flat_p = np.hstack([flat_p.real, flat_p.imag])
        flat_q = np.hstack([flat_q.real, flat_q.imag])
    _, signed = _merge_atoms(p, q, flat_p, flat_q)
    return float(min(TV_MAX, np.abs(signed).sum()))


def bl_atomic(p, q, metric, cap=BL_ATOM_CAP):
    """
    Bounded-Lipschitz distance between two atomic measures.

    Solves ``max sum_u (p_u - q_u) f(u)`` over ``|f| <= 1`` and
    ``|f(u) - f(v)| <= d(u, v)`` on the union of atoms with the HiGHS dual
    simplex. Pairs with ``d(u, v) >= 2`` need no constraint.

    Two uniform clouds of the same size are compared through the dual
    transport problem instead: the distance is the optimal assignment cost
    under ``min(d, 2)``, solved with ``linear_sum_assignment``.

    Parameters
    ----------
    p, q : `AtomicMeasure`
    metric : `MetricSpec`
    cap : int
        Largest accepted combined atom count.

    Returns
    -------
    float
        The exact distance between the two atomic measures, in ``[0, 2]``.
    """
    if p.size + q.size > cap:
        raise CapExceededError(
            "{0} atoms exceed the bounded-Lipschitz LP cap of {1}; reduce "
            "the clouds with stratified_subsample first".format(
                p.size + q.size, cap))
    if _uniform_pair(p, q):
        return _bl_assignment(p, q, metric)
    coords, signed = _merge_atoms(p, q, metric.embed(p.atoms),
                                  metric.embed(q.atoms))
    if not np.any(np.abs(signed) > 0):
        return 0.0
    m = coords.shape[0]
    rows, cols = np.triu_indices(m, k=1)
    dist = metric.pairwise_embedded(coords, coords)[rows, cols]
    near = dist < TV_MAX
    rows, cols, dist = rows[near], cols[near], dist[near]
    k = dist.size

    if k:
        index = np.arange(k)
        A = sparse.csr_matrix(
            (np.concatenate([np.ones(k), -np.ones(k),
                             -np.ones(k), np.ones(k)]),
             (np.concatenate([index, index, index + k, index + k]),
              np.concatenate([rows, cols, rows, cols]))),
            shape=(2 * k, m))
        b = np.concatenate([dist, dist])
    else:
        A = b = None

    res = linprog(-signed, A_ub=A, b_ub=b, bounds=(-1.0, 1.0),
                  method='highs-ds',
                  options={'primal_feasibility_tolerance': 1e-10,
                           'dual_feasibility_tolerance': 1e-10})
    if res.status != 0:
        raise SolverError("Bounded-Lipschitz LP failed although f = 0 is "
                          "feasible: {0}".format(res.message))

    # The optimum is homogeneous in the right-hand sides, so the marginals
    # reconstruct it; a mismatch means the solver stopped early.
    dual = res.upper.marginals.sum() - res.lower.marginals.sum()
    if k:
        dual += res.ineqlin.marginals @ b
    gap = abs(res.fun - dual)
    if gap > BL_DUALITY_GAP * (1.0 + abs(res.fun)):
        if gap > 1e-6:
            raise SolverError("Bounded-Lipschitz LP duality gap {0:.3g}"
                              .format(gap))
        log.warning("Bounded-Lipschitz LP duality gap %.3g above %.1g",
                    gap, BL_DUALITY_GAP)
    return float(min(TV_MAX, max(0.0, -res.fun)))


def _uniform_pair(p, q):
    if p.size != q.size:
        return False
    level = 1.0 / p.size
    return (np.allclose(p.weights, level, rtol=0, atol=PROB_TOL)
            and np.allclose(q.weights, level, rtol=0, atol=PROB_TOL))


def _bl_assignment(p, q, metric):
    cost = np.minimum(metric.pairwise(p.atoms, q.atoms), TV_MAX)
    rows, cols = linear_sum_assignment(cost)
    return float(min(TV_MAX, cost[rows, cols].mean()))


def hellinger_gaussian_affinity(a, b):
    """
    Hellinger affinity between ``N(a, 1)`` and ``N(b, 1)``.

    >>> round(hellinger_gaussian_affinity(0.0, 2.0), 12)
    0.606530659713
    """
    return math.exp(-(b - a) ** 2 / 8.0)


def gaussian_seq_tv_bound(gaps):
    """
    Bound on the total variation between two i.i.d. standard Gaussian
    sequences whose means differ by ``gaps``.
    """
    gaps = np.asarray(gaps, dtype=float)
    return float(min(TV_MAX, math.sqrt(np.sum(gaps ** 2))))


def product_tv_bound(affinities):
    """Total variation bound ``sqrt(8 (1 - prod H_k))`` for product laws."""
    affinities = np.asarray(affinities, dtype=float)
    if np.any(affinities < 0) or np.any(affinities > 1):
        raise ValueError("Hellinger affinities must lie in [0, 1]")
    return float(min(TV_MAX, math.sqrt(8.0 * (1.0 - np.prod(affinities)))))


def tv_joint_from_conditionals(marginal, K, K2):
    """
    Total variation between the joint laws ``marginal x K`` and
    ``marginal x K2`` computed from the conditionals alone.
    """
    m = _probs(marginal)
    K = np.asarray(K, dtype=float)
    K2 = np.asarray(K2, dtype=float)
    if K.shape != K2.shape or K.ndim != 2 or K.shape[0] != m.size:
        raise DimensionError("Kernels of shapes {0} and {1} do not match a "
                             "marginal of size {2}".format(K.shape, K2.shape,
                                                           m.size))
    return float(min(TV_MAX, m @ np.abs(K - K2).sum(axis=1)))


def gaussian_hellinger_gap(diff, cov):
    """
    Squared Hellinger distance ``int (sqrt(g) - sqrt(g'))^2`` between two
    Gaussians with common covariance whose means differ by ``diff``.

    ``cov`` may be a scalar variance, a vector of variances or a full
    matrix. ``diff`` may carry leading batch dimensions.
    """
    diff = np.asarray(diff, dtype=float)
    cov = np.asarray(cov, dtype=float)
    if cov.ndim < 2:
        quad = np.sum(diff ** 2 / cov, axis=-1)
    else:
        quad = np.einsum('...i,...i->...', diff,
                         np.linalg.solve(cov, diff[..., None])[..., 0])
    return 2.0 - 2.0 * np.exp(-quad / 8.0)


def poisson_hellinger_gap(a, b):
    """Squared Hellinger distance between ``Poisson(a)`` and ``Poisson(b)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return 2.0 - 2.0 * np.exp(-(np.sqrt(a) - np.sqrt(b)) ** 2 / 2.0)


def systematic_resample(weights, n, rng):
    """Indices drawn by systematic (low variance) resampling."""
    rng = as_generator(rng)
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0
    u = (rng.random() + np.arange(n)) / n
    return np.minimum(np.searchsorted(cumulative, u), len(weights) - 1)


def stratified_subsample(measure, n, seed):
    """
    Reduce ``measure`` to ``n`` equally weighted atoms by seeded systematic
    resampling; measures that are already small enough pass through.
    """
    if measure.size <= n:
        return measure
    index = systematic_resample(measure.weights, n, as_generator(seed))
    return AtomicMeasure.uniform(measure.atoms[index])

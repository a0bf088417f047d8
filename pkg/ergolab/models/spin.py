# Licensed under a 3-clause BSD style license - see LICENSE.rst
"""
Heat-bath (Glauber) dynamics of the Ising model on a ring, observed through
binned Poisson counts.

Spins take values 0 and 1. Each site is refreshed at rate one from its
conditional Gibbs law given its two neighbours; a refresh with uniform ``u``
sets the spin to ``1[u < p_up]``. Since ``p_up`` increases with the
neighbours, two configurations refreshed with the same ``(site, u)`` events
keep their order.
"""
from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy.stats import poisson

from ..conf import SPIN
from ..measure_core import AtomicMeasure, MetricSpec, poisson_hellinger_gap
from ..rng import as_generator

__all__ = ['SpinModel', 'spin_step', 'spin_pair_step', 'spin_observe']

# Largest flip rate; refresh events arrive at rate ``C_MAX`` per site.
C_MAX = 1.0


@dataclass(frozen=True, eq=False)
class SpinModel:
    """
    Ising ring under Glauber dynamics.

    Parameters
    ----------
    length : int
        Ring length ``L``.
    beta : float
        Inverse temperature, ``>= 0`` for attractive rates.
    alpha_scale, alpha_width : float
        Observation weights ``alpha_i = scale * exp(-|i - L/2| / width)``.
    base_rate : float
        ``c_0`` in the intensity ``h(s) = c_0 + sum_i alpha_i s_i``.
    delta : float
        Bin width.
    window : tuple of int, optional
        Sites of the local sigma-field used by stability runs.
    """

    length: int = SPIN['length']
    beta: float = SPIN['beta']
    alpha_scale: float = SPIN['alpha_scale']
    alpha_width: float = SPIN['alpha_width']
    base_rate: float = SPIN['base_rate']
    delta: float = SPIN['delta']
    window: tuple = None

    name = 'spin'
    stability_distance = 'tv-window'

    def __post_init__(self):
        if self.length < 3:
            raise ValueError("The ring needs at least three sites")
        if self.beta < 0:
            raise ValueError("Glauber rates are attractive only for "
                             "beta >= 0")
        if self.alpha_scale <= 0 or self.base_rate <= 0 or self.delta <= 0:
            raise ValueError("alpha_scale, base_rate and delta must be "
                             "positive")
        L = self.length
        sites = np.arange(L)
        alpha = self.alpha_scale * np.exp(-np.abs(sites - L / 2)
                                          / self.alpha_width)
        # Indexed by the number of up neighbours.
        p_up = 1.0 / (1.0 + np.exp(-2 * self.beta * (2 * np.arange(3) - 2)))
        window = self.window
        if window is None:
            window = tuple(range(L // 2 - 2, L // 2 + 2))
        window = tuple(int(i) % L for i in window)
        object.__setattr__(self, 'alpha', alpha)
        object.__setattr__(self, 'p_up', p_up)
        object.__setattr__(self, 'window', window)
        error = self.check_detailed_balance()
        if error > 1e-12:
            raise ValueError("Flip rates violate detailed balance by {0:.3g}"
                             .format(error))
        if not self.check_attractive():
            raise ValueError("Flip rates are not attractive")

    @property
    def state_shape(self):
        return (self.length,)

    @property
    def metric(self):
        """Weighted Hamming distance with the observation weights."""
        return MetricSpec.hamming(self.alpha)

    @property
    def coupling_metric(self):
        return self.metric

    def flip_rate(self, left, centre, right):
        up = self.p_up[left + right]
        return up if centre == 0 else 1.0 - up

    def check_detailed_balance(self):
        """
        Largest violation of ``c(s) pi(s) = c(s^i) pi(s^i)`` over the eight
        neighbourhood patterns, in log scale.
        """
        worst = 0.0
        for left, centre, right in product((0, 1), repeat=3):
            s = 2 * centre - 1
            field = (2 * left - 1) + (2 * right - 1)
            ratio = (self.flip_rate(left, centre, right)
                     / self.flip_rate(left, 1 - centre, right))
            worst = max(worst, abs(np.log(ratio) + 2 * self.beta * s * field))
        return worst

    def check_attractive(self):
        """
        For ordered patterns with equal centres, up-flips are faster and
        down-flips slower in the larger pattern.
        """
        for centre in (0, 1):
            for lo, hi in product(product((0, 1), repeat=2), repeat=2):
                if lo[0] > hi[0] or lo[1] > hi[1]:
                    continue
                rate_lo = self.flip_rate(lo[0], centre, lo[1])
                rate_hi = self.flip_rate(hi[0], centre, hi[1])
                if centre == 0 and rate_lo > rate_hi:
                    return False
                if centre == 1 and rate_lo < rate_hi:
                    return False
        return True

    def gibbs_up(self, left, right):
        """Conditional Gibbs probability of an up spin."""
        return float(self.p_up[left + right])

    def intensity(self, s):
        return self.base_rate + np.asarray(s, dtype=float) @ self.alpha

    def draw_noise(self, rng):
        """Refresh events over one bin: sites and uniforms, in time order."""
        rng = as_generator(rng)
        count = rng.poisson(self.length * C_MAX * self.delta)
        return rng.integers(0, self.length, count), rng.random(count)

    def step(self, s, noise):
        return spin_step(self, s, noise)

    def pair_step(self, s, sb, noise):
        return spin_pair_step(self, s, sb, noise)

    def propagate(self, atoms, rng):
        rng = as_generator(rng)
        s = np.array(atoms, dtype=np.int8)
        n, L = s.shape
        counts = rng.poisson(L * C_MAX * self.delta, n)
        width = int(counts.max(initial=0))
        sites = rng.integers(0, L, (n, width))
        u = rng.random((n, width))
        rows = np.arange(n)
        for j in range(width):
            active = rows[counts > j]
            i = sites[active, j]
            ups = s[active, (i - 1) % L] + s[active, (i + 1) % L]
            s[active, i] = u[active, j] < self.p_up[ups]
        return s

    def observe(self, s, rng):
        return spin_observe(self, s, rng)

    def obs_logpdf(self, atoms, y):
        return poisson.logpmf(y, self.delta * self.intensity(atoms))

    def hellinger_gap(self, s, sb):
        return poisson_hellinger_gap(self.delta * self.intensity(s),
                                     self.delta * self.intensity(sb))

    def sample_prior(self, rng, n, shift=None):
        """
        Independent spins, up with probability ``0.5 + shift`` (so ``-0.5``
        and ``0.5`` give the all-down and all-up configurations).
        """
        p = float(np.clip(0.5 + (shift or 0.0), 0.0, 1.0))
        atoms = as_generator(rng).random((n, self.length)) < p
        return AtomicMeasure.uniform(atoms.astype(np.int8))


def spin_step(model, s, clock, count_flips=False):
    """
    Apply the refresh events ``clock = (sites, uniforms)`` to ``s``.

    With ``count_flips`` the number of actual spin changes per site is
    returned as well.
    """
    sites, u = clock
    s = [int(v) for v in np.ravel(s)]
    L = len(s)
    p_up = model.p_up.tolist()
    flips = [0] * L
    for i, ui in zip(np.asarray(sites).tolist(), np.asarray(u).tolist()):
        new = 1 if ui < p_up[s[i - 1] + s[(i + 1) % L]] else 0
        if new != s[i]:
            flips[i] += 1
            s[i] = new
    out = np.array(s, dtype=np.int8)
    if count_flips:
        return out, np.array(flips)
    return out


def spin_pair_step(model, s, sb, clock):
    """
    Apply the same refresh events to two configurations, one event at a
    time.

    Returns both configurations and the number of events after which the
    refreshed site had s[i] > sb[i]. Only the refreshed site can change,
    so this counts every order violation.
    """
    sites, u = clock
    s = [int(v) for v in np.ravel(s)]
    sb = [int(v) for v in np.ravel(sb)]
    L = len(s)
    p_up = model.p_up.tolist()
    violations = 0
    for i, ui in zip(np.asarray(sites).tolist(), np.asarray(u).tolist()):
        s[i] = 1 if ui < p_up[s[i - 1] + s[(i + 1) % L]] else 0
        sb[i] = 1 if ui < p_up[sb[i - 1] + sb[(i + 1) % L]] else 0
        violations += s[i] > sb[i]
    return (np.array(s, dtype=np.int8), np.array(sb, dtype=np.int8),
            violations)


def spin_observe(model, s, rng):
    """Count of a Poisson process with rate ``h(s)`` over one bin."""
    return int(as_generator(rng).poisson(model.delta * model.intensity(s)))

# Licensed under a 3-clause BSD style license - see LICENSE.rst
"""
Stochastic heat equation on the unit interval with Dirichlet boundary.

In the sine basis ``e_k(z) = sqrt(2) sin(pi k z)`` every mode is an
independent Ornstein-Uhlenbeck process
``dx_k = -pi^2 k^2 x_k dt + sigma_k dW_k``, so the transition over one
sampling interval is Gaussian and is applied exactly.
"""
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from ..conf import HEAT
from ..measure_core import AtomicMeasure, MetricSpec, gaussian_hellinger_gap
from ..rng import as_generator

__all__ = ['HeatModel', 'heat_step', 'heat_observe']


@dataclass(frozen=True, eq=False)
class HeatModel:
    """
    Truncated heat equation observed at fixed points.

    Parameters
    ----------
    modes : int
        Number of retained sine modes ``K``.
    sigma_decay : float
        Forcing profile ``sigma_k = k ** -sigma_decay``.
    delta : float
        Sampling interval.
    obs_points : tuple of float
        Observation points in ``(0, 1)``.
    obs_var : float
        Observation noise variance ``r``.
    sigma : array, optional
        Explicit forcing amplitudes; overrides ``sigma_decay``.
    """

    modes: int = HEAT['modes']
    sigma_decay: float = HEAT['sigma_decay']
    delta: float = HEAT['delta']
    obs_points: tuple = HEAT['obs_points']
    obs_var: float = HEAT['obs_var']
    sigma: np.ndarray = None

    name = 'heat'
    stability_distance = 'bl'

    def __post_init__(self):
        if self.modes < 1:
            raise ValueError("The heat model needs at least one mode")
        k = np.arange(1, self.modes + 1, dtype=float)
        sigma = (k ** -self.sigma_decay if self.sigma is None
                 else np.asarray(self.sigma, dtype=float))
        if sigma.shape != k.shape or np.any(sigma < 0):
            raise ValueError("Forcing amplitudes must be {0} non-negative "
                             "numbers".format(self.modes))
        points = np.asarray(self.obs_points, dtype=float)
        if np.any(points <= 0) or np.any(points >= 1):
            raise ValueError("Observation points must lie in (0, 1)")
        if self.delta <= 0 or self.obs_var <= 0:
            raise ValueError("delta and obs_var must be positive")
        rate = np.pi ** 2 * k ** 2
        object.__setattr__(self, 'sigma', sigma)
        object.__setattr__(self, 'obs_points', tuple(points))
        object.__setattr__(self, 'wavenumbers', k)
        object.__setattr__(self, 'rates', rate)
        object.__setattr__(self, 'decay', np.exp(-rate * self.delta))
        object.__setattr__(self, 'noise_scale', np.sqrt(
            sigma ** 2 * -np.expm1(-2 * rate * self.delta) / (2 * rate)))
        object.__setattr__(self, 'basis', np.sqrt(2) * np.sin(
            np.pi * np.outer(points, k)))

    @property
    def state_shape(self):
        return (self.modes,)

    @property
    def stationary_variance(self):
        return self.sigma ** 2 / (2 * self.rates)

    @property
    def metric(self):
        """The ``L^2`` norm of the field (plain norm of the coefficients)."""
        return MetricSpec.euclidean()

    @property
    def coupling_metric(self):
        """The ``H^1`` norm, weights ``pi^2 k^2``."""
        return MetricSpec.sobolev(np.pi * self.wavenumbers, s=1.0)

    @property
    def hellinger_constant(self):
        """
        Bound on ``gap / ||x - x'||^2_{H^1}``: every point value satisfies
        ``|u(z)|^2 <= ||u||^2_{H^1} / 3`` and the Gaussian gap is at most a
        quarter of the Mahalanobis distance.
        """
        return len(self.obs_points) / (12.0 * self.obs_var)

    def transition(self, x, delta):
        """Mean factor and noise scale for an arbitrary interval."""
        decay = np.exp(-self.rates * delta)
        scale = np.sqrt(self.sigma ** 2 * -np.expm1(-2 * self.rates * delta)
                        / (2 * self.rates))
        return decay * x, scale

    def draw_noise(self, rng):
        return as_generator(rng).standard_normal(self.modes)

    def step(self, x, noise):
        return heat_step(self, x, noise)

    def propagate(self, atoms, rng):
        rng = as_generator(rng)
        atoms = np.asarray(atoms, dtype=float)
        return (atoms * self.decay
                + self.noise_scale * rng.standard_normal(atoms.shape))

    def field(self, x):
        """Point values ``u(z_i)`` for a state or a stack of states."""
        return np.asarray(x, dtype=float) @ self.basis.T

    def observe(self, x, rng):
        noise = as_generator(rng).standard_normal(len(self.obs_points))
        return heat_observe(self, x, noise)

    def obs_logpdf(self, atoms, y):
        mean = self.field(atoms)
        return norm.logpdf(y, mean, np.sqrt(self.obs_var)).sum(axis=-1)

    def hellinger_gap(self, x, xb):
        return gaussian_hellinger_gap(self.field(x) - self.field(xb),
                                      self.obs_var)

    def sample_prior(self, rng, n, shift=None):
        """Stationary cloud, optionally translated by ``shift``."""
        rng = as_generator(rng)
        atoms = (np.sqrt(self.stationary_variance)
                 * rng.standard_normal((n, self.modes)))
        if shift is not None:
            atoms = atoms + np.asarray(shift, dtype=float)
        return AtomicMeasure.uniform(atoms)

    def energy(self, x):
        """``||x||^2_H``."""
        return np.sum(np.asarray(x) ** 2, axis=-1)

    def energy_rate(self, x):
        """
        Drift of ``||x||^2_H``: ``-2 ||x||^2_{H^1} + ||sigma||^2``; its
        stationary mean vanishes.
        """
        x = np.asarray(x, dtype=float)
        return -2 * np.sum(self.rates * x ** 2, axis=-1) + np.sum(
            self.sigma ** 2)


def heat_step(model, x, noise):
    """Exact transition over one sampling interval."""
    noise = np.asarray(noise, dtype=float)
    if noise.shape[-1] != model.modes:
        raise ValueError("Expected {0} noise values, got {1}".format(
            model.modes, noise.shape[-1]))
    return model.decay * np.asarray(x, dtype=float) + model.noise_scale * noise


def heat_observe(model, x, noise):
    """``Y_i = u(z_i) + sqrt(r) noise_i``."""
    return model.field(x) + np.sqrt(model.obs_var) * np.asarray(noise)

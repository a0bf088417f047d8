# Licensed under a 3-clause BSD style license - see LICENSE.rst
"""
Stochastic delay equation
``dx(t) = (-a x(t) + b sin(x(t - r))) dt + sigma dW(t)``
sampled on windows of length ``delta``.

The state is the delay buffer ``(x(t - r), ..., x(t))`` on the Euler grid,
so the sampled process is a Markov chain on buffers.
"""
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from ..conf import DELAY
from ..exceptions import NumericalBlowupError
from ..measure_core import AtomicMeasure, MetricSpec, gaussian_hellinger_gap
from ..rng import as_generator

__all__ = ['DelayModel', 'sdde_step', 'dissipativity_constant']


def _steps(length, h, what):
    n = int(round(length / h))
    if n < 1 or abs(n * h - length) > 1e-9:
        raise ValueError("{0} must be a positive multiple of the step"
                         .format(what))
    return n


@dataclass(frozen=True, eq=False)
class DelayModel:
    """
    Euler-Maruyama discretization of the delay equation.

    Parameters
    ----------
    a, b : float
        Drift coefficients.
    sigma : float
        Constant diffusion; zero gives the deterministic equation.
    delay : float
        Delay ``r``; ``r / euler_step`` must be an integer.
    euler_step : float
        Euler step ``h``.
    delta : float
        Sampling interval; a multiple of ``euler_step``.
    obs_var : float
        Variance of the observation noise on ``tanh(x(t))``.
    guard : float
        Largest accepted ``|x|`` before the run is declared blown up.
    """

    a: float = DELAY['a']
    b: float = DELAY['b']
    sigma: float = DELAY['sigma']
    delay: float = DELAY['delay']
    euler_step: float = DELAY['euler_step']
    delta: float = DELAY['delta']
    obs_var: float = DELAY['obs_var']
    guard: float = DELAY['guard']

    name = 'delay'
    stability_distance = 'bl'

    def __post_init__(self):
        if self.sigma < 0 or self.obs_var <= 0:
            raise ValueError("sigma must be non-negative and obs_var "
                             "positive")
        h = self.euler_step
        object.__setattr__(self, 'lag', _steps(self.delay, h, 'delay'))
        object.__setattr__(self, 'n_inner', _steps(self.delta, h, 'delta'))

    @property
    def state_shape(self):
        return (self.lag + 1,)

    @property
    def metric(self):
        """Root mean square over the buffer."""
        n = self.lag + 1
        return MetricSpec.euclidean(np.full(n, 1.0 / n))

    @property
    def coupling_metric(self):
        """Supremum over the buffer."""
        return MetricSpec.supremum()

    def drift(self, current, delayed):
        return -self.a * current + self.b * np.sin(delayed)

    def constant_state(self, value):
        return np.full(self.state_shape, float(value))

    def draw_noise(self, rng):
        return as_generator(rng).standard_normal(self.n_inner)

    def step_buffer(self, window, noise):
        """
        Euler steps on a buffer (or a stack of buffers along the first
        axis), one per entry of ``noise`` along the last axis.
        """
        window = np.array(window, dtype=float)
        h = self.euler_step
        scale = self.sigma * np.sqrt(h)
        for xi in np.moveaxis(np.asarray(noise, dtype=float), -1, 0):
            current = window[..., -1]
            new = (current + self.drift(current, window[..., 0]) * h
                   + scale * xi)
            if not np.all(np.abs(new) <= self.guard):
                raise NumericalBlowupError(
                    "Delay state left the guard |x| <= {0:g}".format(
                        self.guard))
            window = np.concatenate([window[..., 1:], new[..., None]],
                                    axis=-1)
        return window

    def step(self, window, noise):
        return sdde_step(self, window, noise)

    def propagate(self, atoms, rng):
        rng = as_generator(rng)
        atoms = np.asarray(atoms, dtype=float)
        noise = rng.standard_normal((atoms.shape[0], self.n_inner))
        return self.step_buffer(atoms, noise)

    def field(self, window):
        return np.tanh(np.asarray(window)[..., -1:])

    def observe(self, window, rng):
        noise = as_generator(rng).standard_normal(1)
        return self.field(window) + np.sqrt(self.obs_var) * noise

    def obs_logpdf(self, atoms, y):
        return norm.logpdf(y, self.field(atoms),
                           np.sqrt(self.obs_var)).sum(axis=-1)

    def hellinger_gap(self, window, window_b):
        return gaussian_hellinger_gap(self.field(window)
                                      - self.field(window_b), self.obs_var)

    def sample_prior(self, rng, n, shift=None):
        """
        Constant buffers at ``N(0, sigma^2 / (2 a))`` levels, translated by
        ``shift``.
        """
        rng = as_generator(rng)
        level = rng.standard_normal(n) * self.sigma / np.sqrt(2 * self.a)
        atoms = np.repeat(level[:, None], self.lag + 1, axis=1)
        if shift is not None:
            atoms = atoms + np.asarray(shift, dtype=float)
        return AtomicMeasure.uniform(atoms)


def sdde_step(model, window, noise):
    """Advance a buffer of length ``r / h + 1`` by one sampling interval."""
    window = np.asarray(window, dtype=float)
    if window.shape[-1] != model.lag + 1:
        raise ValueError("Expected a buffer of length {0}, got {1}".format(
            model.lag + 1, window.shape[-1]))
    return model.step_buffer(window, noise)


def dissipativity_constant(model):
    """
    ``a - |b|``. Since ``|sin u - sin v| <= |u - v|``, the difference of two
    synchronously driven solutions obeys
    ``d/dt |e| <= -a |e(t)| + |b| sup_{[t - r, t]} |e|``, which contracts
    when the constant is positive.
    """
    return model.a - abs(model.b)

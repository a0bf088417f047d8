# Licensed under a 3-clause BSD style license - see LICENSE.rst
"""
Two-dimensional Navier-Stokes equation on the torus in vorticity form,
truncated to a small pseudo-spectral grid.

Vorticity is stored as its Fourier coefficients on the full FFT grid,
``v(z) = sum_k v_k exp(i k.z)``, with every mode outside the 2/3 dealiasing
box (and the zero mode) held at zero. The velocity is recovered from
``u_k = -i k_perp v_k / |k|^2`` with ``k_perp = (-k2, k1)``.
"""
from dataclasses import dataclass
from functools import reduce
from itertools import combinations
from math import gcd

import numpy as np
from scipy.stats import norm

from ..conf import NAVIER_STOKES
from ..exceptions import CFLViolationError
from ..measure_core import AtomicMeasure, MetricSpec, gaussian_hellinger_gap
from ..rng import as_generator

__all__ = ['NSModel', 'ns_step', 'ns_observe', 'check_forcing_set']


def check_forcing_set(forced, cutoff):
    """
    Return the problems with a forced set as a list of sentences (empty
    when the set is admissible).
    """
    problems = []
    forced = [tuple(int(c) for c in k) for k in forced]
    if not forced:
        return ["The forced set is empty"]
    for k in forced:
        if k == (0, 0):
            problems.append("The zero mode cannot be forced")
        elif max(abs(k[0]), abs(k[1])) > cutoff:
            problems.append("Forced mode {0} lies outside the retained "
                            "modes |k_i| <= {1}".format(k, cutoff))
    if set(forced) != {(-a, -b) for a, b in forced}:
        problems.append("The forced set must be symmetric, Z = -Z")
    if len({k[0] ** 2 + k[1] ** 2 for k in forced}) < 2:
        problems.append("The forced set must contain two modes of different "
                        "length")
    minors = [abs(a[0] * b[1] - a[1] * b[0])
              for a, b in combinations(set(forced), 2)]
    if reduce(gcd, minors, 0) != 1:
        problems.append("Integer linear combinations of the forced modes "
                        "must generate Z^2")
    return problems


@dataclass(frozen=True, eq=False)
class NSModel:
    """
    Stochastically forced vorticity equation on a ``2 k_max`` square grid.

    Parameters
    ----------
    k_max : int
        Half the grid size; modes with ``max(|k1|, |k2|) <= 2 k_max // 3``
        are retained.
    viscosity : float
    forced : tuple of (int, int)
        Forced wavenumbers; must satisfy `check_forcing_set`.
    amplitude : float
        Common forcing amplitude ``sigma_k``.
    inner_step : float
        Time step ``h``; ``delta / h`` must be an integer.
    delta : float
        Sampling interval.
    obs_points : tuple of (float, float)
    obs_var : float
    """

    k_max: int = NAVIER_STOKES['k_max']
    viscosity: float = NAVIER_STOKES['viscosity']
    forced: tuple = NAVIER_STOKES['forced']
    amplitude: float = NAVIER_STOKES['amplitude']
    inner_step: float = NAVIER_STOKES['inner_step']
    delta: float = NAVIER_STOKES['delta']
    obs_points: tuple = NAVIER_STOKES['obs_points']
    obs_var: float = NAVIER_STOKES['obs_var']

    name = 'navier_stokes'
    stability_distance = 'bl'

    def __post_init__(self):
        n = 2 * self.k_max
        cutoff = n // 3
        problems = check_forcing_set(self.forced, cutoff)
        if problems:
            raise ValueError('; '.join(problems))
        if self.viscosity <= 0 or self.obs_var <= 0 or self.amplitude < 0:
            raise ValueError("viscosity and obs_var must be positive")
        n_inner = int(round(self.delta / self.inner_step))
        if n_inner < 1 or abs(n_inner * self.inner_step - self.delta) > 1e-9:
            raise ValueError("delta must be a multiple of inner_step")

        k = np.fft.fftfreq(n, 1.0 / n)
        K1, K2 = np.meshgrid(k, k, indexing='ij')
        ksq = K1 ** 2 + K2 ** 2
        mask = np.maximum(np.abs(K1), np.abs(K2)) <= cutoff
        mask[0, 0] = False
        h = self.inner_step

        forced = tuple(tuple(int(c) for c in kk) for kk in self.forced)
        half = [kk for kk in forced if (kk[0], kk[1]) > (0, 0)]
        plus = tuple(np.array([[a % n for a, _ in half],
                               [b % n for _, b in half]]))
        minus = tuple(np.array([[-a % n for a, _ in half],
                                [-b % n for _, b in half]]))
        lam = self.viscosity * np.array([a * a + b * b for a, b in half],
                                        dtype=float)
        scale = self.amplitude * np.sqrt(-np.expm1(-2 * lam * h) / (2 * lam))

        points = np.asarray(self.obs_points, dtype=float).reshape(-1, 2)
        phases = np.exp(1j * (points[:, 0, None, None] * K1
                              + points[:, 1, None, None] * K2))

        for name, value in [('grid', n), ('n_inner', n_inner),
                            ('K1', K1), ('K2', K2), ('ksq', ksq),
                            ('inv_ksq', np.where(ksq > 0, 1.0 / np.where(
                                ksq > 0, ksq, 1.0), 0.0)),
                            ('mask', mask), ('forced', forced),
                            ('_plus', plus), ('_minus', minus),
                            ('_forcing_scale', scale),
                            ('_decay', np.exp(-self.viscosity * ksq * h)),
                            ('obs_points', tuple(map(tuple, points))),
                            ('_phases', phases)]:
            object.__setattr__(self, name, value)

    @property
    def state_shape(self):
        return (self.grid, self.grid)

    @property
    def n_pairs(self):
        return self._plus[0].size

    @property
    def metric(self):
        """``L^2`` norm of the vorticity coefficients."""
        return MetricSpec.euclidean()

    @property
    def coupling_metric(self):
        """``H^1`` norm, weights ``|k|^2`` (1 on the unused zero mode)."""
        return MetricSpec.sobolev(np.sqrt(np.where(self.ksq > 0, self.ksq,
                                                   1.0)), s=1.0)

    # -- spectral helpers ---------------------------------------------------

    def physical(self, coeffs):
        """Grid values of a field given by its coefficients."""
        return np.fft.ifft2(coeffs).real * self.grid ** 2

    def spectral(self, values):
        return np.fft.fft2(values) / self.grid ** 2

    def symmetrize(self, v):
        """Project onto real fields with the retained modes only."""
        mirror = np.roll(np.flip(v, axis=(-2, -1)), 1, axis=(-2, -1))
        return 0.5 * (v + np.conj(mirror)) * self.mask

    def velocity_hat(self, v):
        psi = v * self.inv_ksq
        return 1j * self.K2 * psi, -1j * self.K1 * psi

    def divergence_hat(self, v):
        u1, u2 = self.velocity_hat(v)
        return 1j * self.K1 * u1 + 1j * self.K2 * u2

    def nonlinear(self, v):
        """``-(u . grad) v`` with 2/3 dealiasing."""
        u1_hat, u2_hat = self.velocity_hat(v)
        u1 = self.physical(u1_hat)
        u2 = self.physical(u2_hat)
        speed = max(np.abs(u1).max(), np.abs(u2).max())
        cfl = speed * self.inner_step * self.grid / (2 * np.pi)
        if cfl > 1:
            raise CFLViolationError("CFL number {0:.3g} exceeds 1".format(cfl))
        advection = (u1 * self.physical(1j * self.K1 * v)
                     + u2 * self.physical(1j * self.K2 * v))
        return -self.spectral(advection) * self.mask

    def inner(self, v, xi):
        """One integrating-factor Euler step of length ``h``."""
        v = self._decay * (v + self.inner_step * self.nonlinear(v))
        z = self._forcing_scale * (xi[..., 0] + 1j * xi[..., 1]) / np.sqrt(2)
        v[(Ellipsis,) + self._plus] += z
        v[(Ellipsis,) + self._minus] += np.conj(z)
        return self.symmetrize(v)

    # -- model interface ----------------------------------------------------

    def zero_state(self):
        return np.zeros(self.state_shape, dtype=complex)

    def mode_state(self, k, amplitude=1.0):
        """Coefficients of ``amplitude * cos(k . z)``."""
        v = self.zero_state()
        n = self.grid
        v[k[0] % n, k[1] % n] += amplitude / 2
        v[-k[0] % n, -k[1] % n] += amplitude / 2
        return v * self.mask

    def draw_noise(self, rng):
        return as_generator(rng).standard_normal(
            (self.n_inner, self.n_pairs, 2))

    def step(self, v, noise):
        return ns_step(self, v, noise)

    def propagate(self, atoms, rng):
        rng = as_generator(rng)
        v = np.array(atoms, dtype=complex)
        noise = rng.standard_normal((v.shape[0], self.n_inner,
                                     self.n_pairs, 2))
        for j in range(self.n_inner):
            v = self.inner(v, noise[:, j])
        return v

    def field(self, v):
        """Velocity at the observation points, ``(u1, u2)`` per point."""
        u1_hat, u2_hat = self.velocity_hat(np.asarray(v))
        u1 = np.einsum('...ij,pij->...p', u1_hat, self._phases).real
        u2 = np.einsum('...ij,pij->...p', u2_hat, self._phases).real
        return np.stack([u1, u2], axis=-1).reshape(u1.shape[:-1] + (-1,))

    def observe(self, v, rng):
        noise = as_generator(rng).standard_normal(2 * len(self.obs_points))
        return ns_observe(self, v, noise)

    def obs_logpdf(self, atoms, y):
        mean = self.field(atoms)
        return norm.logpdf(y, mean, np.sqrt(self.obs_var)).sum(axis=-1)

    def hellinger_gap(self, v, vb):
        return gaussian_hellinger_gap(self.field(v) - self.field(vb),
                                      self.obs_var)

    def mode_variance(self):
        """Linearized stationary variance ``sigma^2 / (2 nu |k|^2)``."""
        var = np.zeros(self.state_shape)
        lam = self.viscosity * self.ksq
        var[self._plus] = self.amplitude ** 2 / (2 * lam[self._plus])
        var[self._minus] = var[self._plus]
        return var

    def sample_prior(self, rng, n, shift=None):
        """
        Cloud drawn from the linearized stationary law of the forced modes,
        optionally translated by the coefficient array ``shift``.
        """
        rng = as_generator(rng)
        scale = np.sqrt(self.mode_variance())
        z = (rng.standard_normal((n,) + self.state_shape)
             + 1j * rng.standard_normal((n,) + self.state_shape)) * scale
        atoms = self.symmetrize(z)
        if shift is not None:
            atoms = atoms + np.asarray(shift)
        return AtomicMeasure.uniform(atoms)

    def energy(self, v):
        return np.sum(np.abs(v) ** 2, axis=(-2, -1))

    def dissipation(self, v):
        """``2 nu ||v||^2_{H^1}``."""
        return 2 * self.viscosity * np.sum(self.ksq * np.abs(v) ** 2,
                                           axis=(-2, -1))

    @property
    def energy_injection(self):
        """``sum_{k in Z} sigma_k^2``."""
        return len(self.forced) * self.amplitude ** 2


def ns_step(model, v, noise):
    """Advance the coefficients ``v`` over one sampling interval."""
    noise = np.asarray(noise, dtype=float)
    if noise.shape != (model.n_inner, model.n_pairs, 2):
        raise ValueError("Expected noise of shape {0}, got {1}".format(
            (model.n_inner, model.n_pairs, 2), noise.shape))
    v = np.array(v, dtype=complex)
    for xi in noise:
        v = model.inner(v, xi)
    return v


def ns_observe(model, v, noise):
    """Velocity at the observation points plus Gaussian noise."""
    return model.field(v) + np.sqrt(model.obs_var) * np.asarray(noise)

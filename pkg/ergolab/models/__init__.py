# Licensed under a 3-clause BSD style license - see LICENSE.rst
"""
Desk-scale models.

Every continuous model exposes the same interface:

- ``draw_noise(rng)`` and ``step(x, noise)``: one sampling interval driven
  by explicit noise, so couplings can share it;
- ``propagate(atoms, rng)``: the same transition applied to a cloud;
- ``observe(x, rng)``, ``obs_logpdf(atoms, y)`` and ``hellinger_gap(x, xb)``;
- ``metric`` and ``coupling_metric``, the distances ``d <= d~``;
- ``sample_prior(rng, n, shift)``.
"""
from .delay import DelayModel, dissipativity_constant, sdde_step
from .fixtures import (FIXTURES, EmbeddedHMM, FiniteChainModel,
                       make_fixture)
from .heat import HeatModel, heat_observe, heat_step
from .navier_stokes import NSModel, check_forcing_set, ns_observe, ns_step
from .spin import SpinModel, spin_observe, spin_pair_step, spin_step

__all__ = ['MODELS', 'make_model', 'HeatModel', 'NSModel', 'SpinModel',
           'DelayModel', 'FiniteChainModel', 'EmbeddedHMM', 'FIXTURES',
           'make_fixture', 'heat_step', 'heat_observe', 'ns_step',
           'ns_observe', 'spin_step', 'spin_pair_step', 'spin_observe',
           'sdde_step',
           'dissipativity_constant', 'check_forcing_set']

MODELS = {
    'heat': HeatModel,
    'navier_stokes': NSModel,
    'spin': SpinModel,
    'delay': DelayModel,
}


def _freeze(value):
    if isinstance(value, list):
        return tuple(_freeze(v) for v in value)
    return value


def make_model(name, params=None):
    """
    Build a continuous model from its name and a parameter table (TOML
    arrays become tuples).
    """
    try:
        cls = MODELS[name]
    except KeyError:
        raise ValueError("Unknown model {0!r}; known models: {1}".format(
            name, ', '.join(sorted(MODELS)))) from None
    params = {key: _freeze(value) for key, value in (params or {}).items()}
    return cls(**params)

# Licensed under a 3-clause BSD style license - see LICENSE.rst
#
# This directory contains the numerical defaults shared by every part of
# ergolab (tolerances, enumeration caps, default model parameters). Rather
# than scatter them over the modules that use them, we store them in v?.py
# files and import the latest one into ergolab.conf so that code can do:
#
#     from ergolab.conf import PROB_TOL
#
# and experiment configs can pin a version with ``defaults = "v1"``. Small
# fixes may still go into v1.py, but any change that moves a reported number
# belongs in a new version that configs opt in to.

from .v1 import *  # noqa: F401, F403

AVAILABLE = ('v1',)


def load_defaults(version='v1'):
    """
    Return the defaults module for ``version`` as a plain dict of its
    upper-case names.
    """
    if version not in AVAILABLE:
        raise ValueError("Unknown defaults version {0!r}; available: {1}"
                         .format(version, ', '.join(AVAILABLE)))
    from importlib import import_module
    module = import_module('.' + version, __name__)
    return {name: getattr(module, name) for name in dir(module)
            if name.isupper()}

# Licensed under a 3-clause BSD style license - see LICENSE.rst
try:
    from .version import version as __version__  # noqa
except ImportError:  # pragma: no cover - not built with setuptools_scm
    __version__ = 'unknown'

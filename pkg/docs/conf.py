# Licensed under a 3-clause BSD style license - see LICENSE.rst

import sys

try:
    from sphinx_astropy.conf.v2 import *  # noqa: F401, F403
except ImportError:
    print('ERROR: the documentation requires the sphinx-astropy package to '
          'be installed')
    sys.exit(1)

from ergolab import __version__

project = 'ergolab'
author = 'The ergolab Developers'
copyright = '2026, ' + author

version = __version__.split('-', 1)[0]
release = __version__

extensions += ['ergolab.ext.experiment_catalog',  # noqa: F405
               'ergolab.ext.example_config']

intersphinx_mapping['scipy'] = (  # noqa: F405
    'https://docs.scipy.org/doc/scipy/', None)

html_title = '{0} v{1}'.format(project, release)
html_static_path = []

ergolab_validate_examples = True

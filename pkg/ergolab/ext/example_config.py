# Licensed under a 3-clause BSD style license - see LICENSE.rst

"""
Embed a shipped example configuration in the documentation::

    .. ergolab-config:: filter_stability_mixing3

Each embedded file is validated first, so the documented examples cannot
drift away from the schema. Validation can be switched off on the
command-line without editing conf.py::

    sphinx-build ... -D ergolab_validate_examples=0
"""
from docutils import nodes
from docutils.parsers.rst import Directive
from sphinx.util import logging
from sphinx.util.console import bold

from ergolab.exceptions import ConfigError
from ergolab.runner.config import example_path, load_config

logger = logging.getLogger(__name__)


class ExampleConfig(Directive):

    has_content = False
    required_arguments = 1

    def run(self):
        env = self.state.document.settings.env
        name = self.arguments[0]
        try:
            path = example_path(name)
        except ValueError as exc:
            raise self.error(str(exc))
        if env.config.ergolab_validate_examples:
            try:
                load_config(path)
            except ConfigError as exc:
                for message in exc.messages:
                    logger.warning(message, location=(env.docname,
                                                      self.lineno))
        env.note_dependency(path)
        with open(path, encoding='utf-8') as f:
            text = f.read()
        node = nodes.literal_block(text, text)
        node['language'] = 'toml'
        return [node]


def report_validation(app, config=None):
    info = logging.getLogger(__name__).info

    if not app.config.ergolab_validate_examples:
        info(bold('skipping validation of example configs...'))


def setup(app):
    app.add_directive('ergolab-config', ExampleConfig)
    app.add_config_value('ergolab_validate_examples', True, 'env')
    app.connect('config-inited', report_validation)
    return {'parallel_read_safe': True,
            'parallel_write_safe': True}

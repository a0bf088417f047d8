# Licensed under a 3-clause BSD style license - see LICENSE.rst
from docutils import nodes
from docutils.parsers.rst import Directive, directives


class ExperimentCatalog(Directive):
    """
    Directive to include the ergolab experiment catalog (the output of
    ``ergolab list``) in the documentation as a literal code block.

    Example::

        .. ergolab-catalog::
           :format: json

    """

    has_content = False
    option_spec = {'format': lambda arg: directives.choice(arg, ('text',
                                                                 'json'))}

    def run(self):
        from ergolab.runner.experiments import list_experiments
        fmt = self.options.get('format', 'text')
        text = list_experiments(fmt)
        node = nodes.literal_block(text, text)
        if fmt == 'json':
            node['language'] = 'json'
        return [node]


def setup(app):
    app.add_directive("ergolab-catalog", ExperimentCatalog)

    return {
        'version': '0.1',
        'parallel_read_safe': True,
        'parallel_write_safe': True,
    }

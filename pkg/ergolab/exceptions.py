# Licensed under a 3-clause BSD style license - see LICENSE.rst
"""
Exceptions raised by ergolab.

Each class also derives from the builtin exception a caller would expect, so
``except ValueError`` keeps working for bad input.
"""

__all__ = ['ErgolabError', 'DimensionError', 'CapExceededError',
           'StationaryError', 'DegenerateModelError', 'SolverError',
           'NumericalBlowupError', 'CFLViolationError',
           'CouplingOrderError', 'ConfigError']


class ErgolabError(Exception):
    """Base class for all errors raised by ergolab."""


class DimensionError(ErgolabError, ValueError):
    """Arguments live on supports of different sizes."""


class CapExceededError(ErgolabError, ValueError):
    """An enumeration or LP would exceed its configured cap."""


class StationaryError(ErgolabError, ValueError):
    """A chain has no unique stationary law."""

    def __init__(self, message, classes=()):
        super().__init__(message)
        self.classes = [list(c) for c in classes]


class DegenerateModelError(ErgolabError, ValueError):
    """A likelihood or backward variable vanished."""


class SolverError(ErgolabError, RuntimeError):
    """The LP solver did not return an optimal solution."""


class NumericalBlowupError(ErgolabError, RuntimeError):
    """A simulated state left the numerical guard region."""


class CFLViolationError(ErgolabError, RuntimeError):
    """The advective CFL number exceeded one."""


class CouplingOrderError(ErgolabError, AssertionError):
    """A monotone coupling produced an order violation."""


class ConfigError(ErgolabError, ValueError):
    """
    An experiment configuration failed validation.

    ``messages`` holds one line-anchored message per problem.
    """

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__('\n'.join(self.messages))

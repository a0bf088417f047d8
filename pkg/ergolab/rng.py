# Licensed under a 3-clause BSD style license - see LICENSE.rst
"""
Reproducible random streams.

Every stream is a Philox (counter-based) generator keyed by
``(seed, replica, role)``; the role name is reduced with CRC-32 so the key is
the same on every host and in every language that implements Philox-4x64.
"""
import zlib

import numpy as np

__all__ = ['stream', 'as_generator', 'role_key']


def role_key(role):
    return zlib.crc32(role.encode('utf-8'))


def stream(seed, replica=0, role='main'):
    """
    Return the generator for one ``(seed, replica, role)`` triple.

    >>> a = stream(7, 1, 'observations').standard_normal()
    >>> b = stream(7, 1, 'observations').standard_normal()
    >>> a == b
    True
    """
    if seed is None:
        raise ValueError("An explicit seed is required")
    seq = np.random.SeedSequence(int(seed),
                                 spawn_key=(int(replica), role_key(role)))
    return np.random.Generator(np.random.Philox(seq))


def as_generator(seed):
    """Accept an int seed or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(seed)

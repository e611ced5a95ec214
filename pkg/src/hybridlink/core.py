"""Numeric substrate: unitary DFTs and reproducible random streams.

Complex sample buffers are plain ``numpy`` arrays throughout the package.
Time-domain buffers hold baseband samples along the last axis; frequency
domain buffers hold one value per DFT bin (or per active subcarrier).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "dft",
    "inverse_dft",
    "is_power_of_two",
    "RngStream",
    "gaussian_pair",
    "complex_normal",
]


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def _check_size(x: np.ndarray, n: int | None) -> int:
    if n is None:
        n = x.shape[-1]
    if not is_power_of_two(int(n)):
        raise ConfigurationError(f"DFT size must be a power of two, got {n}")
    if x.shape[-1] != n:
        raise ConfigurationError(
            f"frame length {x.shape[-1]} does not match DFT size {n}")
    return int(n)


def dft(x, n: int | None = None) -> np.ndarray:
    """Unitary forward DFT along the last axis.

    Both directions are scaled by ``1/sqrt(n)`` so that a white sequence
    of variance ``s2`` maps to bins of variance ``s2``.

    Parameters
    ----------
    x : array_like
        Time-domain samples; the last axis has length ``n``.
    n : int, optional
        Transform size. Must be a power of two and equal ``x.shape[-1]``.
    """
    x = np.asarray(x)
    n = _check_size(x, n)
    return np.fft.fft(x, n=n, axis=-1, norm="ortho")


def inverse_dft(x, n: int | None = None) -> np.ndarray:
    """Unitary inverse DFT along the last axis (see :func:`dft`)."""
    x = np.asarray(x)
    n = _check_size(x, n)
    return np.fft.ifft(x, n=n, axis=-1, norm="ortho")


@dataclass
class RngStream:
    """Independent, reproducible random stream.

    A stream is identified by a global ``seed`` and a ``stream_id`` (the
    trial index in Monte Carlo runs). Child streams extend the identity
    with a ``path`` so that sub-tasks of one trial (bits, channel, noise
    of each link) never share generator state. The underlying generator
    is numpy's PCG64 seeded through ``SeedSequence`` spawn keys, which
    gives statistically independent sequences for distinct identities.

    Examples
    --------
    >>> a = RngStream(7, 3).child(1).generator.standard_normal(2)
    >>> b = RngStream(7, 3).child(1).generator.standard_normal(2)
    >>> bool((a == b).all())
    True
    """

    seed: int
    stream_id: int = 0
    path: tuple = ()
    _gen: np.random.Generator | None = field(default=None, init=False,
                                             repr=False, compare=False)

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(
                int(self.seed) & (2**64 - 1),
                spawn_key=(int(self.stream_id) & (2**64 - 1),)
                + tuple(int(p) for p in self.path))
            self._gen = np.random.Generator(np.random.PCG64(ss))
        return self._gen

    def child(self, index: int) -> "RngStream":
        """Return the independent sub-stream number ``index``."""
        return RngStream(self.seed, self.stream_id, self.path + (int(index),))


def gaussian_pair(stream: RngStream, size=None):
    """Draw i.i.d. standard normal pairs from ``stream``.

    Returns two arrays (or two floats when ``size`` is None).
    """
    z = stream.generator.standard_normal(
        (2,) if size is None else (2,) + tuple(np.atleast_1d(size)))
    return z[0], z[1]


def complex_normal(rng: np.random.Generator, shape, variance=1.0) -> np.ndarray:
    """Circular complex Gaussian samples with the given variance.

    ``variance`` broadcasts against ``shape``.
    """
    z = rng.standard_normal(tuple(shape) + (2,))
    return np.sqrt(np.asarray(variance) / 2.0) * (z[..., 0] + 1j * z[..., 1])

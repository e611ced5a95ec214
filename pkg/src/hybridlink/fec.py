"""Rate-1/2 convolutional code, soft Viterbi decoder and block interleaver.

LLR sign convention: positive values favour bit 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, FramingError

__all__ = ["CodeConfig", "BlockInterleaver", "conv_encode", "viterbi_decode"]


def _parity(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    p = np.zeros_like(x)
    while np.any(x):
        p ^= x & 1
        x = x >> 1
    return p


@dataclass(frozen=True)
class CodeConfig:
    """Feed-forward convolutional code with zero-tail termination.

    Generators are given in octal with the most significant bit tapping
    the current input. The default is the K=7 (133, 171) code.
    """

    constraint_len: int = 7
    generators: tuple = (0o133, 0o171)

    def __post_init__(self):
        if self.constraint_len < 2:
            raise ConfigurationError("constraint_len must be >= 2")
        for g in self.generators:
            if not 0 < g < 2 ** self.constraint_len:
                raise ConfigurationError(f"generator {oct(g)} does not fit K")

    @property
    def n_out(self) -> int:
        return len(self.generators)

    @property
    def rate(self) -> float:
        return 1.0 / self.n_out

    @property
    def memory(self) -> int:
        return self.constraint_len - 1

    @property
    def n_states(self) -> int:
        return 1 << self.memory

    def coded_length(self, k: int) -> int:
        return self.n_out * (k + self.memory)

    def info_length(self, n_coded: int) -> int:
        if n_coded % self.n_out:
            raise FramingError("coded length must be a multiple of the output count")
        k = n_coded // self.n_out - self.memory
        if k < 1:
            raise FramingError("coded length too short for the tail")
        return k

    @cached_property
    def _trellis(self):
        # state holds the previous `memory` inputs, most recent in the MSB.
        m = self.memory
        ns = np.arange(self.n_states)
        u = ns >> (m - 1)
        # the two predecessors of `ns` differ in the bit shifted out (d)
        prev = np.stack([((ns & ((1 << (m - 1)) - 1)) << 1) | d for d in (0, 1)])
        reg = (u << m)[None, :] | prev
        out = np.stack([_parity(reg & g) for g in self.generators], axis=-1)
        # branch label = coded output pattern as an integer, first output MSB
        label = np.zeros_like(u)[None, :].repeat(2, axis=0)
        for j in range(self.n_out):
            label = (label << 1) | out[..., j]
        return u, prev, out, label


def conv_encode(bits, cfg: CodeConfig = CodeConfig()) -> np.ndarray:
    """Encode along the last axis, appending ``memory`` zero tail bits.

    Output length is ``n_out * (len + memory)`` with the outputs of each
    step interleaved (g1, g2, g1, g2, ...).
    """
    bits = np.asarray(bits, dtype=np.uint8)
    tail = np.zeros(bits.shape[:-1] + (cfg.memory,), dtype=np.uint8)
    u = np.concatenate([bits, tail], axis=-1).astype(np.int64)
    K = cfg.constraint_len
    out = []
    for g in cfg.generators:
        taps = [(g >> (K - 1 - i)) & 1 for i in range(K)]
        acc = np.zeros_like(u)
        for i, t in enumerate(taps):
            if t:
                acc[..., i:] ^= u[..., :u.shape[-1] - i]
        out.append(acc)
    coded = np.stack(out, axis=-1).reshape(u.shape[:-1] + (-1,))
    return coded.astype(np.uint8)


def viterbi_decode(llrs, cfg: CodeConfig = CodeConfig(), k: int | None = None) -> np.ndarray:
    """Soft-input maximum-likelihood decoding of zero-tail codewords.

    Finds the information sequence whose codeword maximises
    ``sum(llr * (1 - 2 * c))``. Leading axes are independent frames.
    When two paths merge with equal metrics the survivor whose dropped
    bit is 0 is kept.

    Parameters
    ----------
    llrs : array_like
        Soft values, ``(..., n_coded)``.
    k : int, optional
        Expected number of information bits; a mismatch raises
        :class:`FramingError`.
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    n_coded = llrs.shape[-1]
    k_found = cfg.info_length(n_coded)
    if k is not None and k != k_found:
        raise FramingError(f"{n_coded} soft values do not carry {k} information bits")
    lead = llrs.shape[:-1]
    L = llrs.reshape((-1, n_coded // cfg.n_out, cfg.n_out))
    B, T, n_out = L.shape
    u, prev, out, label = cfg._trellis
    S = cfg.n_states

    # metric of every output pattern: sum_j llr_j * (1 - 2 * bit_j)
    patterns = np.array([[(p >> (n_out - 1 - j)) & 1 for j in range(n_out)]
                         for p in range(1 << n_out)], dtype=np.float64)
    pattern_metric = L @ (1.0 - 2.0 * patterns).T          # (B, T, 2**n_out)

    pm = np.full((B, S), -np.inf)
    pm[:, 0] = 0.0
    decisions = np.empty((T, B, S), dtype=bool)
    for t in range(T):
        bm = pattern_metric[:, t, :]
        m0 = pm[:, prev[0]] + bm[:, label[0]]
        m1 = pm[:, prev[1]] + bm[:, label[1]]
        d = m1 > m0
        decisions[t] = d
        pm = np.where(d, m1, m0)

    state = np.zeros(B, dtype=np.int64)
    bits = np.empty((B, T), dtype=np.uint8)
    rows = np.arange(B)
    for t in range(T - 1, -1, -1):
        bits[:, t] = u[state]
        state = prev[decisions[t, rows, state].astype(np.int64), state]
    return bits[:, :k_found].reshape(lead + (k_found,))


class BlockInterleaver:
    """Row-in / column-out block permutation of ``rows * cols`` items.

    >>> BlockInterleaver(2, 3).interleave(np.arange(6))
    array([0, 3, 1, 4, 2, 5])
    """

    def __init__(self, rows: int, cols: int):
        if rows < 1 or cols < 1:
            raise ConfigurationError("interleaver dimensions must be positive")
        self.rows = int(rows)
        self.cols = int(cols)

    @property
    def size(self) -> int:
        return self.rows * self.cols

    @classmethod
    def for_frame(cls, n: int, rows: int) -> "BlockInterleaver":
        if n % rows:
            raise FramingError(f"{n} coded bits do not fill {rows} interleaver rows")
        return cls(rows, n // rows)

    def _check(self, seq):
        seq = np.asarray(seq)
        if seq.shape[-1] != self.size:
            raise FramingError(
                f"sequence of {seq.shape[-1]} items, interleaver holds {self.size}")
        return seq

    def interleave(self, seq) -> np.ndarray:
        seq = self._check(seq)
        m = seq.reshape(seq.shape[:-1] + (self.rows, self.cols))
        return np.swapaxes(m, -1, -2).reshape(seq.shape)

    def deinterleave(self, seq) -> np.ndarray:
        seq = self._check(seq)
        m = seq.reshape(seq.shape[:-1] + (self.cols, self.rows))
        return np.swapaxes(m, -1, -2).reshape(seq.shape)

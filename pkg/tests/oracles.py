"""Reference computations used as independent test oracles."""

import itertools
import math

import numpy as np


def q_function(x):
    return 0.5 * math.erfc(x / math.sqrt(2))


def bpsk_awgn_ber(ebno_db):
    g = 10 ** (ebno_db / 10)
    return q_function(math.sqrt(2 * g))


def bpsk_rayleigh_ber(ebno_db):
    g = 10 ** (ebno_db / 10)
    return 0.5 * (1 - math.sqrt(g / (1 + g)))


def shift_register_encode(bits, generators=(0o133, 0o171), K=7):
    """Textbook encoder: register of the last K inputs, newest first."""
    reg = [0] * K
    out = []
    for b in list(bits) + [0] * (K - 1):
        reg = [int(b)] + reg[:-1]
        for g in generators:
            taps = [(g >> (K - 1 - i)) & 1 for i in range(K)]
            out.append(sum(t & r for t, r in zip(taps, reg)) % 2)
    return np.array(out, dtype=np.uint8)


def codebook(k, generators=(0o133, 0o171), K=7):
    words = np.array(list(itertools.product((0, 1), repeat=k)), dtype=np.uint8)
    return words, np.array([shift_register_encode(w, generators, K) for w in words])


def brute_force_ml(llrs, words, codes):
    """Info word maximising sum(llr * (1 - 2c)) for each row of ``llrs``."""
    metric = np.asarray(llrs) @ (1.0 - 2.0 * codes.T)
    return words[np.argmax(metric, axis=-1)]


def separated(p, q):
    """True when two BER points have non-overlapping 95% intervals."""
    return (p.ber + p.ci95_halfwidth < q.ber - q.ci95_halfwidth
            or q.ber + q.ci95_halfwidth < p.ber - p.ci95_halfwidth)


def linear_codebook(k, generators=(0o133, 0o171), K=7):
    """All 2^k codewords as GF(2) combinations of the unit-vector responses.

    Convolutional codes are linear, so the reference encoder only has to
    run k times; used where enumerating 2^k words through it is too slow.
    """
    rows = np.array([shift_register_encode(np.eye(k, dtype=np.uint8)[i], generators, K)
                     for i in range(k)], dtype=np.int64)
    words = ((np.arange(2 ** k)[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(np.uint8)
    return words, (words.astype(np.int64) @ rows % 2).astype(np.uint8)

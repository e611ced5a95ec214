import numpy as np
import pytest

from hybridlink.errors import ConfigurationError, FramingError
from hybridlink.fec import BlockInterleaver, CodeConfig, conv_encode, viterbi_decode
from oracles import brute_force_ml, codebook, shift_register_encode


def test_impulse_response():
    # generator bits read MSB first: 1011011 and 1111001
    expected = [1, 1, 0, 1, 1, 1, 1, 1, 0, 0, 1, 0, 1, 1]
    np.testing.assert_array_equal(conv_encode([1]), expected)


def test_output_length_and_tail():
    cfg = CodeConfig()
    assert conv_encode(np.zeros(10)).shape == (32,)
    assert cfg.coded_length(10) == 32
    assert cfg.info_length(32) == 10
    with pytest.raises(FramingError):
        cfg.info_length(33)


def test_matches_shift_register_reference(rng):
    for _ in range(20):
        b = rng.integers(0, 2, rng.integers(1, 40))
        np.testing.assert_array_equal(conv_encode(b), shift_register_encode(b))


def test_linearity(rng):
    a = rng.integers(0, 2, 50)
    b = rng.integers(0, 2, 50)
    np.testing.assert_array_equal(conv_encode(a ^ b), conv_encode(a) ^ conv_encode(b))


def test_batched_encoding(rng):
    b = rng.integers(0, 2, (3, 17))
    out = conv_encode(b)
    for i in range(3):
        np.testing.assert_array_equal(out[i], conv_encode(b[i]))


def test_decoder_noise_free(rng):
    b = rng.integers(0, 2, (5, 100)).astype(np.uint8)
    llr = 1.0 - 2.0 * conv_encode(b)
    np.testing.assert_array_equal(viterbi_decode(llr), b)


def test_decoder_corrects_two_flips(rng):
    b = rng.integers(0, 2, 60).astype(np.uint8)
    llr = 4.0 * (1.0 - 2.0 * conv_encode(b))
    llr[[10, 40]] *= -1
    np.testing.assert_array_equal(viterbi_decode(llr), b)


def test_decoder_matches_brute_force_small(rng):
    words, codes = codebook(8)
    llr = rng.standard_normal((300, codes.shape[1]))
    np.testing.assert_array_equal(viterbi_decode(llr), brute_force_ml(llr, words, codes))


def test_decoder_length_check():
    with pytest.raises(FramingError):
        viterbi_decode(np.zeros(30), k=10)


def test_other_code():
    cfg = CodeConfig(3, (0o7, 0o5))
    b = np.array([1, 0, 1, 1], dtype=np.uint8)
    c = conv_encode(b, cfg)
    np.testing.assert_array_equal(c, shift_register_encode(b, (0o7, 0o5), 3))
    np.testing.assert_array_equal(viterbi_decode(1.0 - 2.0 * c, cfg), b)


def test_code_validation():
    with pytest.raises(ConfigurationError):
        CodeConfig(7, (0o400, 0o171))


def test_interleaver_example():
    il = BlockInterleaver(2, 3)
    np.testing.assert_array_equal(il.interleave(np.arange(6)), [0, 3, 1, 4, 2, 5])
    np.testing.assert_array_equal(il.deinterleave([0, 3, 1, 4, 2, 5]), np.arange(6))


def test_interleaver_spreads_neighbours():
    il = BlockInterleaver.for_frame(720, 36)
    pos = np.argsort(il.interleave(np.arange(720)))
    assert np.all(np.diff(pos[:20]) == 36)


def test_interleaver_errors():
    with pytest.raises(FramingError):
        BlockInterleaver.for_frame(100, 36)
    with pytest.raises(FramingError):
        BlockInterleaver(2, 3).interleave(np.arange(5))

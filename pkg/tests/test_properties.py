"""Property-based checks over randomly generated inputs."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hybridlink.combining import llr_coherent, trsd_select
from hybridlink.core import dft, inverse_dft
from hybridlink.fec import BlockInterleaver, CodeConfig, conv_encode, viterbi_decode
from hybridlink.ofdm import DiffMode, OfdmConfig, bpsk_map, demodulate, diff_detect, diff_encode, modulate

finite = st.floats(-1e3, 1e3, allow_nan=False)
bits = lambda n: arrays(np.uint8, n, elements=st.integers(0, 1))


@given(st.integers(1, 10).map(lambda e: 2 ** e).flatmap(
    lambda n: arrays(np.complex128, n, elements=st.complex_numbers(max_magnitude=1e3))))
def test_dft_parseval_and_round_trip(x):
    X = dft(x)
    e = np.sum(np.abs(x) ** 2)
    assert np.isclose(np.sum(np.abs(X) ** 2), e, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(inverse_dft(X), x, rtol=1e-12, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 60).flatmap(bits))
def test_viterbi_inverts_encoder_without_noise(b):
    code = conv_encode(b)
    llr = 4.0 * (1.0 - 2.0 * code)
    np.testing.assert_array_equal(viterbi_decode(llr, CodeConfig(), b.size), b)


@given(st.integers(1, 12), st.integers(1, 12), st.data())
def test_interleaver_round_trip(rows, cols, data):
    il = BlockInterleaver(rows, cols)
    x = data.draw(arrays(np.int64, rows * cols, elements=st.integers(-100, 100)))
    np.testing.assert_array_equal(il.deinterleave(il.interleave(x)), x)
    assert sorted(il.interleave(x).tolist()) == sorted(x.tolist())


@given(st.sampled_from(list(DiffMode)), st.integers(1, 6), st.integers(2, 8), st.data())
def test_differential_round_trip(mode, S, K, data):
    b = data.draw(arrays(np.uint8, (S, K), elements=st.integers(0, 1)))
    d = bpsk_map(b)
    np.testing.assert_allclose(diff_detect(diff_encode(d, mode), mode), d, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4).flatmap(lambda s: bits((s, 36))))
def test_ofdm_round_trip(b):
    cfg = OfdmConfig(symbols_per_frame=b.shape[0])
    grid = bpsk_map(b)
    np.testing.assert_allclose(demodulate(modulate(grid, cfg), cfg), grid, atol=1e-12)


@given(st.lists(st.tuples(finite, finite), min_size=1, max_size=30))
def test_trsd_mask_picks_the_better_link(pairs):
    a = np.abs(np.array([p[0] for p in pairs]))
    b = np.abs(np.array([p[1] for p in pairs]))
    m = trsd_select(a, b).astype(bool)
    np.testing.assert_array_equal(np.where(m, a, b), np.maximum(a, b))


@given(finite, finite, st.floats(1e-3, 1e3))
def test_coherent_llr_sign_follows_projection(re, im, var):
    y = complex(re, im)
    llr = llr_coherent(y, 1.0, var)
    assert np.sign(llr) == np.sign(re)
    assert np.isclose(llr_coherent(y, 1.0, 2 * var), llr / 2)

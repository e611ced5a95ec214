import numpy as np
import pytest

from hybridlink.channel import ChannelRealization, apply, frequency_response, plc_channel
from hybridlink.errors import ConfigurationError, DomainError, FramingError
from hybridlink.ofdm import (DiffMode, OfdmConfig, bpsk_map, bpsk_slice, demodulate,
                             diff_detect, diff_encode, modulate)

CFG = OfdmConfig()


def _grid(rng, s=4):
    return bpsk_map(rng.integers(0, 2, (s, CFG.n_active)))


def test_default_geometry():
    assert CFG.n_active == 36
    assert CFG.symbol_len == 286
    assert CFG.subcarrier_spacing == 1562.5


def test_modulated_length():
    assert modulate(np.ones((1, 36)), CFG).shape == (286,)
    assert modulate(np.ones((20, 36)), CFG).shape == (5720,)


def test_single_tone_magnitude():
    g = np.zeros((1, 36), dtype=complex)
    g[0, 5] = 1.0
    x = modulate(g, CFG)
    np.testing.assert_allclose(np.abs(x), 1 / 16, atol=1e-12)
    # tone at bin 23 + 5 = 28
    n = np.arange(256)
    np.testing.assert_allclose(x[30:], np.exp(2j * np.pi * 28 * n / 256) / 16, atol=1e-12)


def test_cyclic_prefix_copies_tail(rng):
    x = modulate(_grid(rng, 1), CFG)
    np.testing.assert_allclose(x[:30], x[-30:])


def test_round_trip(rng):
    g = _grid(rng, 6)
    np.testing.assert_allclose(demodulate(modulate(g, CFG), CFG), g, atol=1e-12)


def test_batched_frames(rng):
    g = np.stack([_grid(rng, 3) for _ in range(4)])
    x = modulate(g, CFG)
    assert x.shape == (4, 3 * 286)
    np.testing.assert_allclose(x[2], modulate(g[2], CFG))


def test_channel_within_cp_is_diagonal(rng):
    g = _grid(rng, 5)
    ch = plc_channel((0.8, 0.5, 0.3), CFG)
    Y = demodulate(apply(modulate(g, CFG), ch), CFG)
    np.testing.assert_allclose(Y, g * ch.gains, atol=1e-12)


def test_channel_longer_than_cp_breaks_orthogonality(rng):
    g = _grid(rng, 5)
    taps = np.zeros(CFG.cp_len + 5, dtype=complex)
    taps[0], taps[-1] = 1.0, 0.5
    ch = ChannelRealization(frequency_response(taps, CFG), taps, "long")
    Y = demodulate(apply(modulate(g, CFG), ch), CFG)
    err = np.abs(Y - g * ch.gains)[1:]
    assert err.max() > 1e-2


def test_config_validation():
    with pytest.raises(ConfigurationError):
        OfdmConfig(fft_size=200)
    with pytest.raises(ConfigurationError):
        OfdmConfig(active_subcarriers=(1, 1))
    with pytest.raises(ConfigurationError):
        OfdmConfig(active_subcarriers=(200,))
    with pytest.raises(ConfigurationError):
        modulate(np.ones((2, 35)), CFG)
    with pytest.raises(FramingError):
        demodulate(np.ones(287), CFG)


def test_bpsk_convention():
    np.testing.assert_array_equal(bpsk_map([0, 1]), [1.0, -1.0])
    np.testing.assert_array_equal(bpsk_slice([0.3, -0.2, 0.0]), [0, 1, 0])


@pytest.mark.parametrize("mode", list(DiffMode))
def test_differential_round_trip(rng, mode):
    d = _grid(rng, 7)
    enc = diff_encode(d, mode)
    assert enc.shape == ((8, 36) if mode is DiffMode.TDDM else (7, 37))
    np.testing.assert_allclose(diff_detect(enc, mode), d)


def test_differential_tddm_example():
    d = np.array([[1.0, -1.0], [-1.0, -1.0]])
    enc = diff_encode(d, "tddm")
    np.testing.assert_array_equal(enc, [[1, 1], [1, -1], [-1, 1]])


def test_differential_survives_common_phase(rng):
    d = _grid(rng, 4)
    enc = diff_encode(d, "fddm") * np.exp(1j * 0.7)
    np.testing.assert_allclose(diff_detect(enc, "fddm"), d, atol=1e-12)


def test_differential_rejects_non_unit():
    with pytest.raises(DomainError):
        diff_encode(np.array([[2.0]]), "tddm")

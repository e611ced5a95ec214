import numpy as np
import pytest

from hybridlink.core import RngStream, complex_normal, dft, gaussian_pair, inverse_dft
from hybridlink.errors import ConfigurationError


def test_dft_of_impulse_is_flat():
    x = np.zeros(256)
    x[0] = 1.0
    np.testing.assert_allclose(dft(x), np.full(256, 1 / 16), atol=1e-15)


def test_dft_round_trip_and_parseval(rng):
    x = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    X = dft(x)
    np.testing.assert_allclose(inverse_dft(X), x, atol=1e-12)
    assert np.isclose(np.sum(np.abs(X) ** 2), np.sum(np.abs(x) ** 2))


def test_dft_matches_explicit_sum(rng):
    n = 16
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    k = np.arange(n)
    W = np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)
    np.testing.assert_allclose(dft(x), W @ x, atol=1e-12)


@pytest.mark.parametrize("n", [0, 3, 100, 255])
def test_dft_rejects_non_power_of_two(n):
    with pytest.raises(ConfigurationError):
        dft(np.ones(n))


def test_dft_size_mismatch():
    with pytest.raises(ConfigurationError):
        dft(np.ones(8), n=16)


def test_rng_stream_reproducible_and_independent():
    a = RngStream(5, 1).child(2).generator.standard_normal(50_000)
    b = RngStream(5, 1).child(2).generator.standard_normal(50_000)
    c = RngStream(5, 2).child(2).generator.standard_normal(50_000)
    d = RngStream(5, 1).child(3).generator.standard_normal(50_000)
    np.testing.assert_array_equal(a, b)
    for other in (c, d):
        assert abs(np.corrcoef(a, other)[0, 1]) < 0.02


def test_gaussian_pair_moments():
    x, y = gaussian_pair(RngStream(1), 200_000)
    assert abs(x.mean()) < 0.01 and abs(y.mean()) < 0.01
    assert abs(x.var() - 1) < 0.02 and abs(y.var() - 1) < 0.02
    assert abs(np.corrcoef(x, y)[0, 1]) < 0.01


def test_complex_normal_is_circular(rng):
    z = complex_normal(rng, (400_000,), 2.0)
    assert abs(np.mean(np.abs(z) ** 2) - 2.0) < 0.02
    assert abs(np.mean(z ** 2)) < 0.02

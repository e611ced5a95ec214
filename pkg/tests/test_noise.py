import numpy as np
import pytest

from hybridlink.core import dft
from hybridlink.errors import ConfigurationError, DomainError
from hybridlink.noise import (AwgnNoise, CycloNoise, CycloParams, GmNoise, GmParams,
                              NoiseRegion, calibrate_to_ebno, cyclo_sample, ebno_to_noise_power,
                              gm_sample)
from hybridlink.ofdm import OfdmConfig

CFG = OfdmConfig()


def test_gm_mean_variance_formula():
    assert GmParams().mean_variance == pytest.approx(0.9 * 1 + 0.1 * 100)


def test_gm_sample_variance_and_kurtosis():
    x = gm_sample(1_000_000, GmParams(), np.random.default_rng(1))
    assert np.mean(np.abs(x) ** 2) == pytest.approx(10.9, rel=0.03)
    # real part: mixture of N(0, v/2); kurtosis 3 * sum p v^2 / (sum p v)^2
    kurt = 3 * (0.9 + 0.1 * 100 ** 2) / 10.9 ** 2
    r = x.real
    assert np.mean(r ** 4) / np.mean(r ** 2) ** 2 == pytest.approx(kurt, rel=0.1)


def test_gm_component_frequencies():
    _, var = gm_sample(200_000, GmParams(), np.random.default_rng(2), return_variance=True)
    assert np.mean(var == 100.0) == pytest.approx(0.1, abs=0.005)


@pytest.mark.parametrize("w,v", [((0.5, 0.4), (1, 2)), ((1.0,), (0.0,)), ((0.5, 0.5), (1,))])
def test_gm_validation(w, v):
    with pytest.raises(ConfigurationError):
        GmParams(w, v)


def test_cyclo_period_and_fractions():
    p = CycloParams()
    assert p.period_samples == 3333
    counts = np.bincount(p.region_table)
    assert counts.sum() == 3333
    np.testing.assert_allclose(p.time_fractions, counts / 3333)
    assert p.mean_power == pytest.approx(np.dot(counts / 3333, [1, 10, 100]))


def test_cyclo_region_ratios():
    p = CycloParams()
    x, reg = cyclo_sample((64, 3333 * 4), p, np.random.default_rng(3), return_region=True)
    v = [np.mean(np.abs(x[reg == r]) ** 2) for r in range(3)]
    assert v[1] / v[0] == pytest.approx(10, rel=0.1)
    assert v[2] / v[0] == pytest.approx(100, rel=0.1)


def test_cyclo_variance_profile_repeats():
    p = CycloParams()
    P = p.period_samples
    x = cyclo_sample((200, 2 * P), p, np.random.default_rng(4))
    prof = np.mean(np.abs(x) ** 2, axis=0)
    assert np.corrcoef(prof[:P], prof[P:])[0, 1] > 0.95


def test_cyclo_phase_offset_shifts_regions():
    p = CycloParams()
    _, r0 = cyclo_sample(100, p, np.random.default_rng(0), 0, return_region=True)
    _, r1 = cyclo_sample(100, p, np.random.default_rng(0), 1400, return_region=True)
    np.testing.assert_array_equal(r0, p.region_table[:100])
    np.testing.assert_array_equal(r1, p.region_table[1400:1500])


def test_cyclo_shaped_region_psd():
    regions = (NoiseRegion(0.0, 1.0), NoiseRegion(0.5, 10.0, (1.0, 0.8)))
    model = CycloNoise(CycloParams(regions, period_samples=1024), phase=0)
    draw = model.sample((2000, 1024), np.random.default_rng(5))
    # two FFT windows per row, both inside region 1 (samples 512..1023)
    win = draw.samples[:, 512:].reshape(-1, 256)
    emp = np.mean(np.abs(dft(win)[:, CFG.active_index]) ** 2, axis=0)
    np.testing.assert_allclose(emp, model.region_psd(CFG)[1], rtol=0.1)
    g = np.array([1.0, 0.8]) / np.linalg.norm([1.0, 0.8])
    k = CFG.active_index
    expected = 10 * np.abs(g[0] + g[1] * np.exp(-2j * np.pi * k / 256)) ** 2
    np.testing.assert_allclose(model.region_psd(CFG)[1], expected, rtol=1e-12)


def test_window_labels_and_conditional_variance():
    model = CycloNoise(CycloParams(period_samples=3333), phase=0)
    draw = model.sample((1, 3333), np.random.default_rng(6))
    d = type(draw)(draw.samples[0], draw.variance[0], draw.region[0])
    b = int(np.argmax(model.params.region_table == 1))
    starts = np.array([0, b - 100, 2400])
    labels = model.window_region(d, starts, CFG)
    # the straddling window takes the louder region
    np.testing.assert_array_equal(labels, [0, 1, 2])
    psd = model.window_psd(d, starts, CFG)
    np.testing.assert_allclose(psd[1], (100 * 1 + 156 * 10) / 256)


def test_gm_window_psd_is_mean_variance():
    model = GmNoise()
    draw = model.sample((300,), np.random.default_rng(7))
    psd = model.window_psd(draw, np.array([0]), CFG)
    assert psd.shape == (1, CFG.n_active)
    assert psd[0, 0] == pytest.approx(draw.variance[:256].mean())


def test_calibration():
    assert ebno_to_noise_power(0.0, 1.0, 0.5, 1) == pytest.approx(2.0)
    assert ebno_to_noise_power(10.0) == pytest.approx(0.1)
    m = calibrate_to_ebno(CycloNoise(), 3.0, 2.0)
    assert m.average_power == pytest.approx(2.0 / 10 ** 0.3)
    assert calibrate_to_ebno(GmNoise(), 0.0).average_power == pytest.approx(1.0)


def test_calibration_domain_errors():
    with pytest.raises(DomainError):
        ebno_to_noise_power(0.0, 0.0)
    with pytest.raises(DomainError):
        ebno_to_noise_power(0.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        calibrate_to_ebno(AwgnNoise(0.0), 3.0)


def test_region_validation():
    with pytest.raises(ConfigurationError):
        CycloParams((NoiseRegion(0.1, 1.0),))
    with pytest.raises(ConfigurationError):
        CycloParams((NoiseRegion(0.0, 1.0), NoiseRegion(0.0, 2.0)))
    with pytest.raises(ConfigurationError):
        NoiseRegion(0.0, -1.0)

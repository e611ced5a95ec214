"""Impulsive noise models for the two links.

The wireless link sees Gaussian-mixture (GM) noise, drawn independently
per sample. The PLC link sees cyclostationary noise whose period is half
the mains cycle; the period is split into temporal regions, each a
stationary Gaussian process with its own power and spectral shaping
filter.

Every model draws a :class:`NoiseDraw` which, besides the samples, keeps
the per-sample ground truth (conditional variance and region index). The
receiver-side genie statistics are computed from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import lfilter

from .errors import ConfigurationError, DomainError
from .ofdm import OfdmConfig
from .core import complex_normal

__all__ = [
    "GmParams",
    "NoiseRegion",
    "CycloParams",
    "NoiseDraw",
    "AwgnNoise",
    "GmNoise",
    "CycloNoise",
    "gm_sample",
    "cyclo_sample",
    "ebno_to_noise_power",
    "calibrate_to_ebno",
]


@dataclass(frozen=True)
class GmParams:
    """Mixture weights and component variances (relative to a base power)."""

    weights: tuple = (0.9, 0.1)
    variances: tuple = (1.0, 100.0)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        v = np.asarray(self.variances, dtype=float)
        if w.ndim != 1 or w.size == 0 or w.shape != v.shape:
            raise ConfigurationError("GM weights and variances must be equal-length lists")
        if np.any(w < 0) or not math.isclose(w.sum(), 1.0, rel_tol=0, abs_tol=1e-9):
            raise ConfigurationError("GM weights must be nonnegative and sum to 1")
        if np.any(v <= 0):
            raise ConfigurationError("GM component variances must be positive")
        object.__setattr__(self, "weights", tuple(float(x) for x in w))
        object.__setattr__(self, "variances", tuple(float(x) for x in v))

    @property
    def mean_variance(self) -> float:
        return float(np.dot(self.weights, self.variances))


@dataclass(frozen=True)
class NoiseRegion:
    """One stationary region of the cyclostationary period.

    ``start`` is the fraction of the period where the region begins;
    ``power`` multiplies the base variance; ``taps`` shape the spectrum
    (normalised to unit energy before use).
    """

    start: float
    power: float
    taps: tuple = (1.0,)

    def __post_init__(self):
        taps = np.atleast_1d(np.asarray(self.taps, dtype=complex))
        if taps.size == 0 or not np.any(taps):
            raise ConfigurationError("region shaping taps must be non-zero")
        if self.power <= 0:
            raise ConfigurationError("region power multiplier must be positive")
        object.__setattr__(self, "taps", tuple(complex(t) if np.iscomplex(t) else float(t.real)
                                               for t in taps))

    @property
    def unit_taps(self) -> np.ndarray:
        t = np.asarray(self.taps, dtype=complex)
        return t / np.linalg.norm(t)


def _default_regions():
    return (NoiseRegion(0.0, 1.0), NoiseRegion(0.4, 10.0), NoiseRegion(0.7, 100.0))


@dataclass(frozen=True)
class CycloParams:
    """Region layout of the cyclostationary PLC noise.

    The period is ``floor(sample_rate / (2 * ac_freq))`` samples unless
    ``period_samples`` is given explicitly.
    """

    regions: tuple = field(default_factory=_default_regions)
    sample_rate: float = 400_000.0
    ac_freq: float = 60.0
    period_samples: int | None = None

    def __post_init__(self):
        if self.period_samples is None:
            if self.sample_rate <= 0 or self.ac_freq <= 0:
                raise ConfigurationError("sample_rate and ac_freq must be positive")
            object.__setattr__(self, "period_samples",
                               int(self.sample_rate // (2 * self.ac_freq)))
        if self.period_samples <= 0:
            raise ConfigurationError("noise period must be at least one sample")
        regions = tuple(self.regions)
        if not regions:
            raise ConfigurationError("at least one noise region is required")
        starts = [r.start for r in regions]
        if starts[0] != 0.0:
            raise ConfigurationError("the first region must start at fraction 0")
        if any(b <= a for a, b in zip(starts, starts[1:])) or starts[-1] >= 1.0:
            raise ConfigurationError("region starts must increase strictly within [0, 1)")
        object.__setattr__(self, "regions", regions)

    @property
    def n_regions(self) -> int:
        return len(self.regions)

    @property
    def region_table(self) -> np.ndarray:
        """Region index of every sample position within one period."""
        P = self.period_samples
        frac = np.arange(P) / P
        starts = np.array([r.start for r in self.regions])
        return np.searchsorted(starts, frac, side="right") - 1

    @property
    def time_fractions(self) -> np.ndarray:
        """Share of each region in one period, counted in whole samples."""
        counts = np.bincount(self.region_table, minlength=self.n_regions)
        return counts / self.period_samples

    @property
    def powers(self) -> np.ndarray:
        return np.array([r.power for r in self.regions])

    @property
    def mean_power(self) -> float:
        return float(np.dot(self.time_fractions, self.powers))


@dataclass
class NoiseDraw:
    """Noise samples with their per-sample ground truth.

    ``variance`` is the conditional variance of each sample (the mixture
    component or region power that produced it). ``region`` is the
    temporal region index, all zeros for stationary models.
    """

    samples: np.ndarray
    variance: np.ndarray
    region: np.ndarray


def gm_sample(n, p: GmParams, rng: np.random.Generator, scale: float = 1.0,
              return_variance: bool = False):
    """Gaussian-mixture samples.

    Each sample picks component ``i`` with probability ``p.weights[i]``
    and is then circular complex Gaussian with variance
    ``scale * p.variances[i]``.
    """
    shape = tuple(np.atleast_1d(n))
    comp = rng.choice(len(p.weights), size=shape, p=p.weights)
    var = scale * np.asarray(p.variances)[comp]
    x = complex_normal(rng, shape, var)
    return (x, var) if return_variance else x


def _shaped_white(rng, shape, taps: np.ndarray) -> np.ndarray:
    """Unit-variance complex Gaussian filtered by unit-energy ``taps``."""
    if taps.size == 1:
        return complex_normal(rng, shape) * taps[0]
    pad = taps.size - 1
    w = complex_normal(rng, shape[:-1] + (shape[-1] + pad,))
    return lfilter(taps, [1.0], w, axis=-1)[..., pad:]


def cyclo_sample(n, p: CycloParams, rng: np.random.Generator, phase_offset=0,
                 scale: float = 1.0, return_region: bool = False):
    """Cyclostationary region-based noise.

    Sample ``t`` belongs to region ``r((t + phase_offset) mod period)``.
    Each region is an independent stationary process (white Gaussian
    through that region's unit-energy shaping filter) scaled by
    ``sqrt(scale * power_r)``, so the variance is periodic in
    ``period_samples``.

    Parameters
    ----------
    n : int or tuple
        Output shape; time runs along the last axis.
    phase_offset : int or array_like
        Offset in samples, broadcast against the leading axes.
    """
    shape = tuple(np.atleast_1d(n))
    t = np.arange(shape[-1])
    off = np.asarray(phase_offset, dtype=np.int64)[..., None]
    region = p.region_table[(t + off) % p.period_samples]
    region = np.broadcast_to(region, shape)
    out = np.zeros(shape, dtype=np.complex128)
    # regions sharing a filter can share one stream: their supports are disjoint
    groups: dict = {}
    for i, r in enumerate(p.regions):
        groups.setdefault(r.taps, []).append(i)
    for taps, members in groups.items():
        w = _shaped_white(rng, shape, p.regions[members[0]].unit_taps)
        gain = np.zeros(p.n_regions)
        gain[members] = np.sqrt(scale * p.powers[members])
        out += gain[region] * w
    return (out, region) if return_region else out


class _NoiseModel:
    """Shared receiver-side statistics for the noise models."""

    n_regions = 1

    def region_psd(self, cfg: OfdmConfig) -> np.ndarray:
        """True noise PSD per region and active bin, shape ``(R, K)``."""
        return np.full((1, cfg.n_active), self.average_power)

    def window_psd(self, draw: NoiseDraw, starts, cfg: OfdmConfig) -> np.ndarray:
        """Conditional per-bin noise variance of FFT windows.

        ``starts`` are the first sample index of each FFT window (after
        the CP). Returns ``(..., S, K)``.
        """
        v = _windows(draw.variance, starts, cfg.fft_size).mean(axis=-1)
        return np.repeat(v[..., None], cfg.n_active, axis=-1)

    def window_region(self, draw: NoiseDraw, starts, cfg: OfdmConfig) -> np.ndarray:
        """Region label of each FFT window (region of its centre sample)."""
        centre = np.asarray(starts) + cfg.fft_size // 2
        return draw.region[..., centre]


def _windows(x, starts, n):
    idx = np.asarray(starts)[:, None] + np.arange(n)
    return x[..., idx]


@dataclass(frozen=True)
class AwgnNoise(_NoiseModel):
    variance: float = 1.0

    def __post_init__(self):
        if not self.variance >= 0:
            raise ConfigurationError("noise variance must be nonnegative")

    @property
    def average_power(self) -> float:
        return float(self.variance)

    def scaled(self, factor: float) -> "AwgnNoise":
        return replace(self, variance=self.variance * factor)

    def sample(self, shape, rng: np.random.Generator) -> NoiseDraw:
        shape = tuple(shape)
        var = np.full(shape, float(self.variance))
        return NoiseDraw(complex_normal(rng, shape, self.variance), var,
                         np.zeros(shape, dtype=np.int64))


@dataclass(frozen=True)
class GmNoise(_NoiseModel):
    params: GmParams = GmParams()
    scale: float = 1.0

    @property
    def average_power(self) -> float:
        return self.scale * self.params.mean_variance

    def scaled(self, factor: float) -> "GmNoise":
        return replace(self, scale=self.scale * factor)

    def sample(self, shape, rng: np.random.Generator) -> NoiseDraw:
        shape = tuple(shape)
        x, var = gm_sample(shape, self.params, rng, self.scale, return_variance=True)
        return NoiseDraw(x, var, np.zeros(shape, dtype=np.int64))


@dataclass(frozen=True)
class CycloNoise(_NoiseModel):
    """Cyclostationary PLC noise.

    ``phase`` pins the AC phase (in samples) of every frame; when None a
    uniformly random phase is drawn per frame.
    """

    params: CycloParams = CycloParams()
    scale: float = 1.0
    phase: int | None = None

    @property
    def n_regions(self) -> int:
        return self.params.n_regions

    @property
    def average_power(self) -> float:
        return self.scale * self.params.mean_power

    def scaled(self, factor: float) -> "CycloNoise":
        return replace(self, scale=self.scale * factor)

    def shaping_response(self, cfg: OfdmConfig) -> np.ndarray:
        """``|G_r(k)|^2`` of each region filter on the active bins."""
        k = cfg.active_index
        rows = []
        for r in self.params.regions:
            g = r.unit_taps
            l = np.arange(g.size)
            G = g @ np.exp(-2j * np.pi * np.outer(l, k) / cfg.fft_size)
            rows.append(np.abs(G) ** 2)
        return np.array(rows)

    def region_psd(self, cfg: OfdmConfig) -> np.ndarray:
        return self.scale * self.params.powers[:, None] * self.shaping_response(cfg)

    def window_region(self, draw: NoiseDraw, starts, cfg: OfdmConfig) -> np.ndarray:
        """Loudest region each FFT window touches.

        A window straddling a boundary is labelled with the noisier
        region so its soft values are never overconfident.
        """
        reg = _windows(draw.region, starts, cfg.fft_size)
        present = np.stack([(reg == r).any(axis=-1) for r in range(self.n_regions)], axis=-1)
        loud = np.where(present, self.params.powers, -np.inf)
        return np.argmax(loud, axis=-1)

    def window_psd(self, draw: NoiseDraw, starts, cfg: OfdmConfig) -> np.ndarray:
        reg = _windows(draw.region, starts, cfg.fft_size)
        frac = np.stack([(reg == r).mean(axis=-1) for r in range(self.n_regions)], axis=-1)
        return frac @ self.region_psd(cfg)

    def sample(self, shape, rng: np.random.Generator) -> NoiseDraw:
        shape = tuple(shape)
        P = self.params.period_samples
        if self.phase is not None:
            off = np.full(shape[:-1], int(self.phase))
        else:
            off = rng.integers(0, P, size=shape[:-1])
        x, region = cyclo_sample(shape, self.params, rng, off, self.scale, return_region=True)
        var = (self.scale * self.params.powers)[region]
        return NoiseDraw(x, var, np.ascontiguousarray(region))


def ebno_to_noise_power(ebno_db: float, signal_power: float = 1.0, rate: float = 1.0,
                        bits_per_symbol: int = 1) -> float:
    """Noise variance giving ``Eb/N0 = signal_power / (rate * bps * var)``."""
    if not signal_power > 0:
        raise DomainError("signal power must be positive")
    if not rate > 0 or bits_per_symbol < 1:
        raise DomainError("rate and bits per symbol must be positive")
    return signal_power / (rate * bits_per_symbol * 10.0 ** (ebno_db / 10.0))


def calibrate_to_ebno(model, ebno_db: float, signal_power: float = 1.0,
                      rate: float = 1.0, bits_per_symbol: int = 1):
    """Rescale ``model`` so its time-average power meets the target Eb/N0.

    ``signal_power`` is the received energy per subcarrier symbol (mean
    ``|H_k|^2`` for unit-modulus constellations). With the unitary DFT
    the time-domain noise variance equals the per-bin variance, so the
    time average is the right quantity for cyclostationary noise too.
    """
    target = ebno_to_noise_power(ebno_db, signal_power, rate, bits_per_symbol)
    current = model.average_power
    if not current > 0:
        raise DomainError("cannot calibrate a model with zero power")
    return model.scaled(target / current)

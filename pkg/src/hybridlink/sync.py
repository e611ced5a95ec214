"""Preamble generation, hybrid packet detection and CFO estimation.

The preamble follows the IEEE 1901.2 layout: ``n_syncp`` identical SYNCP
symbols, one SYNCM symbol (SYNCP negated) and the first half of another
SYNCM, each symbol one FFT length long with no cyclic prefix.

Detection runs in two stages. A delayed autocorrelation at a lag of one
symbol finds the repeated SYNCP block, gives a fractional CFO estimate
from its phase and a coarse start from the SYNCP/SYNCM sign flip. A
cross-correlation against the known SYNCP|SYNCM template then refines
the start within ``search_range`` samples and picks the integer CFO.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigurationError
from .ofdm import OfdmConfig
from .core import inverse_dft

__all__ = [
    "PreambleSpec",
    "DetectionResult",
    "SyncThresholds",
    "syncp_spectrum",
    "gen_preamble",
    "preamble_grid",
    "preamble_symbol_starts",
    "delayed_corr",
    "frac_cfo_estimate",
    "apply_cfo",
    "band_limit",
    "cross_corr_refine",
    "hybrid_detect",
    "detect_all",
]


@dataclass(frozen=True)
class PreambleSpec:
    n_syncp: int = 8

    def __post_init__(self):
        if self.n_syncp not in (8, 12):
            raise ConfigurationError("n_syncp must be 8 or 12")

    def length(self, cfg: OfdmConfig) -> int:
        return self.n_syncp * cfg.fft_size + cfg.fft_size + cfg.fft_size // 2

    @property
    def n_channel_symbols(self) -> int:
        """Full symbols usable for LS channel estimation (SYNCPs + one SYNCM)."""
        return self.n_syncp + 1


@lru_cache(maxsize=None)
def _pn_bits(n: int) -> np.ndarray:
    # x^9 + x^5 + 1 LFSR, all-ones seed
    state = [1] * 9
    out = np.empty(n, dtype=np.uint8)
    for i in range(n):
        bit = state[8] ^ state[4]
        out[i] = state[8]
        state = [bit] + state[:8]
    return out


def syncp_spectrum(cfg: OfdmConfig) -> np.ndarray:
    """Frozen unit-modulus QPSK phases on the active bins."""
    b = _pn_bits(2 * cfg.n_active).reshape(-1, 2).astype(int)
    return np.exp(1j * (np.pi / 4 + np.pi / 2 * (2 * b[:, 0] + b[:, 1])))


def _syncp_time(cfg: OfdmConfig) -> np.ndarray:
    spec = np.zeros(cfg.fft_size, dtype=np.complex128)
    spec[cfg.active_index] = syncp_spectrum(cfg)
    return inverse_dft(spec)


def gen_preamble(spec: PreambleSpec = PreambleSpec(), cfg: OfdmConfig = OfdmConfig()) -> np.ndarray:
    p = _syncp_time(cfg)
    return np.concatenate([np.tile(p, spec.n_syncp), -p, -p[: cfg.fft_size // 2]])


def preamble_grid(spec: PreambleSpec = PreambleSpec(), cfg: OfdmConfig = OfdmConfig()) -> np.ndarray:
    """Known cells of the SYNCP symbols followed by the SYNCM symbol."""
    x = syncp_spectrum(cfg)
    return np.vstack([np.tile(x, (spec.n_syncp, 1)), -x[None, :]])


def preamble_symbol_starts(spec: PreambleSpec = PreambleSpec(), cfg: OfdmConfig = OfdmConfig()) -> np.ndarray:
    return np.arange(spec.n_channel_symbols) * cfg.fft_size


@dataclass
class DetectionResult:
    detected: bool
    start_index: int = -1
    frac_cfo_hz: float = 0.0
    int_cfo_bins: int = 0
    metric_peak: float = 0.0
    cfo_hz: float = 0.0


@dataclass(frozen=True)
class SyncThresholds:
    delayed: float = 0.5
    cross: float = 0.6
    search_range: int = 64
    int_cfo_range: int = 2


def delayed_corr(signal, lag: int = 256, return_corr: bool = False):
    """Normalised delayed autocorrelation.

    ``C(t) = sum_{m<lag} x[t+m] conj(x[t+m+lag])`` normalised by the
    geometric mean of the two window energies, evaluated for every
    ``t`` in ``[0, len - 2 lag]`` with running sums.
    """
    x = np.asarray(signal, dtype=np.complex128)
    if x.size <= 2 * lag:
        raise ConfigurationError("signal must be longer than two lags")
    prod = x[:-lag] * np.conj(x[lag:])
    pw = np.abs(x) ** 2
    cs = np.concatenate([[0], np.cumsum(prod)])
    ce = np.concatenate([[0.0], np.cumsum(pw)])
    n = x.size - 2 * lag + 1
    t = np.arange(n)
    C = cs[t + lag] - cs[t]
    e1 = ce[t + lag] - ce[t]
    e2 = ce[t + 2 * lag] - ce[t + lag]
    metric = np.abs(C) / np.sqrt(np.maximum(e1 * e2, 1e-300))
    return (metric, C) if return_corr else metric


def frac_cfo_estimate(corr_value, lag: int = 256, sample_rate: float = 400_000.0) -> float:
    """Frequency offset from the phase of the delayed correlation.

    Unambiguous for ``|f| < sample_rate / (2 lag)``; larger offsets wrap.
    """
    return float(-np.angle(corr_value) * sample_rate / (2 * np.pi * lag))


def apply_cfo(signal, cfo_hz: float, sample_rate: float, start: int = 0) -> np.ndarray:
    """Multiply by ``exp(2j pi f n / fs)``; pass ``-f`` to compensate."""
    x = np.asarray(signal, dtype=np.complex128)
    n = np.arange(start, start + x.shape[-1])
    return x * np.exp(2j * np.pi * cfo_hz * n / sample_rate)


def band_limit(signal, cfg: OfdmConfig = OfdmConfig(), guard_bins: int = 3) -> np.ndarray:
    """Ideal band-pass over the active subcarriers plus ``guard_bins``.

    Noise outside the occupied band is removed before acquisition, which
    raises the time-domain SNR by roughly ``fft_size / n_active``. The
    guard must cover the largest CFO the detector is meant to handle.
    """
    x = np.asarray(signal, dtype=np.complex128)
    n = x.shape[-1]
    lo = (min(cfg.active_subcarriers) - guard_bins) / cfg.fft_size
    hi = (max(cfg.active_subcarriers) + 1 + guard_bins) / cfg.fft_size
    f = np.fft.fftfreq(n)
    keep = (f >= lo - 0.5 / n) & (f <= hi)
    return np.fft.ifft(np.fft.fft(x, axis=-1) * keep, axis=-1)


def cross_corr_refine(signal, coarse_start: int, spec: PreambleSpec = PreambleSpec(),
                      cfg: OfdmConfig = OfdmConfig(), search_range: int = 64,
                      int_cfo_range: int = 2, threshold: float = 0.6) -> DetectionResult:
    """Refine the packet start with the SYNCP|SYNCM template.

    Every candidate start in ``coarse_start +- search_range`` and every
    integer bin offset in ``[-int_cfo_range, int_cfo_range]`` is scored
    by the normalised correlation between the received samples and the
    template (last SYNCP followed by SYNCM). The sign flip between the
    two halves makes the peak unique at symbol resolution.
    """
    x = np.asarray(signal, dtype=np.complex128)
    N = cfg.fft_size
    p = _syncp_time(cfg)
    tmpl = np.concatenate([p, -p])
    offset = (spec.n_syncp - 1) * N
    lo = max(coarse_start - search_range, 0)
    hi = min(coarse_start + search_range, x.size - offset - tmpl.size)
    if hi < lo:
        return DetectionResult(False)
    seg = x[lo + offset: hi + offset + tmpl.size]
    n = np.arange(seg.size)
    tn = np.linalg.norm(tmpl)
    best = (-1.0, 0, 0)
    for d in range(-int_cfo_range, int_cfo_range + 1):
        sd = seg * np.exp(-2j * np.pi * d * n / N) if d else seg
        win = sliding_window_view(sd, tmpl.size)
        num = np.abs(win @ np.conj(tmpl))
        den = np.sqrt(np.maximum((np.abs(win) ** 2).sum(axis=-1), 1e-300)) * tn
        m = num / den
        i = int(np.argmax(m))
        if m[i] > best[0]:
            best = (float(m[i]), lo + i, d)
    peak, start, d = best
    if peak < threshold:
        return DetectionResult(False, metric_peak=peak)
    return DetectionResult(True, start, 0.0, d, peak, d * cfg.subcarrier_spacing)


def hybrid_detect(signal, spec: PreambleSpec = PreambleSpec(), cfg: OfdmConfig = OfdmConfig(),
                  thresholds: SyncThresholds = SyncThresholds(), link: str = "wireless",
                  max_candidates: int = 8) -> DetectionResult:
    """Two-stage preamble detection.

    ``link="plc"`` skips every CFO step: PLC is transmitted in baseband.
    A candidate rejected by the second stage resumes the delayed
    correlation search one lag later.
    """
    x = np.asarray(signal, dtype=np.complex128)
    N = cfg.fft_size
    if x.size <= 2 * N:
        return DetectionResult(False)
    metric, C = delayed_corr(x, N, return_corr=True)
    coherent = link != "plc"
    search_from = 0
    best_peak = 0.0
    for _ in range(max_candidates):
        above = np.flatnonzero(metric[search_from:] > thresholds.delayed)
        if above.size == 0:
            break
        tc = search_from + int(above[0])
        ref = C[tc: tc + N].sum()
        tail = np.real(C[tc + N:] * np.conj(ref))
        flip = np.flatnonzero(tail < 0)
        if flip.size == 0:
            break
        coarse = tc + N + int(flip[0]) - int(round((spec.n_syncp - 1.5) * N))
        frac = 0.0
        if coherent:
            # all SYNCP pairs: far less phase noise than a single window
            a = max(coarse, 0)
            b = min(coarse + (spec.n_syncp - 1) * N, x.size - N)
            pairs = np.vdot(x[a + N: b + N], x[a:b]) if b > a else ref
            frac = frac_cfo_estimate(pairs, N, cfg.sample_rate)
        xs = apply_cfo(x, -frac, cfg.sample_rate) if frac else x
        res = cross_corr_refine(xs, coarse, spec, cfg, thresholds.search_range,
                                thresholds.int_cfo_range if coherent else 0,
                                thresholds.cross)
        best_peak = max(best_peak, res.metric_peak)
        if res.detected:
            res.frac_cfo_hz = frac
            res.cfo_hz = frac + res.int_cfo_bins * cfg.subcarrier_spacing
            return res
        search_from = tc + N
        if search_from >= metric.size:
            break
    return DetectionResult(False, metric_peak=best_peak)


def detect_all(signal, spec: PreambleSpec = PreambleSpec(), cfg: OfdmConfig = OfdmConfig(),
               thresholds: SyncThresholds = SyncThresholds(), link: str = "wireless"):
    """Scan a long capture and return every detected packet in order."""
    x = np.asarray(signal, dtype=np.complex128)
    found = []
    pos = 0
    plen = spec.length(cfg)
    while x.size - pos > 2 * cfg.fft_size:
        res = hybrid_detect(x[pos:], spec, cfg, thresholds, link)
        if not res.detected:
            break
        res.start_index += pos
        found.append(res)
        pos = max(res.start_index + plen, pos + 1)
    return found

"""Monte Carlo BER simulation of the hybrid PLC/wireless link.

A trial processes ``frames_per_trial`` frames in one vectorised batch:

    info bits -> [FEC + interleaver] -> BPSK/DBPSK grid -> per-link OFDM
    -> channel -> noise -> [sync] -> [estimation] -> per-link soft values
    -> combining scheme -> [Viterbi] -> bit errors

All schemes requested by a scenario are evaluated on the same bits,
channel draws and noise draws (common random numbers). Random streams
depend only on ``(seed, trial index)``, so results do not depend on the
Eb/N0 point being simulated nor on how trials are spread over workers.

Eb/N0 is defined per link at the receiver: ``mean|H_k|^2 * Es`` over the
noise variance, divided by code rate and bits per symbol. The nominal
code rate (1/2) is used; tail bits, preamble and CP overheads are not
charged to Eb.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import channel as chmod
from .combining import (DENOMINATOR_FLOOR, llr_coherent, llr_differential,
                        trsd_apply, trsd_select, unit_cells)
from .core import RngStream
from .errors import ConfigurationError, FramingError
from .estimation import (InstantMode, PSD_FLOOR, instantaneous_noise_power,
                         ls_channel_estimate, noise_psd_estimate)
from .fec import BlockInterleaver, CodeConfig, conv_encode, viterbi_decode
from .noise import AwgnNoise, CycloNoise, GmNoise, calibrate_to_ebno
from .ofdm import (DiffMode, OfdmConfig, bpsk_map, demodulate, diff_detect,
                   diff_encode, modulate)
from .sync import (PreambleSpec, SyncThresholds, apply_cfo, band_limit,
                   gen_preamble, hybrid_detect, preamble_grid)

__all__ = [
    "Scheme",
    "Modulation",
    "Receiver",
    "ChannelSpec",
    "LinkConfig",
    "Scenario",
    "BerPoint",
    "GainRow",
    "run_trial",
    "trial_soft_values",
    "run_sweep",
    "report",
    "points_to_csv",
    "write_csv",
    "read_csv",
    "interpolate_ebno",
]


class Scheme(str, enum.Enum):
    PLC_ONLY = "plc_only"
    WL_ONLY = "wl_only"
    ASC = "asc"
    ISC = "isc"
    PSDC = "psdc"
    TRSD = "trsd"
    DSSC = "dssc"
    MIXED = "mixed"
    EGC = "egc"


class Modulation(str, enum.Enum):
    BPSK = "bpsk_coherent"
    DBPSK_TDDM = "dbpsk_tddm"
    DBPSK_FDDM = "dbpsk_fddm"

    @property
    def differential(self) -> bool:
        return self is not Modulation.BPSK

    @property
    def diff_mode(self) -> DiffMode | None:
        return {Modulation.DBPSK_TDDM: DiffMode.TDDM,
                Modulation.DBPSK_FDDM: DiffMode.FDDM}.get(self)


class Receiver(str, enum.Enum):
    GENIE = "genie"            # known timing, channel and noise statistics
    ESTIMATED = "estimated"    # known timing, LS channel + PSD estimation
    FULL = "full"              # hybrid detection, CFO correction, estimation


@dataclass(frozen=True)
class ChannelSpec:
    """How a link's channel is realised.

    ``kind="static"`` uses ``taps`` (or the named ``preset``) for every
    frame; ``kind="rayleigh"`` draws ``n_taps`` i.i.d. taps per frame.
    """

    kind: str = "static"
    preset: str = "flat"
    taps: tuple | None = None
    n_taps: int = 4

    def __post_init__(self):
        if self.kind not in ("static", "rayleigh"):
            raise ConfigurationError(f"unknown channel kind {self.kind!r}")
        if self.kind == "static" and self.taps is None and self.preset not in chmod.PLC_PRESETS:
            raise ConfigurationError(f"unknown PLC channel preset {self.preset!r}")

    def realize(self, cfg: OfdmConfig, rng: np.random.Generator, n_frames: int):
        if self.kind == "rayleigh":
            return chmod.rayleigh_block(rng, cfg, self.n_taps, n_frames)
        return chmod.plc_channel(self.taps if self.taps is not None else self.preset, cfg)

    def signal_power(self, cfg: OfdmConfig) -> float:
        """Mean received ``|H_k|^2`` used for Eb/N0 calibration."""
        if self.kind == "rayleigh":
            return 1.0
        return self.realize(cfg, None, 1).mean_power


@dataclass(frozen=True)
class LinkConfig:
    ofdm: OfdmConfig = OfdmConfig()
    noise: object = AwgnNoise(1.0)
    channel: ChannelSpec = ChannelSpec()
    modulation: Modulation = Modulation.BPSK
    cfo_hz: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "modulation", Modulation(self.modulation))

    @property
    def data_columns(self) -> int:
        K = self.ofdm.n_active
        return K - 1 if self.modulation is Modulation.DBPSK_FDDM else K

    @property
    def tx_symbols(self) -> int:
        S = self.ofdm.symbols_per_frame
        return S + 1 if self.modulation is Modulation.DBPSK_TDDM else S

    @property
    def capacity(self) -> int:
        """Coded bits carried per frame."""
        return self.ofdm.symbols_per_frame * self.data_columns


def _default_plc():
    return LinkConfig(noise=CycloNoise(), channel=ChannelSpec("static", "lowpass3"))


def _default_wl():
    return LinkConfig(noise=GmNoise(), channel=ChannelSpec("rayleigh", n_taps=4))


@dataclass(frozen=True)
class Scenario:
    """Everything needed to reproduce one BER experiment.

    ``sweep`` is the Eb/N0 axis of the PLC link; the wireless link stays
    at ``wl_ebno_db``. An Eb/N0 of ``-inf`` erases a link (its soft
    values are zero), ``+inf`` removes its noise.
    """

    plc: LinkConfig = field(default_factory=_default_plc)
    wl: LinkConfig = field(default_factory=_default_wl)
    schemes: tuple = (Scheme.PSDC, Scheme.PLC_ONLY)
    sweep: tuple = tuple(float(x) for x in range(0, 16, 2))
    wl_ebno_db: float = 3.0
    fec: bool = False
    code: CodeConfig = CodeConfig()
    interleaver_rows: int | None = None
    seed: int = 1
    min_errors: int = 100
    max_bits: int = 10 ** 8
    frames_per_trial: int = 8
    receiver: Receiver = Receiver.GENIE
    isc_mode: InstantMode = InstantMode.GENIE
    single_weighting: str = "avg"
    preamble: PreambleSpec = PreambleSpec()
    sync: SyncThresholds = SyncThresholds()
    psd_window_cycles: float = 4.0
    ac_freq: float = 60.0
    max_trials: int | None = None

    def __post_init__(self):
        schemes = self.schemes
        if isinstance(schemes, (str, Scheme)):
            schemes = (schemes,)
        object.__setattr__(self, "schemes", tuple(Scheme(s) for s in schemes))
        object.__setattr__(self, "sweep", tuple(float(x) for x in self.sweep))
        object.__setattr__(self, "receiver", Receiver(self.receiver))
        object.__setattr__(self, "isc_mode", InstantMode(self.isc_mode))
        if not self.schemes:
            raise ConfigurationError("at least one scheme is required")
        if not self.sweep:
            raise ConfigurationError("the Eb/N0 sweep is empty")
        if self.min_errors < 1 or self.max_bits < 1 or self.frames_per_trial < 1:
            raise ConfigurationError("stop rule and batch size must be positive")
        if self.single_weighting not in ("avg", "psd", "instantaneous"):
            raise ConfigurationError("single_weighting must be avg, psd or instantaneous")
        if self.plc.capacity != self.wl.capacity:
            raise FramingError(
                f"links carry different bits per frame ({self.plc.capacity} vs "
                f"{self.wl.capacity}); the combiner needs equal bit rates")
        for s in self.schemes:
            _check_scheme(s, self.plc.modulation, self.wl.modulation)
        if self.fec:
            self.code.info_length(self.plc.capacity)
            BlockInterleaver.for_frame(self.plc.capacity, self.rows)

    @property
    def rows(self) -> int:
        return self.interleaver_rows or self.plc.data_columns

    @property
    def code_rate(self) -> float:
        return self.code.rate if self.fec else 1.0

    @property
    def info_bits_per_frame(self) -> int:
        n = self.plc.capacity
        return self.code.info_length(n) if self.fec else n


def _check_scheme(s: Scheme, plc: Modulation, wl: Modulation):
    if s in (Scheme.TRSD,) and (plc.differential or wl.differential):
        raise ConfigurationError("TRSD needs coherent modulation on both links")
    if s in (Scheme.DSSC,) and not (plc.differential and wl.differential):
        raise ConfigurationError("DSSC needs differential modulation on both links")
    if s is Scheme.MIXED and (wl.differential or not plc.differential):
        raise ConfigurationError("mixed combining needs coherent wireless and differential PLC")


@dataclass
class BerPoint:
    ebno_db: float
    scheme: str
    bit_errors: int
    bits: int

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else float("nan")

    @property
    def ci95_halfwidth(self) -> float:
        if not self.bits:
            return float("nan")
        p = self.ber
        return 1.96 * math.sqrt(p * (1 - p) / self.bits)


# --------------------------------------------------------------------------
# one trial
# --------------------------------------------------------------------------

_BITS, _PLC_CH, _WL_CH, _PLC_NOISE, _WL_NOISE, _TIMING = range(6)
_LEAD_MIN = 64
_TIMING_ADVANCE = 4   # samples the full receiver backs off into the CP


@dataclass
class _LinkState:
    """Transmit-side state of one link for one trial."""

    name: str
    cfg: LinkConfig
    ch: object
    noise_model: object
    noise: object            # NoiseDraw or None
    erased: bool
    lead: np.ndarray         # per-frame offset of the packet in the buffer
    buf_len: int
    pre_len: int


@dataclass
class _Obs:
    """What one link's receiver hands to the combiners."""

    Y: np.ndarray            # (F, S_tx, K) received cells
    H: np.ndarray            # (F, K) channel (true or estimated)
    avg: float               # average noise power
    psd: np.ndarray          # (F, S_tx, K) noise PSD of each cell's region
    inst: np.ndarray         # (F, S_tx, K) instantaneous noise power
    psd_mean: np.ndarray     # (K,) time-averaged noise PSD
    failed: np.ndarray       # (F,) detection failures
    erased: bool


def _noise_for(link: LinkConfig, ebno_db: float, rate: float):
    model = link.noise
    if (math.isinf(ebno_db) and ebno_db > 0) or model.average_power == 0:
        return model.scaled(0.0)
    return calibrate_to_ebno(model, ebno_db, link.channel.signal_power(link.ofdm), rate, 1)


def _tx_grid(link: LinkConfig, data: np.ndarray) -> np.ndarray:
    if link.modulation.differential:
        return diff_encode(data, link.modulation.diff_mode)
    return data


def _build_buffer(st: _LinkState, grid: np.ndarray, pre: np.ndarray | None):
    cfg = st.cfg.ofdm
    body = modulate(grid, cfg)
    if pre is not None:
        body = np.concatenate([np.broadcast_to(pre, body.shape[:-1] + pre.shape), body], axis=-1)
    F = body.shape[0]
    if st.buf_len == body.shape[-1]:
        return body
    buf = np.zeros((F, st.buf_len), dtype=np.complex128)
    for f in range(F):
        buf[f, st.lead[f]: st.lead[f] + body.shape[-1]] = body[f]
    return buf


def _propagate(st: _LinkState, tx: np.ndarray) -> np.ndarray:
    rx = chmod.apply(tx, st.ch)
    if st.cfg.cfo_hz:
        rx = apply_cfo(rx, st.cfg.cfo_hz, st.cfg.ofdm.sample_rate)
    if st.noise is not None:
        rx = rx + st.noise.samples
    return rx


def _window_starts(cfg: OfdmConfig, n_sym: int, offset: int) -> np.ndarray:
    return offset + np.arange(n_sym) * cfg.symbol_len + cfg.cp_len


def _gather(x: np.ndarray, starts: np.ndarray, n: int) -> np.ndarray:
    """Per-frame FFT windows: ``starts`` is (F, S) absolute indices."""
    idx = starts[..., None] + np.arange(n)
    return np.take_along_axis(x[:, None, :], idx, axis=-1)


def _receive(st: _LinkState, rx: np.ndarray, sc: Scenario, detect=None):
    """Timing, demodulation and noise/channel statistics of one link."""
    cfg = st.cfg.ofdm
    F = rx.shape[0]
    N = cfg.fft_size
    S_tx = st.cfg.tx_symbols
    true_start = st.lead.copy()
    failed = np.zeros(F, dtype=bool)
    start = true_start.copy()
    cfo = np.zeros(F)
    if sc.receiver is Receiver.FULL:
        if detect is None:
            acq = band_limit(rx, cfg, sc.sync.int_cfo_range + 1)
            link = "plc" if st.name == "plc" else "wireless"
            detect = [hybrid_detect(acq[f], sc.preamble, cfg, sc.sync, link=link)
                      for f in range(F)]
        for f, r in enumerate(detect):
            s0 = r.start_index - min(_TIMING_ADVANCE, cfg.cp_len)
            if r.detected and 0 <= s0 <= st.buf_len - (st.pre_len + S_tx * cfg.symbol_len):
                start[f] = s0
                cfo[f] = r.cfo_hz
            else:
                failed[f] = True
    else:
        # sync bypassed: timing and carrier offset are known exactly
        cfo[:] = st.cfg.cfo_hz
    if np.any(cfo):
        n = np.arange(rx.shape[-1])
        rx = rx * np.exp(-2j * np.pi * cfo[:, None] * n / cfg.sample_rate)

    data_starts = start[:, None] + _window_starts(cfg, S_tx, st.pre_len)[None, :]
    Y = np.fft.fft(_gather(rx, data_starts, N), axis=-1, norm="ortho")[..., cfg.active_index]

    true_starts = true_start[:, None] + _window_starts(cfg, S_tx, st.pre_len)[None, :]
    model = st.noise_model
    if st.noise is not None:
        inst_genie = np.stack([model.window_psd(_slice(st.noise, f), true_starts[f], cfg)
                               for f in range(F)])
        labels = np.stack([model.window_region(_slice(st.noise, f), true_starts[f], cfg)
                           for f in range(F)])
    else:
        inst_genie = np.zeros(Y.shape)
        labels = np.zeros(Y.shape[:2], dtype=np.int64)
    region_psd = model.region_psd(cfg)
    if isinstance(model, CycloNoise):
        psd_mean_true = model.params.time_fractions @ region_psd
    else:
        psd_mean_true = region_psd[0]

    if sc.receiver is Receiver.GENIE:
        H = np.broadcast_to(st.ch.gains, (F, cfg.n_active))
        avg = model.average_power
        psd = region_psd[labels]
        psd_mean = psd_mean_true
    else:
        pre_starts = start[:, None] + np.arange(sc.preamble.n_channel_symbols)[None, :] * N
        Yp = np.fft.fft(_gather(rx, pre_starts, N), axis=-1, norm="ortho")[..., cfg.active_index]
        H = ls_channel_estimate(Yp, preamble_grid(sc.preamble, cfg)).gains
        if sc.receiver is Receiver.FULL and not st.cfg.modulation.differential:
            Y = _track_phase(Y, H)
        Hs = H[:, None, :]
        avg = max(float(np.mean(2.0 * np.imag(Y * np.conj(Hs) / np.maximum(np.abs(Hs), 1e-12)) ** 2)),
                  PSD_FLOOR)
        if model.n_regions > 1:
            psd_r = _pooled_psd(Y, labels, model.n_regions, Hs, sc, st)
            fallback = np.isnan(psd_r)
            psd_r[fallback] = avg
            psd = np.take_along_axis(psd_r, labels[..., None], axis=1)
            psd_mean = psd.mean(axis=1)
        else:
            psd = np.full(Y.shape, avg)
            psd_mean = np.full(cfg.n_active, avg)

    if sc.isc_mode is InstantMode.GENIE:
        inst = inst_genie
    elif sc.isc_mode is InstantMode.MAGNITUDE:
        if st.noise is None:
            inst = np.zeros(Y.shape)
        else:
            nc = np.fft.fft(_gather(st.noise.samples, true_starts, N), axis=-1,
                            norm="ortho")[..., cfg.active_index]
            inst = instantaneous_noise_power("magnitude", noise_cells=nc)
    else:
        Hs = H[:, None, :]
        inst = instantaneous_noise_power("residual", received=Y, channel=Hs)
    return _Obs(Y, np.asarray(H), avg, psd, inst, np.asarray(psd_mean), failed, st.erased), detect


def _track_phase(Y, H):
    """Decision-directed common phase correction, symbol by symbol.

    Removes the slow rotation left by a residual CFO. Each symbol is
    first derotated by the previous symbol's phase, sliced, and its own
    phase measured against ``H * decision``.
    """
    Y = Y.copy()
    phase = np.zeros(Y.shape[0])
    for s in range(Y.shape[1]):
        y = Y[:, s] * np.exp(-1j * phase)[:, None]
        x = np.where(np.real(np.conj(H) * y) < 0, -1.0, 1.0)
        phase = phase + np.angle(np.sum(np.conj(H * x) * y, axis=-1))
        Y[:, s] = Y[:, s] * np.exp(-1j * phase)[:, None]
    return Y


def _slice(draw, f):
    from .noise import NoiseDraw
    return NoiseDraw(draw.samples[f], draw.variance[f], draw.region[f])


def _pooled_psd(Y, labels, n_regions, H, sc: Scenario, st: _LinkState):
    """Per-region PSD estimates over groups of frames spanning the window.

    Returns ``(F, R, K)``: each frame gets the estimate of its group.
    """
    cfg = st.cfg.ofdm
    F = Y.shape[0]
    window = sc.psd_window_cycles * cfg.sample_rate / sc.ac_freq
    per_frame = st.cfg.tx_symbols * cfg.symbol_len
    g = max(1, min(F, int(math.ceil(window / per_frame))))
    out = np.empty((F, n_regions, cfg.n_active))
    for a in range(0, F, g):
        b = min(F, a + g) if F - (a + g) >= g else F
        est = noise_psd_estimate(Y[a:b], labels[a:b], n_regions, channel=H[a:b])
        out[a:b] = est
        if b == F:
            break
    return out


def _soft(link: LinkConfig, obs: _Obs, weighting: str) -> np.ndarray:
    """Per-link soft values, flattened to ``(F, n_bits)``.

    A differential cell ``z = Y_cur conj(Y_prev)`` is disturbed by the
    noise of both cells, so its denominator is the mean of their two
    noise powers: ``llr = 4 Re(z) / (d_prev + d_cur)``. DSSC and EGC use
    only the phase of ``z``.
    """
    F = obs.Y.shape[0]
    if obs.erased:
        return np.zeros((F, link.capacity))
    if link.modulation.differential:
        mode = link.modulation.diff_mode
        z = diff_detect(obs.Y, mode)
        if mode is DiffMode.TDDM:
            cur, prev = np.s_[:, 1:], np.s_[:, :-1]
        else:
            cur, prev = np.s_[:, :, 1:], np.s_[:, :, :-1]
        if weighting == "unit":
            v = np.real(unit_cells(z))
        else:
            d = _denominator(obs, weighting)
            if np.ndim(d):
                d = 0.5 * (d[cur] + d[prev])
            d = np.maximum(d, DENOMINATOR_FLOOR)
            if weighting == "dssc":
                v = np.abs(obs.Y[cur]) / d * np.real(unit_cells(z))
            else:
                v = llr_differential(z, d)
    else:
        H = obs.H[:, None, :]
        if weighting == "unit":
            v = np.real(np.conj(H) * obs.Y)
        else:
            d = _denominator(obs, weighting)
            v = llr_coherent(obs.Y, H, np.maximum(d, DENOMINATOR_FLOOR))
    return v.reshape(F, -1)


def _denominator(obs: _Obs, weighting: str):
    if weighting == "avg":
        return obs.avg
    if weighting in ("psd", "dssc"):
        return obs.psd
    if weighting == "instantaneous":
        return obs.inst
    raise ConfigurationError(f"unknown weighting {weighting!r}")


_WEIGHTS = {
    Scheme.ASC: ("avg", "avg"),
    Scheme.ISC: ("instantaneous", "instantaneous"),
    Scheme.PSDC: ("psd", "psd"),
    Scheme.EGC: ("unit", "unit"),
    Scheme.DSSC: ("dssc", "dssc"),
    Scheme.MIXED: ("dssc", "avg"),
}


def _decide(sc: Scenario, llr: np.ndarray, bits: np.ndarray) -> np.ndarray:
    """Errors per frame."""
    if sc.fec:
        il = BlockInterleaver.for_frame(llr.shape[-1], sc.rows)
        est = viterbi_decode(il.deinterleave(llr), sc.code)
    else:
        est = (llr < 0).astype(np.uint8)
    return np.count_nonzero(est != bits, axis=-1)


def trial_soft_values(scenario: Scenario, ebno_db: float, trial_id: int):
    """Soft values of every scheme for one batch of frames.

    Returns ``(bits, soft)`` where ``bits`` is ``(F, k)`` and ``soft``
    maps each scheme name to ``(llrs, failed)``: the combined soft values
    in transmitted (interleaved) order, ``(F, n_coded)``, and a boolean
    per frame that no contributing link detected.
    """
    sc = scenario
    F = sc.frames_per_trial
    base = RngStream(sc.seed, trial_id)
    k = sc.info_bits_per_frame
    bits = base.child(_BITS).generator.integers(0, 2, (F, k), dtype=np.uint8)
    if sc.fec:
        coded = conv_encode(bits, sc.code)
        coded = BlockInterleaver.for_frame(coded.shape[-1], sc.rows).interleave(coded)
    else:
        coded = bits
    S = sc.plc.ofdm.symbols_per_frame

    states = {}
    with_pre = sc.receiver is not Receiver.GENIE
    for name, link, ebno, ch_id, nz_id in (
            ("plc", sc.plc, ebno_db, _PLC_CH, _PLC_NOISE),
            ("wl", sc.wl, sc.wl_ebno_db, _WL_CH, _WL_NOISE)):
        cfg = link.ofdm
        ch = link.channel.realize(cfg, base.child(ch_id).generator, F)
        pre_len = sc.preamble.length(cfg) if with_pre else 0
        body_len = pre_len + link.tx_symbols * cfg.symbol_len
        if sc.receiver is Receiver.FULL:
            t_rng = base.child(_TIMING).child(ch_id).generator
            lead = _LEAD_MIN + t_rng.integers(0, cfg.fft_size, F)
            buf_len = _LEAD_MIN + cfg.fft_size + body_len + cfg.fft_size
        else:
            lead = np.zeros(F, dtype=np.int64)
            buf_len = body_len
        erased = math.isinf(ebno) and ebno < 0
        model = link.noise if erased else _noise_for(link, ebno, sc.code_rate)
        noise = None
        if not erased and model.average_power > 0:
            noise = model.sample((F, buf_len), base.child(nz_id).generator)
        states[name] = _LinkState(name, link, ch, model, noise, erased, lead, buf_len, pre_len)

    data = {n: bpsk_map(coded).reshape(F, S, st.cfg.data_columns) for n, st in states.items()}
    pre = {n: gen_preamble(sc.preamble, st.cfg.ofdm) if with_pre else None
           for n, st in states.items()}
    obs, det = {}, {}
    for n, st in states.items():
        rx = _propagate(st, _build_buffer(st, _tx_grid(st.cfg, data[n]), pre[n]))
        obs[n], det[n] = _receive(st, rx, sc)

    soft = {}
    for s in sc.schemes:
        if s is Scheme.TRSD:
            soft[s.value] = _trsd(sc, states, data, pre, obs, det)
        elif s in (Scheme.PLC_ONLY, Scheme.WL_ONLY):
            name = "plc" if s is Scheme.PLC_ONLY else "wl"
            link = sc.plc if name == "plc" else sc.wl
            soft[s.value] = (_soft(link, obs[name], sc.single_weighting), obs[name].failed)
        else:
            wp, ww = _WEIGHTS[s]
            op, ow = obs["plc"], obs["wl"]
            # a link that missed the packet contributes nothing to the sum
            llr = (np.where(op.failed[:, None], 0.0, _soft(sc.plc, op, wp))
                   + np.where(ow.failed[:, None], 0.0, _soft(sc.wl, ow, ww)))
            soft[s.value] = (llr, op.failed & ow.failed)
    return bits, soft


def run_trial(scenario: Scenario, ebno_db: float, trial_id: int) -> dict:
    """Simulate one batch of frames at PLC Eb/N0 ``ebno_db``.

    Returns ``{scheme: (bit_errors, bits)}`` for every scheme of the
    scenario. With the full receiver a link that misses a packet has its
    soft values zeroed; a frame that no contributing link detected counts
    all of its bits as errors.
    """
    bits, soft = trial_soft_values(scenario, ebno_db, trial_id)
    k = bits.shape[-1]
    out = {}
    for name, (llr, failed) in soft.items():
        errs = np.where(failed, k, _decide(scenario, llr, bits))
        out[name] = (int(errs.sum()), bits.size)
    return out


def _trsd(sc: Scenario, states, data, pre, obs, det):
    """Transmit selection: per-subcarrier medium chosen from the CNRs.

    The mask uses the receiver's channel knowledge (true or estimated)
    and time-averaged noise PSDs, fed back without delay or error.
    """
    op, ow = obs["plc"], obs["wl"]
    cnr_p = np.abs(op.H) ** 2 / np.maximum(op.psd_mean, DENOMINATOR_FLOOR)
    cnr_w = np.abs(ow.H) ** 2 / np.maximum(ow.psd_mean, DENOMINATOR_FLOOR)
    if op.erased:
        cnr_p = np.zeros_like(cnr_p)
    if ow.erased:
        cnr_w = np.zeros_like(cnr_w)
    mask = trsd_select(cnr_p, cnr_w)                       # (F, K)
    g_plc, g_wl = trsd_apply(data["plc"], mask)
    res = {}
    for n, g in (("plc", g_plc), ("wl", g_wl)):
        st = states[n]
        rx = _propagate(st, _build_buffer(st, g, pre[n]))
        o, _ = _receive(st, rx, sc, det[n])
        # statistics that do not depend on the data come from the full-power pass
        o = replace(o, H=obs[n].H, avg=obs[n].avg, psd=obs[n].psd)
        res[n] = np.where(obs[n].failed[:, None], 0.0, _soft(st.cfg, o, "psd"))
    m = np.broadcast_to(mask[:, None, :], data["plc"].shape).reshape(mask.shape[0], -1)
    llr = np.where(m.astype(bool), res["plc"], res["wl"])
    return llr, op.failed & ow.failed


# --------------------------------------------------------------------------
# sweeps
# --------------------------------------------------------------------------

def _trial_job(args):
    sc, ebno, tid = args
    return run_trial(sc, ebno, tid)


def _done(sc: Scenario, acc: dict) -> bool:
    return all(e >= sc.min_errors or b >= sc.max_bits for e, b in acc.values())


def _run_point(sc: Scenario, ebno: float, pool, workers: int) -> dict:
    acc = {s.value: (0, 0) for s in sc.schemes}
    tid = 0
    chunk = max(1, workers) * 2
    while not _done(sc, acc):
        if sc.max_trials is not None and tid >= sc.max_trials:
            break
        ids = range(tid, tid + (chunk if pool else 1))
        if sc.max_trials is not None:
            ids = range(tid, min(tid + len(ids), sc.max_trials))
        jobs = [(sc, ebno, i) for i in ids]
        results = pool.map(_trial_job, jobs) if pool else map(_trial_job, jobs)
        for r in results:
            if _done(sc, acc):
                break
            for s, (e, b) in r.items():
                E, B = acc[s]
                acc[s] = (E + e, B + b)
            tid += 1
        else:
            continue
        break
    return acc


def run_sweep(scenario: Scenario, workers: int = 1, progress=None) -> list:
    """Run every Eb/N0 point until the stop rule holds.

    Trials are consumed strictly in index order and the stop rule is
    evaluated after each one, so the output is identical for any number
    of workers. Rows are ordered by scheme (as listed) then Eb/N0.
    """
    sc = scenario
    per_point = {}
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for ebno in sc.sweep:
            per_point[ebno] = _run_point(sc, ebno, pool, workers)
            if progress is not None:
                progress(ebno, per_point[ebno])
    finally:
        if pool is not None:
            pool.shutdown()
    return [BerPoint(ebno, s.value, *per_point[ebno][s.value])
            for s in sc.schemes for ebno in sc.sweep]


# --------------------------------------------------------------------------
# CSV and gain reports
# --------------------------------------------------------------------------

CSV_COLUMNS = ("scheme", "ebno_db", "bits", "bit_errors", "ber", "ci95")


def points_to_csv(points) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for p in points:
        w.writerow([p.scheme, f"{p.ebno_db:.6g}", p.bits, p.bit_errors,
                    f"{p.ber:.6e}", f"{p.ci95_halfwidth:.6e}"])
    return buf.getvalue()


def write_csv(points, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(points_to_csv(points))


def read_csv(path) -> list:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and set(CSV_COLUMNS) - set(rows[0]):
        raise ConfigurationError(f"{path}: missing columns {set(CSV_COLUMNS) - set(rows[0])}")
    return [BerPoint(float(r["ebno_db"]), r["scheme"], int(r["bit_errors"]), int(r["bits"]))
            for r in rows]


def interpolate_ebno(points, target_ber: float) -> float | None:
    """Eb/N0 where a curve crosses ``target_ber``.

    Interpolates log10(BER) linearly in Eb/N0 between the first pair of
    neighbouring points that brackets the target. Points with zero
    errors are skipped. Returns None when the target is not reached.
    """
    pts = sorted((p.ebno_db, p.ber) for p in points if p.bits and p.bit_errors > 0)
    lt = math.log10(target_ber)
    for (x0, b0), (x1, b1) in zip(pts, pts[1:]):
        y0, y1 = math.log10(b0), math.log10(b1)
        if (y0 - lt) * (y1 - lt) <= 0 and y0 != y1:
            return x0 + (lt - y0) * (x1 - x0) / (y1 - y0)
        if y0 == lt:
            return x0
    if pts and math.log10(pts[-1][1]) == lt:
        return pts[-1][0]
    return None


@dataclass
class GainRow:
    scheme: str
    baseline: str
    ebno_db: float | None
    baseline_ebno_db: float | None

    @property
    def gain_db(self) -> float | None:
        if self.ebno_db is None or self.baseline_ebno_db is None:
            return None
        return self.baseline_ebno_db - self.ebno_db

    def __str__(self):
        g = self.gain_db
        gs = "not reached" if g is None else f"{g:.2f} dB"
        return f"{self.scheme} vs {self.baseline}: {gs}"


def _by_scheme(points):
    out = {}
    for p in points:
        out.setdefault(p.scheme, []).append(p)
    return out


def report(points, baseline_points, target_ber: float = 1e-4) -> list:
    """Eb/N0 gain of every curve in ``points`` over each baseline curve."""
    rows = []
    base = _by_scheme(baseline_points)
    for scheme, pts in _by_scheme(points).items():
        x = interpolate_ebno(pts, target_ber)
        for bname, bpts in base.items():
            if bname == scheme and bpts is pts:
                continue
            rows.append(GainRow(scheme, bname, x, interpolate_ebno(bpts, target_ber)))
    return rows

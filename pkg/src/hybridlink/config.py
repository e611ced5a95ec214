"""Scenario files: INI-style ``key = value`` with dotted sections.

Example::

    [scenario]
    schemes = psdc, plc_only
    sweep = 0:14:2          ; start:stop:step, stop included
    wl_ebno_db = 3
    fec = off

    [plc]
    modulation = bpsk_coherent

    [plc.channel]
    kind = static
    preset = lowpass3

    [plc.noise]
    kind = cyclo
    starts = 0, 0.4, 0.7
    powers = 1, 10, 100
    taps.2 = 1, 0.5

    [wl.noise]
    kind = gm
    weights = 0.9, 0.1
    variances = 1, 100

Every key is checked; unknown sections or keys raise
:class:`ConfigurationError`. Link sections default to the built-in
scenario, and ``[ofdm]`` applies to both links unless ``[plc.ofdm]`` or
``[wl.ofdm]`` overrides it.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import fields, replace
from pathlib import Path

from .channel import load_taps
from .errors import ConfigurationError
from .fec import CodeConfig
from .noise import AwgnNoise, CycloNoise, CycloParams, GmNoise, GmParams, NoiseRegion
from .ofdm import OfdmConfig
from .simulator import ChannelSpec, LinkConfig, Scenario
from .sync import PreambleSpec, SyncThresholds

__all__ = ["load_scenario", "parse_scenario"]

_SCENARIO_KEYS = {
    "schemes", "sweep", "wl_ebno_db", "fec", "interleaver_rows", "seed",
    "min_errors", "max_bits", "frames_per_trial", "receiver", "isc_mode",
    "single_weighting", "psd_window_cycles", "ac_freq", "max_trials",
}
_OFDM_KEYS = {"fft_size", "cp_len", "active", "sample_rate", "symbols_per_frame"}
_LINK_KEYS = {"modulation", "cfo_hz"}
_CHANNEL_KEYS = {"kind", "preset", "taps", "taps_file", "n_taps"}
_NOISE_KEYS = {"kind", "variance", "weights", "variances", "starts", "powers",
               "ac_freq", "phase", "period_samples"}
_SYNC_KEYS = {"n_syncp", "delayed_threshold", "cross_threshold", "search_range",
              "int_cfo_range"}
_CODE_KEYS = {"constraint_len", "generators"}


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.replace(",", " ").split())


def _complex_list(text: str) -> tuple:
    return tuple(complex(v.replace(" ", "")) for v in text.split(","))


def _int_range(text: str) -> tuple:
    text = text.strip()
    if ":" in text:
        a, b = (int(v) for v in text.split(":"))
        return tuple(range(a, b + 1))
    return tuple(int(v) for v in text.replace(",", " ").split())


def _sweep(text: str) -> tuple:
    text = text.strip()
    if ":" in text:
        parts = [float(v) for v in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ConfigurationError("sweep range must be start:stop:step with step > 0")
        a, b, st = parts
        n = int(math.floor((b - a) / st + 1e-9)) + 1
        return tuple(round(a + i * st, 10) for i in range(n))
    return _floats(text)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "yes", "true", "on"):
        return True
    if t in ("0", "no", "false", "off"):
        return False
    raise ConfigurationError(f"not a boolean: {text!r}")


def _check_keys(name, section, allowed, prefixes=()):
    for key in section:
        if key in allowed or any(key.startswith(p) for p in prefixes):
            continue
        raise ConfigurationError(f"unknown key {key!r} in [{name}]")


def _ofdm(base: OfdmConfig, sec) -> OfdmConfig:
    kw = {}
    for key, val in sec.items():
        if key == "active":
            kw["active_subcarriers"] = _int_range(val)
        elif key == "sample_rate":
            kw[key] = float(val)
        else:
            kw[key] = int(val)
    return replace(base, **kw)


def _channel(base: ChannelSpec, sec, root: Path) -> ChannelSpec:
    kw = {}
    for key, val in sec.items():
        if key == "n_taps":
            kw[key] = int(val)
        elif key == "taps":
            kw["taps"] = _complex_list(val)
        elif key == "taps_file":
            kw["taps"] = tuple(load_taps(root / val))
        else:
            kw[key] = val.strip()
    return ChannelSpec(**{**{f.name: getattr(base, f.name) for f in fields(base)}, **kw})


def _noise(base, sec, ofdm: OfdmConfig):
    kind = sec.get("kind", _kind_of(base)).strip()
    if kind == "none":
        _only(sec, {"kind"}, "noise")
        return AwgnNoise(0.0)
    if kind == "awgn":
        _only(sec, {"kind", "variance"}, "noise")
        return AwgnNoise(float(sec.get("variance", 1.0)))
    if kind == "gm":
        _only(sec, {"kind", "weights", "variances"}, "noise")
        d = GmParams()
        return GmNoise(GmParams(
            _floats(sec["weights"]) if "weights" in sec else d.weights,
            _floats(sec["variances"]) if "variances" in sec else d.variances))
    if kind == "cyclo":
        _only(sec, {"kind", "starts", "powers", "ac_freq", "phase", "period_samples"},
              "noise", prefixes=("taps.",))
        d = CycloParams()
        starts = _floats(sec["starts"]) if "starts" in sec else tuple(r.start for r in d.regions)
        powers = _floats(sec["powers"]) if "powers" in sec else tuple(r.power for r in d.regions)
        if len(starts) != len(powers):
            raise ConfigurationError("cyclo starts and powers differ in length")
        regions = []
        for i, (s, pw) in enumerate(zip(starts, powers)):
            taps = sec.get(f"taps.{i}")
            regions.append(NoiseRegion(s, pw, _complex_list(taps) if taps else (1.0,)))
        extra = set(k for k in sec if k.startswith("taps.")) - {f"taps.{i}" for i in range(len(starts))}
        if extra:
            raise ConfigurationError(f"shaping taps for missing regions: {sorted(extra)}")
        params = CycloParams(tuple(regions), sample_rate=ofdm.sample_rate,
                             ac_freq=float(sec.get("ac_freq", d.ac_freq)),
                             period_samples=int(sec["period_samples"]) if "period_samples" in sec else None)
        phase = sec.get("phase")
        return CycloNoise(params, phase=None if phase in (None, "random") else int(phase))
    raise ConfigurationError(f"unknown noise kind {kind!r}")


def _kind_of(model) -> str:
    if isinstance(model, CycloNoise):
        return "cyclo"
    if isinstance(model, GmNoise):
        return "gm"
    return "awgn" if model.average_power > 0 else "none"


def _only(sec, allowed, name, prefixes=()):
    _check_keys(name, sec, allowed, prefixes)


def parse_scenario(text: str, root: Path | str = ".") -> Scenario:
    """Build a :class:`Scenario` from config text."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"),
                                   interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config: {exc}") from None
    root = Path(root)
    known = {"scenario", "ofdm", "sync", "code"}
    for link in ("plc", "wl"):
        known |= {link, f"{link}.ofdm", f"{link}.channel", f"{link}.noise"}
    for name in cp.sections():
        if name not in known:
            raise ConfigurationError(f"unknown section [{name}]")
    get = lambda n: dict(cp[n]) if cp.has_section(n) else {}

    try:
        return _build(get, root)
    except ConfigurationError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigurationError(str(exc)) from None


def _build(get, root: Path) -> Scenario:
    default = Scenario()
    common = get("ofdm")
    _check_keys("ofdm", common, _OFDM_KEYS)
    links = {}
    for name, base in (("plc", default.plc), ("wl", default.wl)):
        own = get(f"{name}.ofdm")
        _check_keys(f"{name}.ofdm", own, _OFDM_KEYS)
        ofdm = _ofdm(_ofdm(base.ofdm, common), own)
        sec = get(name)
        _check_keys(name, sec, _LINK_KEYS)
        ch = get(f"{name}.channel")
        _check_keys(f"{name}.channel", ch, _CHANNEL_KEYS)
        nz = get(f"{name}.noise")
        links[name] = LinkConfig(
            ofdm=ofdm,
            noise=_noise(base.noise, nz, ofdm) if nz else _retime(base.noise, ofdm),
            channel=_channel(base.channel, ch, root),
            modulation=sec.get("modulation", base.modulation).strip(),
            cfo_hz=float(sec.get("cfo_hz", base.cfo_hz)),
        )

    sec = get("scenario")
    _check_keys("scenario", sec, _SCENARIO_KEYS)
    kw = dict(plc=links["plc"], wl=links["wl"])
    for key, val in sec.items():
        if key == "schemes":
            kw[key] = tuple(v.strip() for v in val.split(",") if v.strip())
        elif key == "sweep":
            kw[key] = _sweep(val)
        elif key == "fec":
            kw[key] = _bool(val)
        elif key in ("wl_ebno_db", "psd_window_cycles", "ac_freq"):
            kw[key] = float(val)
        elif key in ("min_errors", "max_bits", "seed", "frames_per_trial",
                     "interleaver_rows", "max_trials"):
            kw[key] = int(float(val)) if key == "max_bits" else int(val)
        else:
            kw[key] = val.strip()

    sync = get("sync")
    _check_keys("sync", sync, _SYNC_KEYS)
    if "n_syncp" in sync:
        kw["preamble"] = PreambleSpec(int(sync.pop("n_syncp")))
    th = SyncThresholds()
    kw["sync"] = SyncThresholds(
        delayed=float(sync.get("delayed_threshold", th.delayed)),
        cross=float(sync.get("cross_threshold", th.cross)),
        search_range=int(sync.get("search_range", th.search_range)),
        int_cfo_range=int(sync.get("int_cfo_range", th.int_cfo_range)),
    )
    code = get("code")
    _check_keys("code", code, _CODE_KEYS)
    if code:
        c = CodeConfig()
        gens = code.get("generators")
        kw["code"] = CodeConfig(
            int(code.get("constraint_len", c.constraint_len)),
            tuple(int(g, 8) for g in gens.replace(",", " ").split()) if gens else c.generators)
    return Scenario(**kw)


def _retime(model, ofdm: OfdmConfig):
    """Keep the cyclo period tied to the link's sample rate."""
    if isinstance(model, CycloNoise) and model.params.sample_rate != ofdm.sample_rate:
        return replace(model, params=replace(model.params, sample_rate=ofdm.sample_rate,
                                             period_samples=None))
    return model


def load_scenario(path) -> Scenario:
    """Read a scenario file; relative tap files resolve next to it."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    return parse_scenario(text, path.parent)

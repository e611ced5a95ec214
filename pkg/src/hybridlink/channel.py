"""Per-link channel realizations.

The PLC channel is a deterministic tap-delay line chosen from named
presets (or a user tap list); the wireless channel is Rayleigh block
fading, redrawn every frame.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .ofdm import OfdmConfig, demodulate, modulate
from .core import complex_normal

__all__ = [
    "PLC_PRESETS",
    "ChannelRealization",
    "frequency_response",
    "plc_channel",
    "rayleigh_block",
    "apply",
    "load_taps",
]

# Illustrative impulse responses at 400 kHz sampling; not measured data.
PLC_PRESETS = {
    "flat": (1.0,),
    "lowpass3": (0.8, 0.5, 0.3),
    "multipath5": (0.9, 0.0, -0.35, 0.2j, 0.15),
}


def frequency_response(taps, cfg: OfdmConfig) -> np.ndarray:
    """Channel gains ``H_k = sum_l h_l exp(-2j pi k l / N)`` on active bins."""
    taps = np.asarray(taps, dtype=np.complex128)
    l = np.arange(taps.shape[-1])
    k = cfg.active_index
    phasors = np.exp(-2j * np.pi * np.outer(l, k) / cfg.fft_size)
    return taps @ phasors


@dataclass(frozen=True)
class ChannelRealization:
    """Frequency response on active bins plus the generating taps.

    ``gains`` has shape ``(..., n_active)``; for Rayleigh batches the
    leading axis indexes frames. ``taps`` is ``None`` for a purely
    frequency-domain channel.
    """

    gains: np.ndarray
    taps: np.ndarray | None
    model: str

    @property
    def mean_power(self) -> float:
        return float(np.mean(np.abs(self.gains) ** 2))


def plc_channel(preset="flat", cfg: OfdmConfig = OfdmConfig()) -> ChannelRealization:
    """Deterministic PLC channel from a preset name or a tap list."""
    if isinstance(preset, str):
        try:
            taps = PLC_PRESETS[preset]
        except KeyError:
            raise ConfigurationError(
                f"unknown PLC channel preset {preset!r}; "
                f"choose from {sorted(PLC_PRESETS)}") from None
    else:
        taps = preset
    taps = np.atleast_1d(np.asarray(taps, dtype=np.complex128))
    if taps.ndim != 1 or taps.size == 0:
        raise ConfigurationError("tap list must be a non-empty 1-D sequence")
    if taps.size > cfg.cp_len:
        raise ConfigurationError(
            f"{taps.size} taps exceed the cyclic prefix ({cfg.cp_len})")
    taps = taps.copy()
    taps.setflags(write=False)
    gains = frequency_response(taps, cfg)
    gains.setflags(write=False)
    return ChannelRealization(gains, taps, "plc_static")


def rayleigh_block(rng: np.random.Generator, cfg: OfdmConfig = OfdmConfig(),
                   n_taps: int = 4, n_frames: int | None = None) -> ChannelRealization:
    """Draw Rayleigh block-fading realizations.

    Taps are i.i.d. circular Gaussian with a uniform power-delay profile
    of unit total power, so ``E|H_k|^2 = 1``. With ``n_frames`` given the
    result holds one independent realization per frame along axis 0.
    """
    if n_taps < 1 or n_taps > cfg.cp_len:
        raise ConfigurationError("Rayleigh tap count must be in [1, cp_len]")
    shape = (n_taps,) if n_frames is None else (n_frames, n_taps)
    taps = complex_normal(rng, shape, 1.0 / n_taps)
    return ChannelRealization(frequency_response(taps, cfg), taps, "rayleigh_block")


def apply(frame, ch: ChannelRealization, cfg: OfdmConfig | None = None) -> np.ndarray:
    """Pass time samples through the channel.

    With taps this is a linear convolution truncated to the input length
    (the tail beyond the frame is dropped). Without taps the gains are
    applied per active bin to a CP-OFDM frame, which requires ``cfg``.
    """
    frame = np.asarray(frame, dtype=np.complex128)
    if ch.taps is None:
        if cfg is None:
            raise ConfigurationError("frequency-domain channel needs an OfdmConfig")
        return modulate(demodulate(frame, cfg) * ch.gains[..., None, :], cfg)
    taps = np.asarray(ch.taps)
    out = np.zeros(np.broadcast_shapes(frame.shape[:-1], taps.shape[:-1])
                   + frame.shape[-1:], dtype=np.complex128)
    n = frame.shape[-1]
    for l in range(min(taps.shape[-1], n)):
        out[..., l:] += taps[..., l, None] * frame[..., :n - l]
    return out


def load_taps(path) -> np.ndarray:
    """Read a tap list: one complex tap per line written as ``re im``.

    Blank lines and ``#`` comments are ignored.
    """
    taps = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ConfigurationError(f"{path}:{lineno}: expected 're im'")
        taps.append(complex(float(parts[0]), float(parts[1])))
    if not taps:
        raise ConfigurationError(f"{path}: no taps found")
    return np.asarray(taps)

"""Receiver-side estimators: LS channel, noise PSD, instantaneous power."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError
from .ofdm import bpsk_map, bpsk_slice

__all__ = [
    "ChannelEstimate",
    "NoiseStats",
    "ls_channel_estimate",
    "noise_psd_estimate",
    "InstantMode",
    "instantaneous_noise_power",
    "PSD_FLOOR",
]

# relative to the received signal power per subcarrier
PSD_FLOOR = 1e-6


@dataclass
class ChannelEstimate:
    gains: np.ndarray
    source: str = "ls_preamble"


@dataclass
class NoiseStats:
    """Noise statistics one link's combiner may use.

    ``psd`` is ``(R, K)`` per region and active bin; ``instantaneous``
    is per received cell and may be None when not computed.
    """

    avg_power: float
    psd: np.ndarray
    instantaneous: np.ndarray | None = None


def ls_channel_estimate(received, known) -> ChannelEstimate:
    """Least-squares estimate averaged over preamble symbols.

    Parameters
    ----------
    received : array_like
        Demodulated preamble cells, ``(..., P, K)``.
    known : array_like
        Transmitted preamble cells, ``(P, K)``, unit modulus.
    """
    received = np.asarray(received)
    known = np.asarray(known)
    if received.shape[-2] < 1:
        raise DomainError("at least one preamble symbol is required")
    if np.any(known == 0):
        raise DomainError("known preamble cells must be non-zero")
    return ChannelEstimate((received / known).mean(axis=-2), "ls_preamble")


def noise_psd_estimate(received, labels, n_regions: int, channel_power=None,
                       signal_power: float = 1.0, channel=None) -> np.ndarray:
    """Per-region noise PSD from received data cells.

    For each region the average received power per bin is computed over
    the symbols carrying that label, then the average channel power is
    subtracted. With ``channel`` given, ``2 Im(Y conj(H) / |H|)^2`` is
    averaged instead: for a real (BPSK) constellation the quadrature
    component holds half the noise and none of the signal, so the
    estimate is unbiased at any SNR and needs no decisions. Results are
    clamped at ``PSD_FLOOR * signal_power``.
    Regions with no symbols come back as NaN rows.

    Parameters
    ----------
    received : array_like
        Data cells ``(..., S, K)`` with unit-power constellation.
    labels : array_like
        Region index of every symbol, shape ``(..., S)``.
    channel_power : array_like, optional
        ``|H_k|^2`` broadcastable to ``received`` (a ``(K,)`` vector, or
        per-frame values such as ``(F, 1, K)``).
    channel : array_like, optional
        Complex channel estimate broadcastable to ``received``; selects
        the quadrature estimator.
    """
    received = np.asarray(received)
    y2 = np.abs(received) ** 2
    K = y2.shape[-1]
    if channel is not None:
        h = np.asarray(channel)
        mag = np.abs(h)
        rot = np.where(mag > 0, np.conj(h) / np.where(mag > 0, mag, 1.0), 1.0)
        excess = np.broadcast_to(2.0 * np.imag(received * rot) ** 2, y2.shape)
    elif channel_power is not None:
        excess = y2 - np.broadcast_to(np.asarray(channel_power, dtype=float), y2.shape)
    else:
        raise PreconditionError("need channel_power or channel")
    excess = excess.reshape(-1, K)
    labels = np.broadcast_to(np.asarray(labels)[..., None], y2.shape[:-1] + (1,)).reshape(-1)
    psd = np.full((n_regions, K), np.nan)
    for r in range(n_regions):
        sel = labels == r
        if sel.any():
            psd[r] = np.maximum(excess[sel].mean(axis=0), PSD_FLOOR * signal_power)
    return psd


class InstantMode(str, enum.Enum):
    GENIE = "genie"          # conditional variance known to the simulator
    MAGNITUDE = "magnitude"  # |N_k|^2 of the realised noise
    RESIDUAL = "residual"    # |Y - H_hat * X_hat|^2 with hard decisions


def instantaneous_noise_power(mode, *, noise_cells=None, conditional_variance=None,
                              received=None, channel=None, symbols=None) -> np.ndarray:
    """Per-cell instantaneous noise power.

    ``genie`` returns the conditional variance of each cell given the
    impulse state (supplied by the simulator); ``magnitude`` returns the
    realised ``|N_k|^2``; ``residual`` uses ``|Y - H_hat X_hat|^2`` with
    per-bin BPSK decisions on ``Y / H_hat`` unless ``symbols`` is given.
    """
    mode = InstantMode(mode)
    if mode is InstantMode.GENIE:
        if conditional_variance is None:
            raise PreconditionError("genie mode needs the conditional noise variance")
        return np.asarray(conditional_variance, dtype=float)
    if mode is InstantMode.MAGNITUDE:
        if noise_cells is None:
            raise PreconditionError("magnitude mode needs the noise cells")
        return np.abs(np.asarray(noise_cells)) ** 2
    if channel is None or received is None:
        raise PreconditionError("residual mode needs a channel estimate and the received cells")
    received = np.asarray(received)
    channel = np.asarray(channel)
    if symbols is None:
        symbols = bpsk_map(bpsk_slice(np.conj(channel) * received))
    return np.abs(received - channel * symbols) ** 2

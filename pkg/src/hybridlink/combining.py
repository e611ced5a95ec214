"""Per-link soft values and PLC/wireless diversity combining rules.

Per-link LLRs always use the Gaussian-noise expression; the combining
schemes differ only in which noise power goes in the denominator:

========  ===============================================================
ASC       average noise power of the link
ISC       instantaneous noise power of each received cell
PSDC      noise PSD of the cell's bin (per temporal region on PLC)
DSSC      differential phase ``cos(dphi)`` weighted by ``|Y| / PSD``
EGC       unweighted sum (of ``cos(dphi)`` for differential links)
mixed     coherent wireless LLR + DSSC-weighted differential PLC cells
TRSD      per-subcarrier transmit selection of the higher-CNR medium
========  ===============================================================

Positive LLRs favour bit 0 (BPSK symbol +1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, FramingError

__all__ = [
    "LlrFrame",
    "floor_denominator",
    "llr_coherent",
    "llr_differential",
    "combine_asc",
    "combine_isc",
    "combine_psdc",
    "egc_combine",
    "dssc_weights",
    "unit_cells",
    "dssc_combine",
    "mixed_combine",
    "trsd_select",
    "trsd_apply",
]

DENOMINATOR_FLOOR = 1e-6


@dataclass
class LlrFrame:
    """Soft values of one link (or of a combination)."""

    llrs: np.ndarray
    link: str
    weights_used: np.ndarray | None = None

    def __post_init__(self):
        self.llrs = np.asarray(self.llrs, dtype=np.float64)
        if not np.all(np.isfinite(self.llrs)):
            raise DomainError(f"non-finite soft values on link {self.link!r}")


def floor_denominator(d, signal_power=1.0) -> np.ndarray:
    """Clamp noise powers at ``1e-6`` of the signal power."""
    return np.maximum(np.asarray(d, dtype=float), DENOMINATOR_FLOOR * np.asarray(signal_power))


def llr_coherent(y, h, var) -> np.ndarray:
    """BPSK LLR under Gaussian noise: ``4 Re(conj(h) y) / var``."""
    var = np.asarray(var, dtype=float)
    if np.any(var <= 0):
        raise DomainError("noise variance must be positive")
    return 4.0 * np.real(np.conj(h) * y) / var


def llr_differential(z, var) -> np.ndarray:
    """High-SNR DBPSK LLR of a differentially detected cell: ``2 Re(z) / var``."""
    var = np.asarray(var, dtype=float)
    if np.any(var <= 0):
        raise DomainError("noise variance must be positive")
    return 2.0 * np.real(z) / var


def _pair(plc: LlrFrame, wl: LlrFrame):
    if plc.llrs.shape != wl.llrs.shape:
        raise FramingError(
            f"link soft values are not bit-aligned: {plc.llrs.shape} vs {wl.llrs.shape}")
    return plc.llrs, wl.llrs


def _sum(plc: LlrFrame, wl: LlrFrame, name: str) -> LlrFrame:
    a, b = _pair(plc, wl)
    return LlrFrame(a + b, name)


def combine_asc(plc: LlrFrame, wl: LlrFrame) -> LlrFrame:
    """Add LLRs that were scaled by each link's average noise power."""
    return _sum(plc, wl, "asc")


def combine_isc(plc: LlrFrame, wl: LlrFrame) -> LlrFrame:
    """Add LLRs that were scaled by per-cell instantaneous noise power."""
    return _sum(plc, wl, "isc")


def combine_psdc(plc: LlrFrame, wl: LlrFrame) -> LlrFrame:
    """Add LLRs that were scaled by the per-bin (per-region) noise PSD."""
    return _sum(plc, wl, "psdc")


def egc_combine(plc: LlrFrame, wl: LlrFrame) -> LlrFrame:
    return _sum(plc, wl, "egc")


def dssc_weights(magnitude, psd, signal_power=1.0) -> np.ndarray:
    """``|Y| / PSD`` with the PSD floored."""
    return np.abs(magnitude) / floor_denominator(psd, signal_power)


def unit_cells(z) -> np.ndarray:
    """Differentially detected cells reduced to their phase, ``z / |z|``.

    Zero cells stay zero.
    """
    z = np.asarray(z)
    mag = np.abs(z)
    return np.where(mag > 0, z / np.where(mag > 0, mag, 1.0), 0)


def dssc_combine(plc_cells, wl_cells, plc_psd, wl_psd, plc_magnitude, wl_magnitude,
                 signal_power=1.0) -> LlrFrame:
    """Differential signal strength combining.

    ``llr = sum_link (|Y_link| / psd_link) * cos(dphi_link)`` where
    ``dphi`` is the phase of the differentially detected cell and ``|Y|``
    the magnitude of the received cell carrying the current symbol. No
    channel estimate is involved; with equal weights this is EGC.
    """
    plc_cells = np.asarray(plc_cells)
    wl_cells = np.asarray(wl_cells)
    if plc_cells.shape != wl_cells.shape:
        raise FramingError("differential cells of the two links are not aligned")
    wp = dssc_weights(plc_magnitude, plc_psd, signal_power)
    ww = dssc_weights(wl_magnitude, wl_psd, signal_power)
    llr = wp * np.real(unit_cells(plc_cells)) + ww * np.real(unit_cells(wl_cells))
    return LlrFrame(llr, "dssc", np.stack(np.broadcast_arrays(wp, ww)))


def mixed_combine(wl: LlrFrame, plc_cells, plc_psd, plc_magnitude,
                  signal_power=1.0) -> LlrFrame:
    """Coherent wireless LLRs plus DSSC-weighted differential PLC cells.

    ``wl`` carries the coherent LLRs ``4 Re(conj(H) Y) / var`` (channel
    gain over the noise variance of the OFDM block). The PLC term is
    ``(|Y| / psd) * cos(dphi)``.
    """
    plc_cells = np.asarray(plc_cells)
    if plc_cells.shape != wl.llrs.shape:
        raise FramingError("PLC differential cells and wireless LLRs are not aligned")
    wp = dssc_weights(plc_magnitude, plc_psd, signal_power)
    return LlrFrame(wl.llrs + wp * np.real(unit_cells(plc_cells)), "mixed", wp)


def trsd_select(cnr_plc, cnr_wl) -> np.ndarray:
    """Per-subcarrier medium selection: 1 = PLC, 0 = wireless.

    PLC is chosen when its channel-to-noise ratio is at least the
    wireless one (ties go to PLC).
    """
    cnr_plc = np.asarray(cnr_plc, dtype=float)
    cnr_wl = np.asarray(cnr_wl, dtype=float)
    if cnr_plc.shape != cnr_wl.shape:
        raise FramingError("CNR vectors differ in length")
    return (cnr_plc >= cnr_wl).astype(np.uint8)


def trsd_apply(grid, mask):
    """Route each subcarrier's symbols to its selected medium.

    Returns ``(plc_grid, wl_grid)``; the medium not selected for a bin
    carries zero there. ``mask`` broadcasts over the symbol axis.
    """
    grid = np.asarray(grid)
    m = np.asarray(mask, dtype=bool)
    if m.shape[-1] != grid.shape[-1]:
        raise FramingError("mask length differs from the active subcarrier count")
    m = np.expand_dims(m, -2)
    return np.where(m, grid, 0), np.where(m, 0, grid)

"""CP-OFDM modulation and (differential) BPSK symbol mapping.

Grids are arrays of shape ``(..., n_symbols, n_active)``; time frames are
arrays of shape ``(..., n_symbols * (fft_size + cp_len))``. Leading axes
are treated as independent frames so a whole Monte Carlo batch can be
processed in one call.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError, FramingError
from .core import dft, inverse_dft, is_power_of_two

__all__ = [
    "OfdmConfig",
    "DiffMode",
    "bpsk_map",
    "bpsk_slice",
    "modulate",
    "demodulate",
    "diff_encode",
    "diff_detect",
]


def _default_active():
    return tuple(range(23, 59))


@dataclass(frozen=True)
class OfdmConfig:
    """Grid geometry shared by a link's transmitter and receiver.

    The defaults give 36 active subcarriers out of a 256-point FFT at
    400 kHz, i.e. a 1562.5 Hz subcarrier spacing.
    """

    fft_size: int = 256
    cp_len: int = 30
    active_subcarriers: tuple = field(default_factory=_default_active)
    sample_rate: float = 400_000.0
    symbols_per_frame: int = 20

    def __post_init__(self):
        object.__setattr__(self, "active_subcarriers",
                           tuple(int(k) for k in self.active_subcarriers))
        if not is_power_of_two(self.fft_size):
            raise ConfigurationError("fft_size must be a power of two")
        if not 0 <= self.cp_len < self.fft_size:
            raise ConfigurationError("cp_len must satisfy 0 <= cp_len < fft_size")
        act = self.active_subcarriers
        if not act:
            raise ConfigurationError("active subcarrier set is empty")
        if len(set(act)) != len(act):
            raise ConfigurationError("duplicate active subcarriers")
        if min(act) < 0 or max(act) >= self.fft_size // 2:
            raise ConfigurationError("active subcarriers must lie in [0, fft_size/2)")
        if self.symbols_per_frame < 1:
            raise ConfigurationError("symbols_per_frame must be positive")
        if self.sample_rate <= 0:
            raise ConfigurationError("sample_rate must be positive")

    @property
    def n_active(self) -> int:
        return len(self.active_subcarriers)

    @property
    def symbol_len(self) -> int:
        return self.fft_size + self.cp_len

    @property
    def subcarrier_spacing(self) -> float:
        return self.sample_rate / self.fft_size

    @property
    def active_index(self) -> np.ndarray:
        return np.asarray(self.active_subcarriers)


class DiffMode(str, enum.Enum):
    TDDM = "tddm"   # across successive OFDM symbols, same subcarrier
    FDDM = "fddm"   # across successive subcarriers, same symbol


def bpsk_map(bits) -> np.ndarray:
    """Map bit 0 -> +1 and bit 1 -> -1."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)


def bpsk_slice(values) -> np.ndarray:
    """Hard decision on the real part; ties resolve to bit 0."""
    return (np.real(values) < 0).astype(np.uint8)


def modulate(grid, cfg: OfdmConfig) -> np.ndarray:
    """Build CP-OFDM time samples from a symbol grid.

    Inactive bins are zero, each symbol is inverse transformed with the
    unitary DFT and its last ``cp_len`` samples are prepended.
    """
    grid = np.asarray(grid)
    if grid.ndim < 2 or grid.shape[-1] != cfg.n_active:
        raise ConfigurationError(
            f"grid has {grid.shape[-1] if grid.ndim else 0} columns, "
            f"config has {cfg.n_active} active subcarriers")
    spectrum = np.zeros(grid.shape[:-1] + (cfg.fft_size,), dtype=np.complex128)
    spectrum[..., cfg.active_index] = grid
    body = inverse_dft(spectrum)
    if cfg.cp_len:
        body = np.concatenate([body[..., -cfg.cp_len:], body], axis=-1)
    return body.reshape(grid.shape[:-2] + (-1,))


def demodulate(frame, cfg: OfdmConfig) -> np.ndarray:
    """Strip cyclic prefixes, transform and pick the active bins."""
    frame = np.asarray(frame)
    n = frame.shape[-1]
    if n == 0 or n % cfg.symbol_len:
        raise FramingError(
            f"frame length {n} is not a multiple of {cfg.symbol_len}")
    sym = frame.reshape(frame.shape[:-1] + (n // cfg.symbol_len, cfg.symbol_len))
    return dft(sym[..., cfg.cp_len:])[..., cfg.active_index]


def _check_unit(grid):
    if not np.allclose(np.abs(grid), 1.0, atol=1e-9):
        raise DomainError("differential encoding needs unit-modulus cells")


def diff_encode(data, mode: DiffMode | str) -> np.ndarray:
    """Differentially encode a data grid.

    TDDM prepends an all-ones reference symbol, so ``(S, K)`` data gives
    an ``(S + 1, K)`` grid with ``cell[s + 1] = cell[s] * data[s]``. FDDM
    prepends a reference subcarrier of ones, giving ``(S, K + 1)`` cells
    with ``cell[:, k + 1] = cell[:, k] * data[:, k]``.
    """
    data = np.asarray(data, dtype=np.complex128)
    _check_unit(data)
    mode = DiffMode(mode)
    axis = -2 if mode is DiffMode.TDDM else -1
    ref_shape = list(data.shape)
    ref_shape[axis] = 1
    ref = np.ones(ref_shape, dtype=np.complex128)
    return np.concatenate([ref, np.cumprod(data, axis=axis)], axis=axis)


def diff_detect(grid, mode: DiffMode | str) -> np.ndarray:
    """Differential detection without a channel estimate.

    Each output cell is ``grid[n] * conj(grid[n - 1])`` along the
    differential axis; the output is one symbol (TDDM) or one subcarrier
    (FDDM) shorter than the input.
    """
    grid = np.asarray(grid)
    if DiffMode(mode) is DiffMode.TDDM:
        return grid[..., 1:, :] * np.conj(grid[..., :-1, :])
    return grid[..., :, 1:] * np.conj(grid[..., :, :-1])

"""QPSK/OFDM baseband chain: mapping, unitary IDFT/DFT with cyclic prefix,
pilot-based LS channel estimation and one-tap zero-forcing equalization."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidInput

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
# below this the one-tap equalizer treats a subcarrier as erased
ERASURE_FLOOR = 1e-12


@dataclass(frozen=True)
class ModConfig:
    K: int = 1024
    mu: int = 16
    pilot_count: int = 64
    pilot_value: complex = complex(_INV_SQRT2, _INV_SQRT2)

    def __post_init__(self):
        if self.K < 2 or self.K & (self.K - 1):
            raise InvalidInput(f"K must be a power of two, got {self.K}")
        if not 0 <= self.mu < self.K:
            raise InvalidInput(f"cyclic prefix length must be in [0, K), got {self.mu}")
        if self.pilot_count < 2 or self.K % self.pilot_count:
            raise InvalidInput(
                f"pilot_count must be >= 2 and divide K, got {self.pilot_count}")
        if abs(self.pilot_value) == 0:
            raise InvalidInput("pilot_value must be non-zero")

    @cached_property
    def pilot_idx(self) -> np.ndarray:
        return np.arange(0, self.K, self.K // self.pilot_count)

    @cached_property
    def data_idx(self) -> np.ndarray:
        mask = np.ones(self.K, dtype=bool)
        mask[self.pilot_idx] = False
        return np.flatnonzero(mask)

    @property
    def n_data(self) -> int:
        return self.K - self.pilot_count

    @property
    def bits_per_frame(self) -> int:
        return 2 * self.n_data

    @property
    def frame_len(self) -> int:
        return self.K + self.mu


@dataclass
class OfdmFrame:
    bits: np.ndarray
    freq: np.ndarray
    time: np.ndarray
    time_cp: np.ndarray


@dataclass
class EqualizedFrame:
    y: np.ndarray
    h_est: np.ndarray
    data_symbols: np.ndarray
    erased: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))


def qpsk_map(bits) -> np.ndarray:
    """Gray QPSK: first bit of a pair sets the imaginary sign, second the real sign.

    00 -> (1+1j)/sqrt2, 01 -> (-1+1j)/sqrt2, 11 -> (-1-1j)/sqrt2, 10 -> (1-1j)/sqrt2
    """
    bits = np.asarray(bits)
    if bits.ndim != 1 or bits.size % 2:
        raise InvalidInput(f"QPSK needs an even number of bits, got {bits.size}")
    if bits.size and (bits.min() < 0 or bits.max() > 1):
        raise InvalidInput("bits must be 0/1")
    b = bits.astype(np.int8)
    return ((1 - 2 * b[1::2]) + 1j * (1 - 2 * b[0::2])) * _INV_SQRT2


def qpsk_demap(symbols) -> np.ndarray:
    """Hard decisions, inverse of :func:`qpsk_map`."""
    symbols = np.asarray(symbols)
    out = np.empty(2 * symbols.size, dtype=np.uint8)
    out[0::2] = symbols.imag < 0
    out[1::2] = symbols.real < 0
    return out


def ofdm_modulate(freq, cfg: ModConfig) -> np.ndarray:
    freq = np.asarray(freq, dtype=complex)
    if freq.shape != (cfg.K,):
        raise InvalidInput(f"expected {cfg.K} subcarrier symbols, got shape {freq.shape}")
    x = np.fft.ifft(freq, norm="ortho")
    if cfg.mu == 0:
        return x
    return np.concatenate([x[-cfg.mu:], x])


def ofdm_demodulate(time_cp, cfg: ModConfig) -> np.ndarray:
    time_cp = np.asarray(time_cp, dtype=complex)
    if time_cp.shape != (cfg.frame_len,):
        raise InvalidInput(
            f"expected {cfg.frame_len} time samples, got shape {time_cp.shape}")
    return np.fft.fft(time_cp[cfg.mu:], norm="ortho")


def build_frame(bits, cfg: ModConfig) -> OfdmFrame:
    """Place QPSK data on the data subcarriers and the known pilot on the rest."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size != cfg.bits_per_frame:
        raise InvalidInput(f"frame carries {cfg.bits_per_frame} bits, got {bits.size}")
    freq = np.empty(cfg.K, dtype=complex)
    freq[cfg.pilot_idx] = cfg.pilot_value
    freq[cfg.data_idx] = qpsk_map(bits)
    time_cp = ofdm_modulate(freq, cfg)
    return OfdmFrame(bits=bits, freq=freq, time=time_cp[cfg.mu:], time_cp=time_cp)


def random_frame(cfg: ModConfig, rng: np.random.Generator) -> OfdmFrame:
    return build_frame(rng.integers(0, 2, cfg.bits_per_frame, dtype=np.uint8), cfg)


def estimate_and_equalize(y, cfg: ModConfig, h_true=None) -> EqualizedFrame:
    """LS estimate at the pilots, linear interpolation in between (flat past
    the last pilot), then zero-forcing on the data subcarriers.

    Passing ``h_true`` (scalar or length-K) bypasses estimation (genie CSI).
    """
    y = np.asarray(y, dtype=complex)
    if y.shape != (cfg.K,):
        raise InvalidInput(f"expected {cfg.K} subcarrier symbols, got shape {y.shape}")
    if h_true is None:
        p = cfg.pilot_idx
        h_p = y[p] / cfg.pilot_value
        k = np.arange(cfg.K)
        h_est = np.interp(k, p, h_p.real) + 1j * np.interp(k, p, h_p.imag)
    else:
        h_est = np.broadcast_to(np.asarray(h_true, dtype=complex), (cfg.K,)).copy()

    h_d = h_est[cfg.data_idx]
    erased = np.abs(h_d) < ERASURE_FLOOR
    safe = np.where(erased, 1.0, h_d)
    data = y[cfg.data_idx] / safe
    data[erased] = 0.0
    return EqualizedFrame(y=y, h_est=h_est, data_symbols=data, erased=erased)


def detect_bits(eq: EqualizedFrame, rng: np.random.Generator | None = None) -> np.ndarray:
    """Hard-decision bits; erased subcarriers get coin-flip bits."""
    bits = qpsk_demap(eq.data_symbols)
    if eq.erased.any():
        if rng is None:
            rng = np.random.default_rng(0)
        pos = np.repeat(np.flatnonzero(eq.erased) * 2, 2) + np.tile([0, 1], eq.erased.sum())
        bits[pos] = rng.integers(0, 2, pos.size, dtype=np.uint8)
    return bits


def compute_ber(tx_bits, rx_bits) -> float:
    tx_bits = np.asarray(tx_bits)
    rx_bits = np.asarray(rx_bits)
    if tx_bits.shape != rx_bits.shape:
        raise InvalidInput(f"length mismatch: {tx_bits.shape} vs {rx_bits.shape}")
    if tx_bits.size == 0:
        raise InvalidInput("empty bit sequences")
    return float(np.count_nonzero(tx_bits != rx_bits)) / tx_bits.size

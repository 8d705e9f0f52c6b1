"""Memoryless time-domain nonlinearities: multi-threshold clipper, blanking,
clipping, and the false-alarm based base threshold."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput

_SQRT_LN4 = math.sqrt(math.log(4.0))


@dataclass(frozen=True)
class ClipperProfile:
    """Thresholds beta_0 < ... < beta_M and levels c_1 >= ... >= c_M >= 0.

    Amplitudes below beta_0 pass untouched; amplitudes in [beta_{m-1}, beta_m)
    are set to c_m and anything at or above beta_M to c_M, phase preserved.
    ``ClipperProfile.identity()`` has no levels and passes everything.
    """
    betas: tuple[float, ...]
    levels: tuple[float, ...]

    def __post_init__(self):
        b = np.asarray(self.betas, dtype=float)
        c = np.asarray(self.levels, dtype=float)
        object.__setattr__(self, "betas", tuple(float(x) for x in b))
        object.__setattr__(self, "levels", tuple(float(x) for x in c))
        if b.size != c.size + 1:
            raise InvalidInput(f"need M+1 thresholds for M levels, got {b.size} and {c.size}")
        if np.any(np.diff(b) <= 0):
            raise InvalidInput(f"thresholds must be strictly increasing: {self.betas}")
        if c.size:
            if np.any(np.diff(c) > 0) or c[-1] < 0:
                raise InvalidInput(f"levels must be non-increasing and >= 0: {self.levels}")
            if c[0] > b[0]:
                raise InvalidInput("levels may not exceed beta_0")

    @classmethod
    def identity(cls) -> "ClipperProfile":
        return cls((math.inf,), ())

    @property
    def M(self) -> int:
        return len(self.levels)

    @property
    def is_identity(self) -> bool:
        return self.M == 0


def unit_box(amplitude, lo: float, hi: float):
    if not lo < hi:
        raise InvalidInput(f"need lo < hi, got [{lo}, {hi})")
    a = np.asarray(amplitude)
    out = ((a >= lo) & (a < hi)).astype(int)
    return int(out) if out.ndim == 0 else out


def _set_magnitude(r: np.ndarray, mag: np.ndarray, amp: np.ndarray, mask: np.ndarray) -> None:
    # shared by every nonlinearity so equivalent settings agree bit for bit
    r[mask] = r[mask] * (mag[mask] / amp[mask])


def apply_multithreshold(r, profile: ClipperProfile) -> np.ndarray:
    r = np.array(r, dtype=complex)
    if profile.is_identity:
        return r
    amp = np.abs(r)
    hit = (amp >= profile.betas[0]) & (amp > 0)
    if not hit.any():
        return r
    # bin m-1 <=> amp in [beta_{m-1}, beta_m); values past beta_M fall in the last bin
    bins = np.searchsorted(profile.betas, amp[hit], side="right") - 1
    bins = np.minimum(bins, profile.M - 1)
    mag = np.zeros_like(amp)
    mag[hit] = np.asarray(profile.levels)[bins]
    _set_magnitude(r, mag, amp, hit)
    return r


def apply_blanking(r, threshold: float) -> np.ndarray:
    if not threshold > 0:
        raise InvalidInput(f"blanking threshold must be positive, got {threshold}")
    r = np.array(r, dtype=complex)
    amp = np.abs(r)
    hit = amp > threshold
    _set_magnitude(r, np.zeros_like(amp), amp, hit)
    return r


def apply_clipping(r, threshold: float) -> np.ndarray:
    if not threshold > 0:
        raise InvalidInput(f"clipping threshold must be positive, got {threshold}")
    r = np.array(r, dtype=complex)
    amp = np.abs(r)
    hit = amp > threshold
    _set_magnitude(r, np.full_like(amp, threshold), amp, hit)
    return r


def base_threshold(sigma: float, p_fa: float = 1e-3) -> float:
    """Rayleigh-envelope threshold exceeded with probability ``p_fa``.

    For circular Gaussian samples with per-dimension std ``sigma``,
    P(|r| > t) = exp(-t^2 / (2 sigma^2)).
    """
    if not 0.0 < p_fa < 1.0:
        raise InvalidInput(f"p_fa must lie in (0, 1), got {p_fa}")
    if sigma < 0:
        raise InvalidInput("sigma must be non-negative")
    return sigma * math.sqrt(-2.0 * math.log(p_fa))


def estimate_sigma(r) -> float:
    """Median-based Rayleigh scale, robust to a minority of large bursts."""
    return float(np.median(np.abs(r))) / _SQRT_LN4

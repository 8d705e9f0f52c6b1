"""Rank-1 directional channels on uniform linear arrays, intermittent
beam-sweeping interferers and receiver noise."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable

import numpy as np

from . import phy
from .errors import InvalidInput

HALF_PI = math.pi / 2
# thermal noise floor, -174 dBm/Hz
THERMAL_N0 = 10 ** ((-174 - 30) / 10)


@dataclass(frozen=True)
class ArrayGeometry:
    n_elements: int = 128
    spacing_over_lambda: float = 0.5
    carrier_hz: float = 140e9

    def __post_init__(self):
        if self.n_elements < 1:
            raise InvalidInput(f"array needs at least one element, got {self.n_elements}")
        if self.spacing_over_lambda <= 0:
            raise InvalidInput("element spacing must be positive")

    @property
    def wavelength_m(self) -> float:
        return 299_792_458.0 / self.carrier_hz


@dataclass
class ChannelRealization:
    alpha: complex
    theta_r: float
    theta_t: float
    rx_geom: ArrayGeometry
    tx_geom: ArrayGeometry

    @cached_property
    def u(self) -> np.ndarray:
        return array_response(self.theta_r, self.rx_geom)

    @cached_property
    def v(self) -> np.ndarray:
        return array_response(self.theta_t, self.tx_geom)

    @cached_property
    def matrix(self) -> np.ndarray:
        return self.alpha * np.outer(self.u, self.v.conj())


@dataclass
class InterfererState:
    power: float
    theta_r: float          # AoA at the target receiver
    theta_t: float          # AoD from the interferer towards the target
    alpha: complex          # fading of the interfering link, redrawn per active slot
    beam_theta: float       # direction the interferer's sweeping beam points at
    n_elements: int
    spacing_over_lambda: float
    active: bool
    next_resample_at: int
    next_slot_at: int
    rng: np.random.Generator

    @property
    def beam_weights(self) -> np.ndarray:
        geom = ArrayGeometry(self.n_elements, self.spacing_over_lambda)
        return array_response(self.beam_theta, geom) / math.sqrt(self.n_elements)


@dataclass(frozen=True)
class EnvConfig:
    """Propagation and interference environment.

    ``duty_cycle``, ``slot_samples`` and ``area_m2`` are modelling choices,
    not measured values. ``n_interferers`` pins the interferer count instead
    of drawing it from the Poisson process.
    """
    lambda_i: float = 8e-4
    area_m2: float = 1e4
    noise_psd: float = THERMAL_N0
    bandwidth_hz: float = 1e9
    sir_db: float = 0.0
    eb_n0_db: float = 0.0
    duty_cycle: float = 0.2
    slot_samples: int = 64
    aoa_resample_s: float = 1e-3
    n_interferers: int | None = None
    n_rx: int = 128
    n_bs: int = 128
    n_int: int = 128
    spacing_over_lambda: float = 0.5
    carrier_hz: float = 140e9
    fading: bool = True
    # "tx": Eb/N0 referred to the transmit side, before array gain;
    # "rx": measured after matched beamforming
    snr_reference: str = "tx"
    # fixed BS power; overrides eb_n0_db (needed for noise-free runs)
    tx_power: float | None = None

    def __post_init__(self):
        if self.lambda_i < 0:
            raise InvalidInput("lambda_i must be non-negative")
        if self.area_m2 <= 0:
            raise InvalidInput("area_m2 must be positive")
        if self.noise_psd < 0 or self.bandwidth_hz <= 0:
            raise InvalidInput("noise_psd must be >= 0 and bandwidth_hz > 0")
        if not 0.0 <= self.duty_cycle <= 1.0:
            raise InvalidInput(f"duty_cycle must lie in [0, 1], got {self.duty_cycle}")
        if self.slot_samples < 1:
            raise InvalidInput("slot_samples must be >= 1")
        if self.aoa_resample_s <= 0:
            raise InvalidInput("aoa_resample_s must be positive")
        if self.n_interferers is not None and self.n_interferers < 0:
            raise InvalidInput("n_interferers must be non-negative")
        for name in ("n_rx", "n_bs", "n_int"):
            if getattr(self, name) < 1:
                raise InvalidInput(f"{name} must be >= 1")
        if self.tx_power is not None and not self.tx_power >= 0:
            raise InvalidInput("tx_power must be non-negative")
        if not (math.isfinite(self.sir_db) and math.isfinite(self.eb_n0_db)):
            raise InvalidInput("sir_db and eb_n0_db must be finite")
        if self.snr_reference not in ("tx", "rx"):
            raise InvalidInput(f"snr_reference must be 'tx' or 'rx', got {self.snr_reference!r}")

    def geometry(self, n: int) -> ArrayGeometry:
        return ArrayGeometry(n, self.spacing_over_lambda, self.carrier_hz)

    @property
    def noise_var(self) -> float:
        return self.noise_psd * self.bandwidth_hz

    @property
    def bs_power(self) -> float:
        """BS transmit power for the configured Eb/N0.

        With unit-energy QPSK symbols and unit mean-square fading,
        P_b / (N0 B) = 2 Eb/N0 on the "tx" reference; the "rx" reference
        also divides out the matched array gain N_rx * N_bs. ``tx_power``
        bypasses the calculation.
        """
        if self.tx_power is not None:
            return float(self.tx_power)
        ebn0 = 10 ** (self.eb_n0_db / 10)
        gain = self.n_rx * self.n_bs if self.snr_reference == "rx" else 1
        return 2.0 * ebn0 * self.noise_var / gain

    @property
    def interferer_power(self) -> float:
        return self.bs_power / 10 ** (self.sir_db / 10)

    @property
    def resample_samples(self) -> int:
        return max(1, round(self.aoa_resample_s * self.bandwidth_hz))

    def with_(self, **kw) -> "EnvConfig":
        return replace(self, **kw)


def _check_angle(theta: float) -> None:
    if not -HALF_PI - 1e-12 <= theta <= HALF_PI + 1e-12:
        raise InvalidInput(f"angle {theta} outside [-pi/2, pi/2]")


def array_response(theta: float, geometry: ArrayGeometry) -> np.ndarray:
    """Steering vector exp(-j k 2 pi (d/lambda) sin theta), k = 0..N-1 (not normalized)."""
    _check_angle(theta)
    k = np.arange(geometry.n_elements)
    return np.exp(-1j * k * (2 * np.pi * geometry.spacing_over_lambda * math.sin(theta)))


def make_channel(alpha, theta_r, theta_t, rx_geom: ArrayGeometry,
                 tx_geom: ArrayGeometry) -> ChannelRealization:
    _check_angle(theta_r)
    _check_angle(theta_t)
    return ChannelRealization(complex(alpha), float(theta_r), float(theta_t), rx_geom, tx_geom)


def matched_weights(channel: ChannelRealization, side: str) -> np.ndarray:
    if side == "rx":
        geom, theta = channel.rx_geom, channel.theta_r
    elif side == "tx":
        geom, theta = channel.tx_geom, channel.theta_t
    else:
        raise InvalidInput(f"side must be 'tx' or 'rx', got {side!r}")
    return array_response(theta, geom) / math.sqrt(geom.n_elements)


def effective_gain(w_rx: np.ndarray, channel: ChannelRealization, w_tx: np.ndarray) -> complex:
    """Scalar w_rx^H H w_tx, evaluated through the rank-1 factors."""
    if w_rx.shape != (channel.rx_geom.n_elements,) or w_tx.shape != (channel.tx_geom.n_elements,):
        raise InvalidInput("weight vector dimensions do not match the channel")
    return complex(channel.alpha * np.vdot(w_rx, channel.u) * np.vdot(channel.v, w_tx))


def steering_inner(theta_a: float, theta_b: float, n: int, spacing_over_lambda: float = 0.5) -> complex:
    """u(theta_a)^H u(theta_b) for n-element steering vectors, in closed form."""
    x = 2 * math.pi * spacing_over_lambda * (math.sin(theta_a) - math.sin(theta_b))
    half = 0.5 * x
    s = math.sin(half)
    if abs(s) < 1e-12:
        # x on a multiple of 2 pi; sum directly
        return complex(np.exp(1j * np.arange(n) * x).sum())
    return complex(np.exp(1j * (n - 1) * half) * math.sin(n * half) / s)


def rayleigh(rng: np.random.Generator, size=None):
    """Circular complex Gaussian with unit mean-square magnitude."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / math.sqrt(2)


def _uniform_angle(rng: np.random.Generator) -> float:
    return float(rng.uniform(-HALF_PI, HALF_PI))


def draw_interferers(env: EnvConfig, rng: np.random.Generator) -> list[InterfererState]:
    """Place interferers; each gets its own child generator so the i-th
    interferer's trajectory does not depend on how many others exist."""
    if env.n_interferers is not None:
        count = env.n_interferers
    else:
        count = int(rng.poisson(env.lambda_i * env.area_m2))
    states = []
    for child in rng.spawn(count):
        states.append(InterfererState(
            power=env.interferer_power,
            theta_r=_uniform_angle(child),
            theta_t=_uniform_angle(child),
            alpha=0j,
            beam_theta=_uniform_angle(child),
            n_elements=env.n_int,
            spacing_over_lambda=env.spacing_over_lambda,
            active=False,
            next_resample_at=env.resample_samples,
            next_slot_at=0,
            rng=child,
        ))
    return states


def evolve_interferers(states: list[InterfererState], sample_index: int,
                       env: EnvConfig, rng: np.random.Generator | None = None
                       ) -> list[InterfererState]:
    """Advance every interferer to ``sample_index`` (in place; also returned).

    At a slot boundary the interferer switches on with probability
    ``duty_cycle``; an active interferer points a fresh random beam and
    redraws its link fading. Each AoA epoch boundary redraws the angles.
    Draws come from each interferer's own generator; ``rng`` is accepted for
    interface symmetry.
    """
    R = env.resample_samples
    for st in states:
        if sample_index >= st.next_resample_at:
            st.theta_r = _uniform_angle(st.rng)
            st.theta_t = _uniform_angle(st.rng)
            st.next_resample_at = (sample_index // R + 1) * R
        if sample_index >= st.next_slot_at:
            st.active = bool(st.rng.random() < env.duty_cycle)
            if st.active:
                st.beam_theta = _uniform_angle(st.rng)
                st.alpha = complex(rayleigh(st.rng)) if env.fading else 1.0 + 0j
            st.next_slot_at = (sample_index // env.slot_samples + 1) * env.slot_samples
    return states


def interferer_gain(st: InterfererState, rx_response: Callable[[float], complex]) -> complex:
    """sqrt(P_i) * w0^H H_i w_i without forming H_i.

    ``rx_response(theta)`` is the receive combiner's gain w0^H u(theta).
    """
    tx = steering_inner(st.theta_t, st.beam_theta, st.n_elements, st.spacing_over_lambda)
    return math.sqrt(st.power) * st.alpha * rx_response(st.theta_r) * tx / math.sqrt(st.n_elements)


def combiner_response(w_rx: np.ndarray, env: EnvConfig) -> Callable[[float], complex]:
    geom = env.geometry(w_rx.size)
    return lambda theta: complex(np.vdot(w_rx, array_response(theta, geom)))


def matched_combiner_response(theta_r: float, env: EnvConfig) -> Callable[[float], complex]:
    """Closed-form response of the combiner matched to ``theta_r``."""
    n, d = env.n_rx, env.spacing_over_lambda
    root = math.sqrt(n)
    return lambda theta: steering_inner(theta_r, theta, n, d) / root


def interference(states: list[InterfererState], rx_response: Callable[[float], complex],
                 start: int, n: int, env: EnvConfig, mod: phy.ModConfig) -> np.ndarray:
    """Summed interference over samples [start, start + n).

    Every interferer sends an independent random QPSK-OFDM frame; its scalar
    gain is held constant within each slot.
    """
    out = np.zeros(n, dtype=complex)
    if not states:
        return out
    S = env.slot_samples
    edges = [start, *range((start // S + 1) * S, start + n, S), start + n]
    gains = np.zeros((len(states), n), dtype=complex)
    for a, b in zip(edges[:-1], edges[1:]):
        evolve_interferers(states, a, env)
        for i, st in enumerate(states):
            if st.active:
                gains[i, a - start:b - start] = interferer_gain(st, rx_response)
    for i, st in enumerate(states):
        wave = phy.random_frame(mod, st.rng).time_cp
        reps = -(-n // wave.size)
        out += gains[i] * (np.tile(wave, reps)[:n] if reps > 1 else wave[:n])
    return out


def awgn(n: int, variance: float, rng: np.random.Generator) -> np.ndarray:
    return math.sqrt(variance / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def synthesize_received(x0: np.ndarray, desired: ChannelRealization,
                        interferers: list[InterfererState], env: EnvConfig,
                        rng: np.random.Generator, *, mod: phy.ModConfig | None = None,
                        start: int = 0, w_rx: np.ndarray | None = None,
                        w_tx: np.ndarray | None = None) -> np.ndarray:
    """Received samples at the combiner output.

    r = sqrt(P_b) (w0^H H0 w_b) x0 + sum_i sqrt(P_i) (w0^H H_i w_i) x_i 1{active} + n

    Beams default to the matched pair for ``desired``; ``rng`` feeds the
    noise only, ``start`` is the absolute index of ``x0[0]``.
    """
    x0 = np.asarray(x0, dtype=complex)
    if x0.ndim != 1:
        raise InvalidInput("desired frame must be one-dimensional")
    if w_rx is None:
        w_rx = matched_weights(desired, "rx")
        rx_response = matched_combiner_response(desired.theta_r, env)
    else:
        rx_response = combiner_response(w_rx, env)
    if w_tx is None:
        w_tx = matched_weights(desired, "tx")
    for w in (w_rx, w_tx):
        if abs(np.linalg.norm(w) - 1) > 1e-9:
            raise InvalidInput("beamforming/combining vectors must be unit-norm")
    r = math.sqrt(env.bs_power) * effective_gain(w_rx, desired, w_tx) * x0
    if interferers:
        if mod is None:
            mod = phy.ModConfig()
        if w_rx.size != env.n_rx:
            raise InvalidInput("combiner size does not match n_rx")
        r = r + interference(interferers, rx_response, start, x0.size, env, mod)
    if env.noise_var > 0:
        r = r + awgn(x0.size, env.noise_var, rng)
    return r

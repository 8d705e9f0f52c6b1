"""Frame loop tying transmitter, channel, preprocessor, receiver and agent
together, plus seeded sweeps and CSV output."""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import actions, bandit, channel, phy, preproc
from .errors import ConfigError, InvalidInput

log = logging.getLogger(__name__)

MITIGATIONS = ("none", "bln", "clp", "mab")
_ALIASES = {"blanking": "bln", "clipping": "clp"}
SWEEP_PARAMS = ("sir_db", "eb_n0_db", "n_antennas", "lambda_i", "n_interferers", "mitigation")

TRACE_COLUMNS = ("frame", "sir_db", "mitigation", "action_index", "kappa", "ber",
                 "epsilon", "mean_regret_of_action")
SUMMARY_COLUMNS = ("param", "value", "mean_ber", "ci95_halfwidth")


class NumericalError(ArithmeticError):
    """Simulation produced non-finite samples."""


def canonical_mitigation(name: str) -> str:
    name = _ALIASES.get(name, name)
    if name not in MITIGATIONS:
        raise ConfigError(f"unknown mitigation {name!r}; expected one of {MITIGATIONS}")
    return name


@dataclass(frozen=True)
class SimConfig:
    mod: phy.ModConfig = field(default_factory=phy.ModConfig)
    env: channel.EnvConfig = field(default_factory=channel.EnvConfig)
    M: int = 3
    n: int = 1
    q: int = 20
    p_fa: float = 1e-3
    frames: int = 20000
    seed: int = 0
    mitigation: str = "mab"
    sweep: tuple[tuple[str, tuple], ...] = ()
    # threshold multiplier for the blanking/clipping baselines
    baseline_kappa: float = 1.0
    perfect_csi: bool = False
    optimistic_value: float = 0.0
    epsilon_floor: float = 0.0
    step_size: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "mitigation", canonical_mitigation(self.mitigation))
        if self.frames < 1:
            raise ConfigError("frames must be >= 1")
        if self.M < 1 or self.n < 1 or self.q < 1:
            raise ConfigError("M, n and q must be >= 1")
        if self.n != 1:
            raise ConfigError("the learning loop runs the simplified space; n must be 1")
        if not 0 < self.p_fa < 1:
            raise ConfigError("p_fa must lie in (0, 1)")
        if self.baseline_kappa <= 0:
            raise ConfigError("baseline_kappa must be positive")
        for param, _ in self.sweep:
            if param not in SWEEP_PARAMS:
                raise ConfigError(f"unknown sweep parameter {param!r}")

    @property
    def n_actions(self) -> int:
        return self.q * actions.count_level_sets(self.M)

    @property
    def exploration_frames(self) -> int:
        """Frame index from which epsilon is 0 (with the default floor)."""
        return 10 * self.n_actions


@dataclass
class RunRecord:
    mitigation: str
    sir_db: float
    frame: np.ndarray
    action: np.ndarray
    kappa: np.ndarray
    ber: np.ndarray
    epsilon: np.ndarray
    q_of_action: np.ndarray
    action_histogram: np.ndarray
    seed: int = 0
    param: str | None = None
    value: object = None

    @property
    def mean_ber(self) -> float:
        return float(self.ber.mean())

    def ci95_halfwidth(self, start: int = 0) -> float:
        b = self.ber[start:]
        if b.size < 2:
            return math.nan
        return float(1.96 * b.std(ddof=1) / math.sqrt(b.size))

    def mean_ber_from(self, start: int) -> float:
        return float(self.ber[start:].mean())

    def tail_histogram(self, last: int) -> np.ndarray:
        a = self.action[-last:]
        return np.bincount(a[a >= 0], minlength=self.action_histogram.size)


def _streams(seed: int) -> dict[str, np.random.Generator]:
    # the channel-side streams must not depend on what the receiver does,
    # so every mitigation mode sees the same received samples
    names = ("data", "fading", "interferers", "noise", "agent", "rx")
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {k: np.random.Generator(np.random.PCG64(s)) for k, s in zip(names, children)}


def _mitigate(r: np.ndarray, cfg: SimConfig, beta0_hat: float, agent, catalog, rng):
    """Returns (processed samples, action index, kappa)."""
    mode = cfg.mitigation
    if mode == "none":
        return r, -1, math.nan
    if mode in ("bln", "clp"):
        t = cfg.baseline_kappa * beta0_hat
        if t <= 0:
            return r, -1, cfg.baseline_kappa
        f = preproc.apply_blanking if mode == "bln" else preproc.apply_clipping
        return f(r, t), -1, cfg.baseline_kappa
    a = bandit.select_action(agent, rng)
    peak = float(np.abs(r).max())
    if beta0_hat > 0 and peak > 0:
        profile = actions.materialize(catalog, a, beta0_hat, peak)
    else:
        profile = preproc.ClipperProfile.identity()
    return preproc.apply_multithreshold(r, profile), a, catalog.kappa(a)


def run_episode(cfg: SimConfig) -> RunRecord:
    mod, env = cfg.mod, cfg.env
    g = _streams(cfg.seed)
    rx_geom, tx_geom = env.geometry(env.n_rx), env.geometry(env.n_bs)
    interferers = channel.draw_interferers(env, g["interferers"])

    catalog = agent = None
    if cfg.mitigation == "mab":
        catalog = actions.build_catalog(cfg.M, cfg.q, cfg.n)
        schedule = bandit.EpsilonSchedule.for_actions(len(catalog), floor=cfg.epsilon_floor)
        agent = bandit.init_agent(len(catalog), cfg.optimistic_value,
                                  schedule=schedule, step_size=cfg.step_size)

    F = cfg.frames
    act = np.full(F, -1, dtype=np.int64)
    kap = np.full(F, math.nan)
    ber = np.empty(F)
    eps = np.full(F, math.nan)
    qa = np.full(F, math.nan)
    L = mod.frame_len

    for f in range(F):
        alpha = complex(channel.rayleigh(g["fading"])) if env.fading else 1.0 + 0j
        th_r = float(g["fading"].uniform(-channel.HALF_PI, channel.HALF_PI))
        th_t = float(g["fading"].uniform(-channel.HALF_PI, channel.HALF_PI))
        desired = channel.make_channel(alpha, th_r, th_t, rx_geom, tx_geom)
        frame = phy.random_frame(mod, g["data"])
        r = channel.synthesize_received(frame.time_cp, desired, interferers, env, g["noise"],
                                        mod=mod, start=f * L)

        beta0_hat = preproc.base_threshold(preproc.estimate_sigma(r), cfg.p_fa)
        if agent is not None:
            eps[f] = agent.epsilon
        r_hat, a, k = _mitigate(r, cfg, beta0_hat, agent, catalog, g["agent"])
        if not np.all(np.isfinite(r_hat)):
            raise NumericalError(f"non-finite received samples in frame {f}")

        y = phy.ofdm_demodulate(r_hat, mod)
        eq = phy.estimate_and_equalize(y, mod, h_true=desired_h(env, desired) if cfg.perfect_csi else None)
        ber[f] = phy.compute_ber(frame.bits, phy.detect_bits(eq, g["rx"]))
        act[f], kap[f] = a, k
        if agent is not None:
            bandit.update(agent, a, ber[f])
            qa[f] = agent.q_values[a]

    hist = agent.pull_counts.copy() if agent is not None else np.zeros(0, dtype=np.int64)
    return RunRecord(cfg.mitigation, env.sir_db, np.arange(F), act, kap, ber, eps, qa, hist,
                     seed=cfg.seed)


def desired_h(env: channel.EnvConfig, desired: channel.ChannelRealization) -> complex:
    """Genie per-subcarrier channel of the matched-beam desired link."""
    return math.sqrt(env.bs_power) * desired.alpha * math.sqrt(env.n_rx * env.n_bs)


def apply_param(cfg: SimConfig, parameter: str, value) -> SimConfig:
    env = cfg.env
    if parameter == "mitigation":
        return replace(cfg, mitigation=value)
    if parameter == "n_antennas":
        return replace(cfg, env=env.with_(n_rx=int(value), n_bs=int(value)))
    if parameter == "n_interferers":
        return replace(cfg, env=env.with_(n_interferers=int(value)))
    if parameter in ("sir_db", "eb_n0_db", "lambda_i"):
        return replace(cfg, env=env.with_(**{parameter: float(value)}))
    raise InvalidInput(f"unknown sweep parameter {parameter!r}; expected one of {SWEEP_PARAMS}")


def derive_seed(base_seed: int, index: int) -> int:
    return int(np.random.SeedSequence([base_seed, index]).generate_state(1, np.uint64)[0])


def _run_point(args):
    point_cfg, parameter, value = args
    rec = run_episode(point_cfg)
    rec.param, rec.value = parameter, value
    return rec


def run_sweep(cfg: SimConfig, parameter: str, values, *, paired: bool | None = None,
              workers: int = 1) -> list[RunRecord]:
    """One episode per value.

    Paired sweeps reuse ``cfg.seed`` for every point (common random numbers);
    otherwise point i runs with a seed derived from (seed, i). Mitigation
    sweeps are paired by default.
    """
    if parameter not in SWEEP_PARAMS:
        raise InvalidInput(f"unknown sweep parameter {parameter!r}; expected one of {SWEEP_PARAMS}")
    if paired is None:
        paired = parameter == "mitigation"
    jobs = []
    for i, v in enumerate(values):
        seed = cfg.seed if paired else derive_seed(cfg.seed, i)
        jobs.append((replace(apply_param(cfg, parameter, v), seed=seed), parameter, v))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_point, jobs))
    return [_run_point(j) for j in jobs]


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (np.integer,)):
        return str(int(x))
    return str(x)


def write_rows(records: list[RunRecord], fh, kind: str = "trace") -> None:
    if kind not in ("trace", "summary"):
        raise InvalidInput(f"kind must be 'trace' or 'summary', got {kind!r}")
    w = csv.writer(fh)
    if kind == "summary":
        w.writerow(SUMMARY_COLUMNS)
        for rec in records:
            w.writerow([_fmt(rec.param), _fmt(rec.value), _fmt(rec.mean_ber),
                        _fmt(rec.ci95_halfwidth())])
        return
    w.writerow(TRACE_COLUMNS)
    for rec in records:
        for f in range(rec.frame.size):
            w.writerow([rec.frame[f], _fmt(rec.sir_db), rec.mitigation,
                        rec.action[f], _fmt(rec.kappa[f]), _fmt(rec.ber[f]),
                        _fmt(rec.epsilon[f]), _fmt(rec.q_of_action[f])])


def emit_csv(records: list[RunRecord], path, kind: str = "trace") -> Path:
    """Write a per-frame trace or a per-record sweep summary."""
    if kind not in ("trace", "summary"):
        raise InvalidInput(f"kind must be 'trace' or 'summary', got {kind!r}")
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            write_rows(records, fh, kind)
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc
    return path

"""Decaying epsilon-greedy bandit minimizing mean regret (frame BER)."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import InvalidInput


@dataclass(frozen=True)
class EpsilonSchedule:
    """Linear decay: eps(t) = max(floor, initial - t / horizon)."""
    horizon: int
    initial: float = 1.0
    floor: float = 0.0

    def __post_init__(self):
        if self.horizon < 1:
            raise InvalidInput("horizon must be >= 1")
        if not 0.0 <= self.floor <= self.initial <= 1.0:
            raise InvalidInput("need 0 <= floor <= initial <= 1")

    @classmethod
    def for_actions(cls, n_actions: int, floor: float = 0.0) -> "EpsilonSchedule":
        return cls(10 * n_actions, floor=floor)

    @property
    def decrement_per_step(self) -> float:
        return 1.0 / self.horizon

    def __call__(self, t: int) -> float:
        return max(self.floor, self.initial - t / self.horizon)


class StepRecord(NamedTuple):
    t: int
    epsilon: float
    action: int
    regret: float
    q_value: float


@dataclass
class AgentState:
    q_values: np.ndarray
    pull_counts: np.ndarray
    schedule: EpsilonSchedule
    epsilon: float = 1.0
    step: int = 0
    # None -> sample average; a float selects a constant step size
    step_size: float | None = None
    on_step: Callable[[StepRecord], None] | None = field(default=None, repr=False)

    @property
    def n_actions(self) -> int:
        return self.q_values.size


def init_agent(n_actions: int, optimistic_value: float = 0.0, *,
               schedule: EpsilonSchedule | None = None, step_size: float | None = None,
               on_step: Callable[[StepRecord], None] | None = None) -> AgentState:
    """Fresh agent; every Q starts at ``optimistic_value``.

    Regret is minimized, so 0 (the best possible BER) is the optimistic start.
    """
    if n_actions < 1:
        raise InvalidInput(f"need at least one action, got {n_actions}")
    if step_size is not None and not 0 < step_size <= 1:
        raise InvalidInput(f"step_size must lie in (0, 1], got {step_size}")
    schedule = schedule or EpsilonSchedule.for_actions(n_actions)
    return AgentState(
        q_values=np.full(n_actions, float(optimistic_value)),
        pull_counts=np.zeros(n_actions, dtype=np.int64),
        schedule=schedule,
        epsilon=schedule(0),
        step_size=step_size,
        on_step=on_step,
    )


def select_action(state: AgentState, rng: np.random.Generator) -> int:
    # one uniform draw per call whatever the branch, so traces stay aligned
    explore = rng.random() < state.epsilon
    if explore:
        return int(rng.integers(state.n_actions))
    return int(np.argmin(state.q_values))  # first minimum wins ties


def update(state: AgentState, action: int, regret: float) -> AgentState:
    if not 0 <= action < state.n_actions:
        raise InvalidInput(f"action {action} out of range")
    if not 0.0 <= regret <= 1.0:
        raise InvalidInput(f"regret must lie in [0, 1], got {regret}")
    state.pull_counts[action] += 1
    q = state.q_values[action]
    if state.step_size is None:
        n = state.pull_counts[action]
        q = regret if n == 1 else q + (regret - q) / n
    else:
        q += state.step_size * (regret - q)
    state.q_values[action] = q
    if state.on_step is not None:
        state.on_step(StepRecord(state.step, state.epsilon, action, regret, float(q)))
    state.step += 1
    state.epsilon = state.schedule(state.step)
    return state

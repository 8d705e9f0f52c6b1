"""Finite action space for the multi-threshold clipper.

An action pairs a correction factor kappa (beta_0 = kappa * beta0_hat) with
a non-increasing sequence of clipping levels. Level sequences are the
monotone lattice paths through an M x M grid of (level, interval) cells:
each step to the next interval either keeps the level (move right) or drops
to any lower one (move diagonally).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidInput
from .preproc import ClipperProfile

KAPPA_MIN = 0.5
KAPPA_MAX = 10.0
MAX_ENUM_M = 8
_INT64_MAX = 2**63 - 1

LevelSequence = tuple[int, ...]


def _check_m(M: int) -> None:
    if not isinstance(M, (int, np.integer)) or M < 1:
        raise InvalidInput(f"M must be a positive integer, got {M!r}")


def _path_counts(M: int) -> list[list[int]]:
    """paths[m][i]: monotone paths that reach row i in column m."""
    paths = [[1] * M]  # column 0 may be entered on any row from the top-left origin
    for _ in range(1, M):
        prev = paths[-1]
        paths.append(list(itertools.accumulate(prev)))
    return paths


def count_level_sets(M: int) -> int:
    """Number J_M of non-increasing length-M level sequences over M levels."""
    _check_m(M)
    # group by end row as the table is built: J_M = sum_i J_i
    return sum(_path_counts(M)[-1])


def enumerate_level_sequences(M: int) -> list[LevelSequence]:
    """All level sequences, grouped by the row their path ends on.

    Index 0 is the highest level; indices never decrease along a sequence,
    so the levels they address never increase.
    """
    _check_m(M)
    if M > MAX_ENUM_M:
        raise InvalidInput(f"enumeration limited to M <= {MAX_ENUM_M}, got {M}")
    out: list[LevelSequence] = []

    def walk(path: list[int], end: int) -> None:
        if len(path) == M:
            if path[-1] == end:
                out.append(tuple(path))
            return
        lo = path[-1] if path else 0
        for row in range(lo, end + 1):
            path.append(row)
            walk(path, end)
            path.pop()

    for end in range(M):
        walk([], end)
    return out


def count_threshold_sets(n: int, M: int) -> int:
    """C(nM, M): ways to pick M increasing thresholds out of n*M candidates."""
    _check_m(M)
    if n < 1:
        raise InvalidInput(f"n must be >= 1, got {n}")
    value = math.comb(n * M, M)
    if value > _INT64_MAX:
        raise OverflowError(f"C({n * M}, {M}) exceeds 64-bit range")
    return value


def full_action_count(n: int, M: int) -> int:
    value = count_threshold_sets(n, M) * count_level_sets(M)
    if value > _INT64_MAX:
        raise OverflowError(f"action count for n={n}, M={M} exceeds 64-bit range")
    return value


def enumerate_threshold_sets(n: int, M: int, limit: int = 100_000) -> list[tuple[int, ...]]:
    """Index sets into the n*M candidate grid (1-based, last index = beta_M ~ max)."""
    if count_threshold_sets(n, M) > limit:
        raise InvalidInput(f"{count_threshold_sets(n, M)} threshold sets exceed limit {limit}")
    return list(itertools.combinations(range(1, n * M + 1), M))


def level_grid(beta0: float, M: int) -> np.ndarray:
    """Candidate levels beta0 * (M - j) / M for j = 1..M, highest first, ending at 0."""
    return beta0 * (M - np.arange(1, M + 1)) / M


@dataclass(frozen=True)
class ActionCatalog:
    m_intervals: int
    n_resolution: int
    q_levels: int
    kappa_grid: tuple[float, ...]
    level_sequences: tuple[LevelSequence, ...]

    def __len__(self) -> int:
        return self.q_levels * len(self.level_sequences)

    @cached_property
    def actions(self) -> list[tuple[int, int]]:
        return [(k, s) for k in range(self.q_levels) for s in range(len(self.level_sequences))]

    def decode(self, action: int) -> tuple[float, LevelSequence]:
        if not 0 <= action < len(self):
            raise InvalidInput(f"action {action} outside catalog of {len(self)}")
        k, s = divmod(action, len(self.level_sequences))
        return self.kappa_grid[k], self.level_sequences[s]

    def kappa(self, action: int) -> float:
        return self.decode(action)[0]

    def dump(self) -> str:
        lines = ["# index\tkappa\tlevel_indices"]
        for a in range(len(self)):
            kappa, seq = self.decode(a)
            lines.append(f"{a}\t{kappa!r}\t{','.join(map(str, seq))}")
        return "\n".join(lines) + "\n"


def build_catalog(M: int = 3, q: int = 20, n: int = 1) -> ActionCatalog:
    """kappa quantized to q levels on [0.5, 10] crossed with every level sequence."""
    _check_m(M)
    if q < 1:
        raise InvalidInput(f"q must be >= 1, got {q}")
    kappas = tuple(float(k) for k in np.linspace(KAPPA_MIN, KAPPA_MAX, q))
    return ActionCatalog(M, n, q, kappas, tuple(enumerate_level_sequences(M)))


def materialize(catalog: ActionCatalog, action: int, beta0_hat: float,
                frame_max_amp: float) -> ClipperProfile:
    """Concrete clipper for ``action`` on a frame whose peak amplitude is ``frame_max_amp``.

    beta_0 = kappa * beta0_hat, the M intervals split [beta_0, max] evenly.
    When beta_0 already covers the peak the clipper is the identity.
    """
    if not beta0_hat > 0 or not frame_max_amp > 0:
        raise InvalidInput(
            f"beta0_hat and frame_max_amp must be positive, got {beta0_hat}, {frame_max_amp}")
    kappa, seq = catalog.decode(action)
    beta0 = kappa * beta0_hat
    if beta0 >= frame_max_amp:
        return ClipperProfile.identity()
    M = catalog.m_intervals
    betas = np.linspace(beta0, frame_max_amp, M + 1)
    return ClipperProfile(tuple(betas), tuple(level_grid(beta0, M)[list(seq)]))


def materialize_full(beta0: float, frame_max_amp: float, n: int,
                     threshold_set: tuple[int, ...], seq: LevelSequence) -> ClipperProfile:
    """Profile for the unsimplified space: thresholds picked from n*M grid points."""
    M = len(seq)
    if len(threshold_set) != M:
        raise InvalidInput("threshold set and level sequence lengths differ")
    if not 0 < beta0 < frame_max_amp:
        raise InvalidInput("need 0 < beta0 < frame_max_amp")
    grid = beta0 + (frame_max_amp - beta0) * np.arange(n * M + 1) / (n * M)
    betas = [beta0, *grid[list(threshold_set)]]
    return ClipperProfile(tuple(betas), tuple(level_grid(beta0, M)[list(seq)]))

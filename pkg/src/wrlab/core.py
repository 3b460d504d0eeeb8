"""Hierarchical pairwise comparison engine for composite endpoints.

Compares treatment/control patients level by level through an ordered
outcome hierarchy, descending to the next level on ties, and tallies
wins, losses and ties over either all cross-arm pairs (unmatched) or an
externally supplied pairing (matched).

Censored time-to-event values are only compared on the interval where both
patients are under observation: a pair is decided at a time-to-event level
only when the less favorable patient's event is known to precede the other
patient's observation time by more than the margin. Everything else at that
level is a tie.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import AllTiesError, InvalidInputError


class OutcomeKind(str, Enum):
    TIME_TO_EVENT = "time-to-event"
    CONTINUOUS = "continuous"
    BINARY = "binary"
    COUNT = "count"


class Direction(str, Enum):
    HIGHER = "higher-favorable"
    LOWER = "lower-favorable"


class Arm(str, Enum):
    TREATMENT = "T"
    CONTROL = "C"


class Verdict(str, Enum):
    WIN = "win"
    LOSS = "loss"
    TIE = "tie"


@dataclass(frozen=True)
class OutcomeSpec:
    """One level of the hierarchy: outcome type, favorable direction, margin."""

    name: str
    kind: OutcomeKind
    direction: Direction
    margin: float = 0.0

    def __post_init__(self) -> None:
        if not self.name:
            raise InvalidInputError("OutcomeSpec: name must be non-empty")
        if not math.isfinite(self.margin) or self.margin < 0.0:
            raise InvalidInputError(f"OutcomeSpec '{self.name}': margin must be >= 0")
        if self.kind is OutcomeKind.BINARY and self.margin != 0.0:
            raise InvalidInputError(f"OutcomeSpec '{self.name}': binary outcomes take margin 0")


@dataclass(frozen=True)
class Hierarchy:
    """Ordered outcome levels, highest-ranked (most severe) first."""

    levels: tuple[OutcomeSpec, ...]

    def __post_init__(self) -> None:
        if not self.levels:
            raise InvalidInputError("Hierarchy: at least one level required")
        names = [s.name for s in self.levels]
        if len(set(names)) != len(names):
            raise InvalidInputError(f"Hierarchy: level names must be unique, got {names}")

    def __len__(self) -> int:
        return len(self.levels)


# Per-level patient value: scalar for continuous/binary/count, or a
# (time, event-observed) pair for time-to-event.
LevelValue = Union[float, int, tuple[float, bool]]


@dataclass(frozen=True)
class PatientRecord:
    id: str
    arm: Arm
    values: tuple[LevelValue, ...]


@dataclass(frozen=True)
class ComparisonResult:
    verdict: Verdict
    deciding_level: int | None  # 0-based; None iff tie

    def __post_init__(self) -> None:
        if (self.deciding_level is None) != (self.verdict is Verdict.TIE):
            raise InvalidInputError("ComparisonResult: deciding_level present iff not a tie")


@dataclass(frozen=True)
class WinStats:
    """Win/loss/tie tallies with per-level decision counts."""

    n_win: int
    n_loss: int
    n_tie: int
    n_pairs: int
    decided_at_level: Mapping[int, int]
    pairing: str  # "unmatched" | "matched"
    n_treatment: int
    n_control: int

    def __post_init__(self) -> None:
        if self.n_win + self.n_loss + self.n_tie != self.n_pairs:
            raise InvalidInputError("WinStats: win + loss + tie must equal n_pairs")
        if sum(self.decided_at_level.values()) != self.n_win + self.n_loss:
            raise InvalidInputError("WinStats: per-level decisions must sum to win + loss")
        if self.pairing not in ("unmatched", "matched"):
            raise InvalidInputError(f"WinStats: unknown pairing {self.pairing!r}")

    @property
    def n_informative(self) -> int:
        return self.n_win + self.n_loss


# Columnar form of one arm's data for a hierarchy: one entry per level,
# either a float array (scalar kinds) or a (times, events) array pair.
LevelColumn = Union[np.ndarray, tuple[np.ndarray, np.ndarray]]


def _validate_scalar(value: float, spec: OutcomeSpec) -> float:
    v = float(value)
    if not math.isfinite(v):
        raise InvalidInputError(f"level '{spec.name}': non-finite value {value!r}")
    if spec.kind is OutcomeKind.BINARY and v not in (0.0, 1.0):
        raise InvalidInputError(f"level '{spec.name}': binary value must be 0 or 1, got {value!r}")
    if spec.kind is OutcomeKind.COUNT and (v < 0 or v != int(v)):
        raise InvalidInputError(f"level '{spec.name}': count must be a nonnegative integer, got {value!r}")
    return v


def _validate_tte(value: LevelValue, spec: OutcomeSpec) -> tuple[float, bool]:
    if not isinstance(value, tuple) or len(value) != 2:
        raise InvalidInputError(f"level '{spec.name}': time-to-event needs a (time, event) pair")
    t = float(value[0])
    if not math.isfinite(t) or t < 0.0:
        raise InvalidInputError(f"level '{spec.name}': time must be finite and >= 0, got {value[0]!r}")
    return t, bool(value[1])


def compare_at_level(a: LevelValue, b: LevelValue, spec: OutcomeSpec) -> Verdict:
    """Compare treatment value `a` against control value `b` at one level."""
    m = spec.margin
    if spec.kind is OutcomeKind.TIME_TO_EVENT:
        t_a, ev_a = _validate_tte(a, spec)
        t_b, ev_b = _validate_tte(b, spec)
        if spec.direction is Direction.HIGHER:  # later / absent event favorable
            if ev_b and t_a > t_b + m:
                return Verdict.WIN
            if ev_a and t_b > t_a + m:
                return Verdict.LOSS
        else:  # earlier event favorable
            if ev_a and t_b > t_a + m:
                return Verdict.WIN
            if ev_b and t_a > t_b + m:
                return Verdict.LOSS
        return Verdict.TIE

    va = _validate_scalar(a, spec)
    vb = _validate_scalar(b, spec)
    diff = va - vb if spec.direction is Direction.HIGHER else vb - va
    if diff > m:
        return Verdict.WIN
    if diff < -m:
        return Verdict.LOSS
    return Verdict.TIE


def compare_pair(a: PatientRecord, b: PatientRecord, h: Hierarchy) -> ComparisonResult:
    """Hierarchical comparison: verdict of the first non-tied level."""
    if len(a.values) != len(h) or len(b.values) != len(h):
        raise InvalidInputError("compare_pair: record length must equal hierarchy length")
    for k, spec in enumerate(h.levels):
        verdict = compare_at_level(a.values[k], b.values[k], spec)
        if verdict is not Verdict.TIE:
            return ComparisonResult(verdict, k)
    return ComparisonResult(Verdict.TIE, None)


def arm_columns(records: Sequence[PatientRecord], h: Hierarchy) -> list[LevelColumn]:
    """Validate records of one arm and convert to per-level column arrays."""
    cols: list[LevelColumn] = []
    for k, spec in enumerate(h.levels):
        if spec.kind is OutcomeKind.TIME_TO_EVENT:
            pairs = [_validate_tte(r.values[k], spec) for r in records]
            times = np.array([p[0] for p in pairs], dtype=np.float64)
            events = np.array([p[1] for p in pairs], dtype=bool)
            cols.append((times, events))
        else:
            cols.append(np.array([_validate_scalar(r.values[k], spec) for r in records],
                                 dtype=np.float64))
    return cols


def split_dataset(dataset: Iterable[PatientRecord], h: Hierarchy
                  ) -> tuple[list[LevelColumn], list[LevelColumn]]:
    """Split mixed-arm records into treatment and control column sets."""
    treat, ctrl = [], []
    for r in dataset:
        if len(r.values) != len(h):
            raise InvalidInputError(f"patient {r.id!r}: {len(r.values)} values for "
                                    f"{len(h)}-level hierarchy")
        (treat if r.arm is Arm.TREATMENT else ctrl).append(r)
    if not treat or not ctrl:
        raise InvalidInputError("dataset must contain at least one patient per arm")
    return arm_columns(treat, h), arm_columns(ctrl, h)


def _win_loss_masks(spec: OutcomeSpec, a_vals, b_vals) -> tuple[np.ndarray, np.ndarray]:
    """Boolean win/loss masks for broadcastable treatment/control arrays."""
    m = spec.margin
    if spec.kind is OutcomeKind.TIME_TO_EVENT:
        (t_a, ev_a), (t_b, ev_b) = a_vals, b_vals
        a_after_b = t_a > t_b + m
        b_after_a = t_b > t_a + m
        if spec.direction is Direction.HIGHER:
            return ev_b & a_after_b, ev_a & b_after_a
        return ev_a & b_after_a, ev_b & a_after_b
    diff = a_vals - b_vals
    if spec.direction is Direction.HIGHER:
        return diff > m, diff < -m
    return diff < -m, diff > m


def _broadcast_level(col: LevelColumn, axis: int):
    """Reshape a level column for outer (cross-pair) comparison."""
    def shape(arr: np.ndarray) -> np.ndarray:
        return arr[:, None] if axis == 0 else arr[None, :]
    if isinstance(col, tuple):
        return shape(col[0]), shape(col[1])
    return shape(col)


def pairwise_verdicts(t_cols: Sequence[LevelColumn], c_cols: Sequence[LevelColumn],
                      h: Hierarchy) -> tuple[np.ndarray, np.ndarray]:
    """Verdict and deciding-level matrices over all treatment x control pairs.

    Returns (verdict, level): verdict is int8 with +1 win / -1 loss / 0 tie,
    level is the 0-based deciding level, -1 for overall ties.
    """
    n_t = (t_cols[0][0] if isinstance(t_cols[0], tuple) else t_cols[0]).shape[0]
    n_c = (c_cols[0][0] if isinstance(c_cols[0], tuple) else c_cols[0]).shape[0]
    verdict = np.zeros((n_t, n_c), dtype=np.int8)
    level = np.full((n_t, n_c), -1, dtype=np.int16)
    undecided = np.ones((n_t, n_c), dtype=bool)
    for k, spec in enumerate(h.levels):
        win, loss = _win_loss_masks(spec, _broadcast_level(t_cols[k], 0),
                                    _broadcast_level(c_cols[k], 1))
        new_win = undecided & win
        new_loss = undecided & loss
        verdict[new_win] = 1
        verdict[new_loss] = -1
        level[new_win | new_loss] = k
        undecided &= ~(win | loss)
        if not undecided.any():
            break
    return verdict, level


def winstats_from_verdicts(verdict: np.ndarray, level: np.ndarray, pairing: str,
                           n_treatment: int, n_control: int, n_levels: int) -> WinStats:
    n_win = int((verdict == 1).sum())
    n_loss = int((verdict == -1).sum())
    n_pairs = int(verdict.size)
    decided = {k: int((level == k).sum()) for k in range(n_levels) if (level == k).any()}
    return WinStats(n_win=n_win, n_loss=n_loss, n_tie=n_pairs - n_win - n_loss,
                    n_pairs=n_pairs, decided_at_level=decided, pairing=pairing,
                    n_treatment=n_treatment, n_control=n_control)


def tally_columns(t_cols: Sequence[LevelColumn], c_cols: Sequence[LevelColumn],
                  h: Hierarchy) -> WinStats:
    """Unmatched tally over all pairs, columnar input (hot path for simulations)."""
    verdict, level = pairwise_verdicts(t_cols, c_cols, h)
    return winstats_from_verdicts(verdict, level, "unmatched",
                                  verdict.shape[0], verdict.shape[1], len(h))


def tally_unmatched(dataset: Iterable[PatientRecord], h: Hierarchy) -> WinStats:
    """Tally wins/losses/ties over all N_T x N_C cross-arm pairs."""
    t_cols, c_cols = split_dataset(dataset, h)
    return tally_columns(t_cols, c_cols, h)


def tally_matched(pairs: Sequence[tuple[PatientRecord, PatientRecord]],
                  h: Hierarchy) -> WinStats:
    """Tally over an externally supplied (treatment, control) pairing."""
    if not pairs:
        raise InvalidInputError("tally_matched: at least one pair required")
    t_cols = arm_columns([p[0] for p in pairs], h)
    c_cols = arm_columns([p[1] for p in pairs], h)
    n = len(pairs)
    verdict = np.zeros(n, dtype=np.int8)
    level = np.full(n, -1, dtype=np.int16)
    undecided = np.ones(n, dtype=bool)
    for k, spec in enumerate(h.levels):
        win, loss = _win_loss_masks(spec, t_cols[k], c_cols[k])
        new_win = undecided & win
        new_loss = undecided & loss
        verdict[new_win] = 1
        verdict[new_loss] = -1
        level[new_win | new_loss] = k
        undecided &= ~(win | loss)
    return winstats_from_verdicts(verdict, level, "matched", n, n, len(h))


def win_ratio(s: WinStats) -> float:
    """N_win / N_loss; +inf when losses are zero but wins are not."""
    if s.n_informative == 0:
        raise AllTiesError("all pairwise comparisons tied; win ratio undefined")
    if s.n_loss == 0:
        return math.inf
    return s.n_win / s.n_loss


def win_odds(s: WinStats) -> float:
    """(N_win + ties/2) / (N_loss + ties/2); every pair contributes."""
    if s.n_pairs < 1:
        raise InvalidInputError("win_odds: empty tally")
    denom = s.n_loss + 0.5 * s.n_tie
    if denom == 0.0:
        return math.inf
    return (s.n_win + 0.5 * s.n_tie) / denom

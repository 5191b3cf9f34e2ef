"""Core domain types and the single-agent decision procedure.

Everything in this module is a pure function over immutable (or caller-owned)
inputs: scoring, perception filtering, habit strength, mode availability, and
the full decision step. Randomness is injected by the caller as pre-drawn
uniforms, so every operation is deterministic and directly testable.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Mapping, Sequence

__all__ = [
    "Mode",
    "Criterion",
    "ModeCriterionMatrix",
    "PriorityVector",
    "TripHistory",
    "Agent",
    "Decision",
    "WALK_MAX_KM",
    "BIKE_MAX_KM",
    "DEFAULT_HISTORY_CAPACITY",
    "habit_strength",
    "usual_mode",
    "effective_filter",
    "perceive",
    "score",
    "available_modes",
    "choose_mode",
]

#: Walking is only an option strictly below this home-work distance.
WALK_MAX_KM = 7.0
#: Cycling is only an option strictly below this home-work distance.
BIKE_MAX_KM = 15.0
#: Default trip-history length, roughly one month of commutes.
DEFAULT_HISTORY_CAPACITY = 20


class Mode(IntEnum):
    """The four mobility modes, in canonical order."""

    BIKE = 0
    BUS = 1
    CAR = 2
    WALK = 3

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, text: str) -> "Mode":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown mode {text!r}; expected one of "
                             f"{[m.label for m in cls]}") from None


class Criterion(IntEnum):
    """The six evaluation criteria, in canonical order."""

    ECOLOGY = 0
    COMFORT = 1
    PRICE = 2
    TIME = 3
    PRACTICALITY = 4
    SAFETY = 5

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, text: str) -> "Criterion":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown criterion {text!r}; expected one of "
                             f"{[c.label for c in cls]}") from None


MODES = tuple(Mode)
CRITERIA = tuple(Criterion)


def _as_rows(entries: Iterable[Iterable[float]]) -> tuple[tuple[float, ...], ...]:
    rows = tuple(tuple(float(v) for v in row) for row in entries)
    if len(rows) != len(MODES) or any(len(r) != len(CRITERIA) for r in rows):
        raise ValueError("matrix must have 4 mode rows of 6 criterion values")
    for row in rows:
        for v in row:
            if not math.isfinite(v):
                raise ValueError("matrix entries must be finite")
    return rows


@dataclass(frozen=True)
class ModeCriterionMatrix:
    """A 4x6 grid indexed by (mode, criterion).

    The same shape serves two roles with different ranges: value matrices
    (objective or perceived environment) live in [0, 10], filter matrices
    hold strictly positive multiplicative factors. Use the dedicated
    constructors to get the matching range check.
    """

    rows: tuple[tuple[float, ...], ...]

    @classmethod
    def value_matrix(cls, entries: Iterable[Iterable[float]]) -> "ModeCriterionMatrix":
        rows = _as_rows(entries)
        for row in rows:
            for v in row:
                if not 0.0 <= v <= 10.0:
                    raise ValueError(f"value {v} outside [0, 10]")
        return cls(rows)

    @classmethod
    def filter_matrix(cls, entries: Iterable[Iterable[float]]) -> "ModeCriterionMatrix":
        rows = _as_rows(entries)
        for row in rows:
            for v in row:
                if v <= 0.0:
                    raise ValueError(f"filter factor {v} must be positive")
        return cls(rows)

    @classmethod
    def identity_filter(cls) -> "ModeCriterionMatrix":
        """The neutral filter: all-ones, no perceptual distortion."""
        return cls(tuple((1.0,) * len(CRITERIA) for _ in MODES))

    def value(self, mode: Mode, criterion: Criterion) -> float:
        return self.rows[mode][criterion]

    def row(self, mode: Mode) -> tuple[float, ...]:
        return self.rows[mode]

    def with_value(self, mode: Mode, criterion: Criterion, value: float) -> "ModeCriterionMatrix":
        rows = [list(r) for r in self.rows]
        rows[mode][criterion] = float(value)
        return ModeCriterionMatrix(_as_rows(rows))

    def as_lists(self) -> list[list[float]]:
        return [list(r) for r in self.rows]


@dataclass(frozen=True)
class PriorityVector:
    """Per-criterion importance weights on the 0-10 Likert scale."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) != len(CRITERIA):
            raise ValueError("priority vector needs one entry per criterion")
        for v in self.values:
            if not (math.isfinite(v) and 0.0 <= v <= 10.0):
                raise ValueError(f"priority {v} outside [0, 10]")

    @classmethod
    def of(cls, values: Iterable[float]) -> "PriorityVector":
        return cls(tuple(float(v) for v in values))

    def get(self, criterion: Criterion) -> float:
        return self.values[criterion]

    def total(self) -> float:
        t = 0.0
        for v in self.values:
            t += v
        return t


class TripHistory:
    """Bounded FIFO of the modes used for the last journeys.

    Capacity defaults to 20 entries; the oldest entry is evicted on
    overflow. Per-mode frequencies are counts over the current length.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Iterable[Mode] = (), capacity: int = DEFAULT_HISTORY_CAPACITY):
        if capacity <= 0:
            raise ValueError("history capacity must be positive")
        self._entries: deque[Mode] = deque(entries, maxlen=capacity)

    @property
    def capacity(self) -> int:
        return self._entries.maxlen  # type: ignore[return-value]

    def append(self, mode: Mode) -> None:
        self._entries.append(mode)

    def clear(self) -> None:
        self._entries.clear()

    def count(self, mode: Mode) -> int:
        return self._entries.count(mode)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def __repr__(self) -> str:
        return f"TripHistory({[m.label for m in self._entries]}, capacity={self.capacity})"


@dataclass
class Agent:
    """One commuter: preferences, memory, and mobility constraints."""

    id: int
    priorities: PriorityVector
    history: TripHistory
    distance_km: float
    has_car_access: bool
    has_bus_access: bool
    current_mode: Mode
    initial_usual_mode: Mode

    def __post_init__(self) -> None:
        if not (math.isfinite(self.distance_km) and self.distance_km > 0):
            raise ValueError("distance_km must be finite and positive")


@dataclass(frozen=True)
class Decision:
    """Outcome of one decision step.

    A routine decision reuses the usual mode without evaluation, so it is
    never flagged biased or constrained.
    """

    chosen: Mode
    routine: bool
    biased: bool
    constrained: bool

    def __post_init__(self) -> None:
        if self.routine and (self.biased or self.constrained):
            raise ValueError("routine decisions cannot be biased or constrained")


def habit_strength(history: TripHistory, mode: Mode) -> float:
    """Frequency of ``mode`` in the trip history; 0 for an empty history."""
    n = len(history)
    if n == 0:
        return 0.0
    return history.count(mode) / n


def usual_mode(history: TripHistory, fallback: Mode) -> Mode:
    """Most frequent mode in the history.

    Ties go to the tied mode used most recently; an empty history falls
    back to the agent's initial usual mode.
    """
    n = len(history)
    if n == 0:
        return fallback
    counts = [0, 0, 0, 0]
    for m in history:
        counts[m] += 1
    best = max(counts)
    for m in reversed(list(history)):
        if counts[m] == best:
            return m
    raise AssertionError("unreachable: nonempty history has a max-count mode")


def effective_filter(prototype: ModeCriterionMatrix, h: float) -> ModeCriterionMatrix:
    """Blend of the prototype filter and the neutral all-ones filter.

    ``h`` is the habit strength of the usual mode: at 0 perception is
    undistorted, at 1 the full prototype applies.
    """
    if not 0.0 <= h <= 1.0:
        raise ValueError(f"habit strength {h} outside [0, 1]")
    return ModeCriterionMatrix(tuple(
        tuple(h * v + (1.0 - h) * 1.0 for v in row) for row in prototype.rows
    ))


def perceive(objective: ModeCriterionMatrix, filt: ModeCriterionMatrix) -> ModeCriterionMatrix:
    """Entrywise product of environment and filter, clamped to [0, 10]."""
    return ModeCriterionMatrix(tuple(
        tuple(min(10.0, max(0.0, o * f)) for o, f in zip(orow, frow))
        for orow, frow in zip(objective.rows, filt.rows)
    ))


def score(priorities: PriorityVector, values: Sequence[float]) -> float:
    """Weighted sum of one mode's criterion values by the agent's priorities."""
    s = 0.0
    for c in CRITERIA:
        s += values[c] * priorities.values[c]
    return s


def available_modes(agent: Agent) -> frozenset[Mode]:
    """Modes the agent can use: distance-gated walking/cycling, flag-gated car/bus."""
    avail = set()
    if agent.distance_km < WALK_MAX_KM:
        avail.add(Mode.WALK)
    if agent.distance_km < BIKE_MAX_KM:
        avail.add(Mode.BIKE)
    if agent.has_car_access:
        avail.add(Mode.CAR)
    if agent.has_bus_access:
        avail.add(Mode.BUS)
    return frozenset(avail)


def _argmax(basis: ModeCriterionMatrix, priorities: PriorityVector,
            candidates: frozenset[Mode], preferred: Mode) -> Mode:
    """Highest-scoring candidate; ties prefer ``preferred``, then canonical order."""
    best_mode: Mode | None = None
    best_score = -math.inf
    for m in MODES:
        if m not in candidates:
            continue
        s = score(priorities, basis.rows[m])
        if best_mode is None or s > best_score or (s == best_score and m == preferred):
            best_mode = m
            best_score = s
    if best_mode is None:
        raise ValueError("no candidate modes to choose from")
    return best_mode


ALL_MODES = frozenset(MODES)


def choose_mode(
    agent: Agent,
    objective: ModeCriterionMatrix,
    prototypes: Mapping[Mode, ModeCriterionMatrix],
    biases_on: bool,
    habits_on: bool,
    draws: tuple[float, float],
    disruption_prob: float = 0.01,
) -> Decision:
    """One decision step for one agent.

    ``draws`` supplies the two uniforms in [0, 1): the disruption draw and
    the habit-reuse draw, in that order. A disruption removes the usual
    mode from the available set for this decision only (skipped if that
    would leave nothing). With habits enabled and no disruption, the agent
    reuses its usual mode with probability equal to its habit strength;
    otherwise it re-evaluates all available modes, through its perception
    filter when biases are enabled.

    The biased flag is set only when the filter changed the winner; the
    constrained flag is set when the overall best mode (ignoring
    availability) is not actually available to the agent.
    """
    u_disrupt, u_habit = draws
    if not (0.0 <= u_disrupt < 1.0 and 0.0 <= u_habit < 1.0):
        raise ValueError("draws must lie in [0, 1)")

    usual = usual_mode(agent.history, agent.initial_usual_mode)
    h = habit_strength(agent.history, usual)

    avail = available_modes(agent)
    disrupted = u_disrupt < disruption_prob
    if disrupted and usual in avail and len(avail) > 1:
        avail = avail - {usual}

    if habits_on and not disrupted and usual in avail and u_habit < h:
        return Decision(chosen=usual, routine=True, biased=False, constrained=False)

    if biases_on:
        basis = perceive(objective, effective_filter(prototypes[usual], h))
    else:
        basis = objective

    chosen = _argmax(basis, agent.priorities, avail, agent.current_mode)
    if biases_on:
        objective_pick = _argmax(objective, agent.priorities, avail, agent.current_mode)
        biased = chosen != objective_pick
    else:
        biased = False
    unconstrained_pick = _argmax(basis, agent.priorities, ALL_MODES, agent.current_mode)
    constrained = unconstrained_pick not in avail

    return Decision(chosen=chosen, routine=False, biased=biased, constrained=constrained)

"""Simulation engine: owns the population state and the tick loop.

The population lives in struct-of-arrays form so each tick can run through
the selected kernel backend (compiled or pure Python). All randomness comes
from one splitmix64 stream; the draw order is fixed and documented, so a
(bundle, config, mutation schedule) triple fully determines every frame.

Draw order at initialization, per agent in ascending id (usual modes are
assigned in canonical-order blocks by largest-remainder rounding of the
population shares):
  1. six uniforms, one per criterion, for the +/-noise priority factors;
  2. one Gaussian (two uniforms each attempt) for the commute distance,
     redrawn until it falls in [0.3, 200] km;
  3. one uniform for car access unless the agent is car-usual;
  4. one uniform for bus access unless the agent is bus-usual.
During a run, each tick consumes exactly two uniforms per agent in
ascending id order: the disruption draw, then the habit-reuse draw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import kernels
from .calibration import CalibrationBundle
from .metrics import DecisionCounts, MetricsFrame
from .model import (
    BIKE_MAX_KM,
    CRITERIA,
    DEFAULT_HISTORY_CAPACITY,
    MODES,
    WALK_MAX_KM,
    Agent,
    Criterion,
    Mode,
    ModeCriterionMatrix,
    PriorityVector,
    TripHistory,
)
from .rng import SplitMix64

SNAPSHOT_SCHEMA_VERSION = 1

#: Commute-distance draws are redrawn until they land in this range (km).
DISTANCE_MIN_KM = 0.3
DISTANCE_MAX_KM = 200.0
_MAX_DISTANCE_ATTEMPTS = 1000

#: Distance caps that keep an agent's initial usual mode available.
_USUAL_DISTANCE_CAP = {Mode.WALK: 6.9, Mode.BIKE: 14.9}


class InitializationError(Exception):
    """The population cannot be initialized from the given bundle/config."""


@dataclass(frozen=True)
class SimulationConfig:
    n_agents: int = 200
    seed: int = 0
    history_capacity: int = DEFAULT_HISTORY_CAPACITY
    disruption_prob: float = 0.01
    priority_noise: float = 0.20
    biases_on: bool = True
    habits_on: bool = True

    def __post_init__(self) -> None:
        if self.n_agents <= 0:
            raise ValueError("n_agents must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.history_capacity <= 0:
            raise ValueError("history_capacity must be positive")
        if not 0.0 <= self.disruption_prob <= 1.0:
            raise ValueError("disruption_prob must lie in [0, 1]")
        if self.priority_noise < 0.0:
            raise ValueError("priority_noise must be non-negative")

    def to_dict(self) -> dict:
        return {
            "n_agents": self.n_agents,
            "seed": self.seed,
            "history_capacity": self.history_capacity,
            "disruption_prob": self.disruption_prob,
            "priority_noise": self.priority_noise,
            "biases_on": self.biases_on,
            "habits_on": self.habits_on,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimulationConfig":
        return cls(**d)


def allocate_counts(shares: dict[Mode, float], n: int) -> dict[Mode, int]:
    """Integer usual-mode counts by largest-remainder rounding.

    Remainder ties resolve in canonical mode order for reproducibility.
    """
    quotas = {m: shares[m] * n for m in MODES}
    counts = {m: math.floor(quotas[m]) for m in MODES}
    remaining = n - sum(counts.values())
    by_remainder = sorted(MODES, key=lambda m: (-(quotas[m] - counts[m]), int(m)))
    for m in by_remainder[:remaining]:
        counts[m] += 1
    return counts


class Simulation:
    """One running simulation: population arrays, flags, RNG, tick counter."""

    def __init__(self, bundle: CalibrationBundle, config: SimulationConfig | None = None):
        self.config = config or SimulationConfig()
        bundle.validate()
        self.bundle = bundle
        self.objective = np.ascontiguousarray(bundle.objective.as_lists(), dtype=np.float64)
        self.prototypes = np.ascontiguousarray(
            [bundle.prototypes[m].as_lists() for m in MODES], dtype=np.float64)
        self.biases_on = self.config.biases_on
        self.habits_on = self.config.habits_on
        self.tick_count = 0
        self.rng = SplitMix64(self.config.seed)
        self._allocate(self.config.n_agents, self.config.history_capacity)
        self._init_population()

    # -- construction ---------------------------------------------------

    def _allocate(self, n: int, capacity: int) -> None:
        self.priorities = np.zeros((n, len(CRITERIA)), dtype=np.float64)
        self.distance = np.zeros(n, dtype=np.float64)
        self.car_access = np.zeros(n, dtype=np.uint8)
        self.bus_access = np.zeros(n, dtype=np.uint8)
        self.current_mode = np.zeros(n, dtype=np.int8)
        self.initial_usual = np.zeros(n, dtype=np.int8)
        self.hist = np.zeros((n, capacity), dtype=np.int8)
        self.hist_start = np.zeros(n, dtype=np.intc)
        self.hist_len = np.zeros(n, dtype=np.intc)
        self.hist_count = np.zeros((n, len(MODES)), dtype=np.intc)
        self.last_routine = np.zeros(n, dtype=np.uint8)
        self.last_biased = np.zeros(n, dtype=np.uint8)
        self.last_constrained = np.zeros(n, dtype=np.uint8)
        self.last_sat = np.zeros(n, dtype=np.float64)
        self._has_decisions = False

    def _init_population(self) -> None:
        cfg = self.config
        counts = allocate_counts(self.bundle.population_shares, cfg.n_agents)
        usual_by_agent: list[Mode] = []
        for m in MODES:
            usual_by_agent.extend([m] * counts[m])

        noise = cfg.priority_noise
        for i, usual in enumerate(usual_by_agent):
            means = self.bundle.priority_means[usual].values
            for c in CRITERIA:
                factor = 1.0 - noise + 2.0 * noise * self.rng.uniform()
                self.priorities[i, c] = min(10.0, max(0.0, means[c] * factor))

            stats = self.bundle.distance_stats[usual]
            d = None
            for _ in range(_MAX_DISTANCE_ATTEMPTS):
                cand = stats.mean_km + stats.sd_km * self.rng.gauss()
                if DISTANCE_MIN_KM <= cand <= DISTANCE_MAX_KM:
                    d = cand
                    break
            if d is None:
                raise InitializationError(
                    f"agent {i}: no distance draw in [{DISTANCE_MIN_KM}, "
                    f"{DISTANCE_MAX_KM}] km for mode {usual.label} "
                    f"(mean {stats.mean_km}, sd {stats.sd_km})")
            cap = _USUAL_DISTANCE_CAP.get(usual)
            if cap is not None:
                d = min(d, cap)
            self.distance[i] = d

            access = self.bundle.access_prob[usual]
            if usual is Mode.CAR:
                has_car = True
            else:
                has_car = self.rng.uniform() < access.p_car_access
            if usual is Mode.BUS:
                has_bus = True
            else:
                has_bus = self.rng.uniform() < access.p_bus_access
            self.car_access[i] = 1 if has_car else 0
            self.bus_access[i] = 1 if has_bus else 0

            self.current_mode[i] = int(usual)
            self.initial_usual[i] = int(usual)
            self.hist[i, :] = int(usual)
            self.hist_start[i] = 0
            self.hist_len[i] = cfg.history_capacity
            self.hist_count[i, :] = 0
            self.hist_count[i, usual] = cfg.history_capacity

            if not self._mode_available(i, usual):
                raise InitializationError(
                    f"agent {i}: initial usual mode {usual.label} is not available")

    def _mode_available(self, i: int, mode: Mode) -> bool:
        if mode is Mode.WALK:
            return bool(self.distance[i] < WALK_MAX_KM)
        if mode is Mode.BIKE:
            return bool(self.distance[i] < BIKE_MAX_KM)
        if mode is Mode.CAR:
            return bool(self.car_access[i])
        return bool(self.bus_access[i])

    # -- inspection ------------------------------------------------------

    @property
    def n_agents(self) -> int:
        return len(self.distance)

    def agent(self, i: int) -> Agent:
        """Materialize agent ``i`` as a domain object (copy, not a view)."""
        entries = [Mode(int(self.hist[i, (self.hist_start[i] + k) % self.hist.shape[1]]))
                   for k in range(int(self.hist_len[i]))]
        return Agent(
            id=i,
            priorities=PriorityVector.of(self.priorities[i].tolist()),
            history=TripHistory(entries, capacity=self.hist.shape[1]),
            distance_km=float(self.distance[i]),
            has_car_access=bool(self.car_access[i]),
            has_bus_access=bool(self.bus_access[i]),
            current_mode=Mode(int(self.current_mode[i])),
            initial_usual_mode=Mode(int(self.initial_usual[i])),
        )

    def agents(self) -> Iterable[Agent]:
        return (self.agent(i) for i in range(self.n_agents))

    def objective_matrix(self) -> ModeCriterionMatrix:
        return ModeCriterionMatrix.value_matrix(self.objective.tolist())

    # -- mutations --------------------------------------------------------

    def set_objective(self, mode: Mode, criterion: Criterion, value: float) -> None:
        """Change one environment value; takes effect at the next tick."""
        if not (math.isfinite(value) and 0.0 <= value <= 10.0):
            raise ValueError(f"objective value {value} outside [0, 10]")
        self.objective[mode, criterion] = value

    def shift_priority(self, criterion: Criterion, target_mean: float) -> None:
        """Shift every agent's priority for ``criterion`` so the population
        mean lands on ``target_mean`` (up to clamping at the scale ends)."""
        if not (math.isfinite(target_mean) and 0.0 <= target_mean <= 10.0):
            raise ValueError(f"target mean {target_mean} outside [0, 10]")
        current = float(np.mean(self.priorities[:, criterion]))
        delta = target_mean - current
        self.priorities[:, criterion] = np.clip(
            self.priorities[:, criterion] + delta, 0.0, 10.0)

    def set_flags(self, biases_on: bool, habits_on: bool) -> None:
        self.biases_on = bool(biases_on)
        self.habits_on = bool(habits_on)

    def reset_habits(self) -> None:
        """Forget all trip histories (global-crisis reset).

        The next decision of every agent is a full re-evaluation: habit
        strength is 0 and the usual mode falls back to the initial one.
        """
        self.hist_start[:] = 0
        self.hist_len[:] = 0
        self.hist_count[:, :] = 0

    # -- stepping ---------------------------------------------------------

    def tick(self) -> MetricsFrame:
        """Advance one step: every agent decides, histories update, and the
        frame for the new assignment is returned."""
        new_state = kernels.tick_once(
            self.objective, self.prototypes, self.priorities, self.distance,
            self.car_access, self.bus_access, self.current_mode,
            self.initial_usual, self.hist, self.hist_start, self.hist_len,
            self.hist_count, self.rng.getstate(), self.biases_on,
            self.habits_on, self.config.disruption_prob,
            self.last_routine, self.last_biased, self.last_constrained,
            self.last_sat,
        )
        self.rng.setstate(new_state)
        self._has_decisions = True
        self.tick_count += 1
        return self._build_frame(self.last_sat)

    def run(self, n_ticks: int) -> list[MetricsFrame]:
        return [self.tick() for _ in range(n_ticks)]

    # -- metrics ----------------------------------------------------------

    def _decision_counts(self) -> DecisionCounts:
        if not self._has_decisions:
            return DecisionCounts(routine=0, biased=0, constrained=0, rational=0)
        routine = int(self.last_routine.sum())
        biased = int(self.last_biased.sum())
        constrained = int(self.last_constrained.sum())
        flagged = int(np.count_nonzero(np.logical_or(self.last_biased,
                                                     self.last_constrained)))
        rational = self.n_agents - routine - flagged
        return DecisionCounts(routine=routine, biased=biased,
                              constrained=constrained, rational=rational)

    def _build_frame(self, sat: np.ndarray) -> MetricsFrame:
        n = self.n_agents
        counts = np.bincount(self.current_mode, minlength=len(MODES))
        sums = np.bincount(self.current_mode, weights=sat, minlength=len(MODES))
        share = tuple(int(counts[m]) / n for m in MODES)
        satisfaction = tuple(
            (float(sums[m]) / int(counts[m])) if counts[m] else None for m in MODES)
        return MetricsFrame(
            tick=self.tick_count,
            modal_share=share,
            satisfaction=satisfaction,
            decisions=self._decision_counts(),
        )

    def collect_metrics(self) -> MetricsFrame:
        """Metrics for the current assignment, without ticking.

        Satisfaction is recomputed from the current state; decision counts
        echo the last tick (all zero before the first tick).
        """
        sat = np.zeros(self.n_agents, dtype=np.float64)
        kernels.satisfaction_pass(
            self.objective, self.prototypes, self.priorities,
            self.current_mode, self.initial_usual, self.hist,
            self.hist_start, self.hist_len, self.hist_count,
            self.biases_on, sat,
        )
        return self._build_frame(sat)

    # -- snapshots ----------------------------------------------------------

    def snapshot(self) -> dict:
        """Full state as a JSON-ready dict; sufficient for exact replay."""
        agents = []
        for i in range(self.n_agents):
            entries = [Mode(int(self.hist[i, (self.hist_start[i] + k) % self.hist.shape[1]])).label
                       for k in range(int(self.hist_len[i]))]
            agents.append({
                "id": i,
                "priorities": self.priorities[i].tolist(),
                "history": entries,
                "distance_km": float(self.distance[i]),
                "has_car_access": bool(self.car_access[i]),
                "has_bus_access": bool(self.bus_access[i]),
                "current_mode": Mode(int(self.current_mode[i])).label,
                "initial_usual_mode": Mode(int(self.initial_usual[i])).label,
            })
        return {
            "schema_version": SNAPSHOT_SCHEMA_VERSION,
            "kind": "modalsim-snapshot",
            "config": self.config.to_dict(),
            "tick": self.tick_count,
            "flags": {"biases_on": self.biases_on, "habits_on": self.habits_on},
            "rng_state": self.rng.getstate(),
            "objective": self.objective.tolist(),
            "prototypes": {m.label: self.prototypes[m].tolist() for m in MODES},
            "agents": agents,
        }

    @classmethod
    def from_snapshot(cls, snap: dict, bundle: CalibrationBundle | None = None) -> "Simulation":
        """Rebuild a simulation mid-run from a snapshot dict.

        Snapshots are self-contained; the bundle, when given, is kept for
        reference only.
        """
        version = snap.get("schema_version")
        if version != SNAPSHOT_SCHEMA_VERSION:
            raise ValueError(f"unsupported snapshot schema_version {version!r}")
        sim = cls.__new__(cls)
        sim.config = SimulationConfig.from_dict(snap["config"])
        sim.bundle = bundle
        sim.objective = np.ascontiguousarray(snap["objective"], dtype=np.float64)
        sim.prototypes = np.ascontiguousarray(
            [snap["prototypes"][m.label] for m in MODES], dtype=np.float64)
        sim.biases_on = bool(snap["flags"]["biases_on"])
        sim.habits_on = bool(snap["flags"]["habits_on"])
        sim.tick_count = int(snap["tick"])
        sim.rng = SplitMix64(0)
        sim.rng.setstate(int(snap["rng_state"]))
        agents = snap["agents"]
        sim._allocate(len(agents), sim.config.history_capacity)
        for i, a in enumerate(agents):
            sim.priorities[i, :] = a["priorities"]
            sim.distance[i] = a["distance_km"]
            sim.car_access[i] = 1 if a["has_car_access"] else 0
            sim.bus_access[i] = 1 if a["has_bus_access"] else 0
            sim.current_mode[i] = int(Mode.from_label(a["current_mode"]))
            sim.initial_usual[i] = int(Mode.from_label(a["initial_usual_mode"]))
            entries = [Mode.from_label(t) for t in a["history"]]
            if len(entries) > sim.config.history_capacity:
                raise ValueError(f"agent {i}: history longer than capacity")
            for k, m in enumerate(entries):
                sim.hist[i, k] = int(m)
                sim.hist_count[i, m] += 1
            sim.hist_start[i] = 0
            sim.hist_len[i] = len(entries)
        return sim

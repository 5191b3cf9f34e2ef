"""Survey ingestion and parameter derivation.

Takes survey responses (CSV), cleans out aberrant rows, and derives every
simulator parameter: the objective environment matrix, per-group priority
means, perception-filter prototypes, commute-distance statistics, access
probabilities, and population shares. The result is a CalibrationBundle,
serializable to a schema-versioned JSON file.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

import csv

import numpy as np

from .model import CRITERIA, MODES, Criterion, Mode, ModeCriterionMatrix, PriorityVector

BUNDLE_SCHEMA_VERSION = 1

#: Usual-mode shares of the French national commute, used both to weight the
#: per-group median evaluations into one objective matrix and to size the
#: simulated population. The published percentages (2/74/16/6) cover only
#: these four modes and sum to 98%, so they are renormalized to 1 here.
NATIONAL_SHARES: dict[Mode, float] = {
    Mode.BIKE: 0.02 / 0.98,
    Mode.CAR: 0.74 / 0.98,
    Mode.BUS: 0.16 / 0.98,
    Mode.WALK: 0.06 / 0.98,
}

#: Smallest allowed perception-filter factor. A factor of zero would violate
#: the all-positive filter invariant, so ratios are floored here.
MIN_FILTER_FACTOR = 1e-6

PRIORITY_COLUMNS = {c: f"prio_{c.label}" for c in CRITERIA}
EVALUATION_COLUMNS = {(m, c): f"val_{m.label}_{c.label}" for m in MODES for c in CRITERIA}
MANDATORY_COLUMNS = (
    ["usual_mode", "distance_km", "access_car", "access_bus"]
    + [PRIORITY_COLUMNS[c] for c in CRITERIA]
    + [EVALUATION_COLUMNS[k] for k in EVALUATION_COLUMNS]
)
OPTIONAL_COLUMNS = ["trips_per_week"]


class SurveyFormatError(Exception):
    """The survey file or column mapping cannot be used at all."""


class CalibrationError(Exception):
    """The (cleaned) records cannot support the requested statistic."""


@dataclass(frozen=True)
class SurveyRecord:
    """One cleaned-or-raw survey response."""

    usual_mode: Mode
    distance_km: float
    trips_per_week: int | None
    access_car: bool
    access_bus: bool
    priorities: PriorityVector
    evaluations: ModeCriterionMatrix


@dataclass(frozen=True)
class CleaningThresholds:
    """Aberrance cutoffs for usual-mode / distance combinations (km).

    Records at or beyond a cutoff are dropped, as are non-positive
    distances.
    """

    walk_max_km: float = 30.0
    bike_max_km: float = 60.0
    any_max_km: float = 300.0


@dataclass
class SurveyParseResult:
    records: list[SurveyRecord]
    rejected: list[tuple[int, str]] = field(default_factory=list)

    @property
    def n_rejected(self) -> int:
        return len(self.rejected)


def load_column_mapping(path: str | Path) -> dict[str, str]:
    """Read a canonical-name -> actual-header mapping (JSON object)."""
    with open(path, "r", encoding="utf-8") as fh:
        mapping = json.load(fh)
    if not isinstance(mapping, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in mapping.items()
    ):
        raise SurveyFormatError(f"column mapping {path} must be a JSON object of strings")
    return mapping


def _parse_bool(cell: str) -> bool:
    text = cell.strip().lower()
    if text in ("1", "true", "yes"):
        return True
    if text in ("0", "false", "no"):
        return False
    raise ValueError(f"not a 0/1 flag: {cell!r}")


def _parse_likert(cell: str, what: str) -> float:
    v = float(cell)
    if not (math.isfinite(v) and 0.0 <= v <= 10.0):
        raise ValueError(f"{what} {cell!r} outside the 0-10 scale")
    return v


def parse_survey(source: IO[str], mapping: Mapping[str, str] | None = None) -> SurveyParseResult:
    """Parse survey CSV into records.

    ``mapping`` translates canonical column names to the file's actual
    headers; identity by default. Rows with malformed mandatory cells are
    rejected individually (reported with their file line number); a missing
    mandatory column fails the whole parse.
    """
    colmap = dict(mapping) if mapping else {}

    def col(name: str) -> str:
        return colmap.get(name, name)

    reader = csv.DictReader(source)
    if reader.fieldnames is None:
        return SurveyParseResult(records=[])
    headers = set(reader.fieldnames)
    for name in MANDATORY_COLUMNS:
        if col(name) not in headers:
            raise SurveyFormatError(f"survey file is missing mandatory column {col(name)!r}"
                                    + (f" (canonical {name!r})" if col(name) != name else ""))
    has_trips = col("trips_per_week") in headers

    result = SurveyParseResult(records=[])
    for line_no, row in enumerate(reader, start=2):
        try:
            usual = Mode.from_label(row[col("usual_mode")])
            distance = float(row[col("distance_km")])
            if not (math.isfinite(distance) and distance >= 0.0):
                raise ValueError(f"distance {row[col('distance_km')]!r} must be >= 0")
            access_car = _parse_bool(row[col("access_car")])
            access_bus = _parse_bool(row[col("access_bus")])
            priorities = PriorityVector.of(
                _parse_likert(row[col(PRIORITY_COLUMNS[c])], PRIORITY_COLUMNS[c])
                for c in CRITERIA
            )
            evaluations = ModeCriterionMatrix.value_matrix(
                [
                    [
                        _parse_likert(row[col(EVALUATION_COLUMNS[m, c])],
                                      EVALUATION_COLUMNS[m, c])
                        for c in CRITERIA
                    ]
                    for m in MODES
                ]
            )
        except (ValueError, KeyError) as exc:
            result.rejected.append((line_no, str(exc)))
            continue

        trips: int | None = None
        if has_trips:
            try:
                trips = int(row[col("trips_per_week")])
                if trips < 0:
                    trips = None
            except (ValueError, TypeError):
                trips = None

        result.records.append(SurveyRecord(
            usual_mode=usual,
            distance_km=distance,
            trips_per_week=trips,
            access_car=access_car,
            access_bus=access_bus,
            priorities=priorities,
            evaluations=evaluations,
        ))
    return result


def clean_records(records: Iterable[SurveyRecord],
                  thresholds: CleaningThresholds = CleaningThresholds()) -> list[SurveyRecord]:
    """Drop aberrant responses: non-positive distances and usual modes that
    are infeasible at the reported distance."""
    kept = []
    for r in records:
        if r.distance_km <= 0.0:
            continue
        if r.distance_km >= thresholds.any_max_km:
            continue
        if r.usual_mode is Mode.WALK and r.distance_km >= thresholds.walk_max_km:
            continue
        if r.usual_mode is Mode.BIKE and r.distance_km >= thresholds.bike_max_km:
            continue
        kept.append(r)
    return kept


def _groups(records: Sequence[SurveyRecord]) -> dict[Mode, list[SurveyRecord]]:
    groups: dict[Mode, list[SurveyRecord]] = {m: [] for m in MODES}
    for r in records:
        groups[r.usual_mode].append(r)
    return groups


def _require_group(groups: dict[Mode, list[SurveyRecord]], mode: Mode,
                   what: str) -> list[SurveyRecord]:
    group = groups[mode]
    if not group:
        raise CalibrationError(f"cannot compute {what}: no records with usual mode "
                               f"{mode.label!r}")
    return group


def objective_matrix(records: Sequence[SurveyRecord],
                     national_shares: Mapping[Mode, float] | None = None) -> ModeCriterionMatrix:
    """Blend of per-group median evaluations, weighted by national shares."""
    shares = dict(national_shares) if national_shares is not None else dict(NATIONAL_SHARES)
    total = sum(shares.values())
    if abs(total - 1.0) > 1e-9:
        raise CalibrationError(f"national shares sum to {total}, expected 1")
    groups = _groups(records)
    for m in MODES:
        _require_group(groups, m, "objective matrix")
    rows = []
    for mm in MODES:
        row = []
        for c in CRITERIA:
            v = 0.0
            for g in MODES:
                group_vals = [r.evaluations.value(mm, c) for r in groups[g]]
                v += shares[g] * float(np.median(group_vals))
            row.append(v)
        rows.append(row)
    return ModeCriterionMatrix.value_matrix(rows)


def priority_means(records: Sequence[SurveyRecord]) -> tuple[dict[Mode, PriorityVector], PriorityVector]:
    """Arithmetic priority means per usual-mode group and overall."""
    if not records:
        raise CalibrationError("cannot compute priority means of an empty record set")
    groups = _groups(records)
    per_mode = {}
    for g in MODES:
        group = _require_group(groups, g, "priority means")
        per_mode[g] = PriorityVector.of(
            float(np.mean([r.priorities.get(c) for r in group])) for c in CRITERIA
        )
    overall = PriorityVector.of(
        float(np.mean([r.priorities.get(c) for r in records])) for c in CRITERIA
    )
    return per_mode, overall


def all_response_median(records: Sequence[SurveyRecord]) -> ModeCriterionMatrix:
    """Median evaluation over all records, per (mode, criterion)."""
    if not records:
        raise CalibrationError("cannot compute medians of an empty record set")
    return ModeCriterionMatrix.value_matrix(
        [[float(np.median([r.evaluations.value(m, c) for r in records])) for c in CRITERIA]
         for m in MODES]
    )


def filter_prototypes(records: Sequence[SurveyRecord],
                      objective_all_median: ModeCriterionMatrix,
                      aggregation: str = "ratio_of_aggregates") -> dict[Mode, ModeCriterionMatrix]:
    """Per-usual-mode perception-filter prototypes.

    Each factor relates a group's view of a (mode, criterion) cell to the
    all-response median for that cell. ``ratio_of_aggregates`` (default)
    divides the group mean by the median; ``mean_of_ratios`` averages
    per-record ratios. A zero median yields the neutral factor 1.0, and
    factors are floored at MIN_FILTER_FACTOR to stay positive.
    """
    if aggregation not in ("ratio_of_aggregates", "mean_of_ratios"):
        raise ValueError(f"unknown prototype aggregation {aggregation!r}")
    groups = _groups(records)
    prototypes = {}
    for g in MODES:
        group = _require_group(groups, g, "filter prototypes")
        rows = []
        for m in MODES:
            row = []
            for c in CRITERIA:
                med = objective_all_median.value(m, c)
                if med == 0.0:
                    row.append(1.0)
                    continue
                if aggregation == "ratio_of_aggregates":
                    factor = float(np.mean([r.evaluations.value(m, c) for r in group])) / med
                else:
                    factor = float(np.mean([r.evaluations.value(m, c) / med for r in group]))
                row.append(max(factor, MIN_FILTER_FACTOR))
            rows.append(row)
        prototypes[g] = ModeCriterionMatrix.filter_matrix(rows)
    return prototypes


@dataclass(frozen=True)
class DistanceStats:
    mean_km: float
    sd_km: float
    median_km: float


def distance_stats(records: Sequence[SurveyRecord]) -> dict[Mode, DistanceStats]:
    """Per-group commute-distance mean, sample sd, and median."""
    groups = _groups(records)
    stats = {}
    for g in MODES:
        group = _require_group(groups, g, "distance statistics")
        dists = [r.distance_km for r in group]
        sd = float(np.std(dists, ddof=1)) if len(dists) > 1 else 0.0
        stats[g] = DistanceStats(
            mean_km=float(np.mean(dists)),
            sd_km=sd,
            median_km=float(np.median(dists)),
        )
    return stats


@dataclass(frozen=True)
class AccessProbability:
    p_car_access: float
    p_bus_access: float


def access_probabilities(records: Sequence[SurveyRecord]) -> dict[Mode, AccessProbability]:
    """Per-group fractions with car / bus access.

    Users of a mode necessarily have access to it, so the car group's car
    probability and the bus group's bus probability are pinned to 1.
    """
    groups = _groups(records)
    probs = {}
    for g in MODES:
        group = _require_group(groups, g, "access probabilities")
        p_car = sum(1 for r in group if r.access_car) / len(group)
        p_bus = sum(1 for r in group if r.access_bus) / len(group)
        if g is Mode.CAR:
            p_car = 1.0
        if g is Mode.BUS:
            p_bus = 1.0
        probs[g] = AccessProbability(p_car_access=p_car, p_bus_access=p_bus)
    return probs


@dataclass(frozen=True)
class CalibrationBundle:
    """Every parameter the simulator needs, as derived from one survey."""

    objective: ModeCriterionMatrix
    priority_means: dict[Mode, PriorityVector]
    priority_means_overall: PriorityVector
    prototypes: dict[Mode, ModeCriterionMatrix]
    distance_stats: dict[Mode, DistanceStats]
    access_prob: dict[Mode, AccessProbability]
    population_shares: dict[Mode, float]
    group_sizes: dict[Mode, int]

    def validate(self) -> None:
        total = sum(self.population_shares[m] for m in MODES)
        if abs(total - 1.0) > 1e-9:
            raise CalibrationError(f"population shares sum to {total}, expected 1")
        for m in MODES:
            ap = self.access_prob[m]
            for p in (ap.p_car_access, ap.p_bus_access):
                if not 0.0 <= p <= 1.0:
                    raise CalibrationError(f"access probability {p} outside [0, 1]")
            for row in self.prototypes[m].rows:
                for v in row:
                    if v <= 0.0:
                        raise CalibrationError("prototype factors must be positive")
            ds = self.distance_stats[m]
            if not (ds.mean_km > 0 and ds.sd_km >= 0):
                raise CalibrationError(f"bad distance stats for {m.label}: {ds}")

    def to_dict(self) -> dict:
        return {
            "schema_version": BUNDLE_SCHEMA_VERSION,
            "kind": "modalsim-bundle",
            "objective": self.objective.as_lists(),
            "priority_means": {m.label: list(self.priority_means[m].values) for m in MODES},
            "priority_means_overall": list(self.priority_means_overall.values),
            "prototypes": {m.label: self.prototypes[m].as_lists() for m in MODES},
            "distance_stats": {
                m.label: {
                    "mean_km": self.distance_stats[m].mean_km,
                    "sd_km": self.distance_stats[m].sd_km,
                    "median_km": self.distance_stats[m].median_km,
                }
                for m in MODES
            },
            "access_prob": {
                m.label: {
                    "p_car_access": self.access_prob[m].p_car_access,
                    "p_bus_access": self.access_prob[m].p_bus_access,
                }
                for m in MODES
            },
            "population_shares": {m.label: self.population_shares[m] for m in MODES},
            "group_sizes": {m.label: self.group_sizes[m] for m in MODES},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CalibrationBundle":
        version = d.get("schema_version")
        if version != BUNDLE_SCHEMA_VERSION:
            raise CalibrationError(f"unsupported bundle schema_version {version!r}")
        return cls(
            objective=ModeCriterionMatrix.value_matrix(d["objective"]),
            priority_means={m: PriorityVector.of(d["priority_means"][m.label]) for m in MODES},
            priority_means_overall=PriorityVector.of(d["priority_means_overall"]),
            prototypes={m: ModeCriterionMatrix.filter_matrix(d["prototypes"][m.label])
                        for m in MODES},
            distance_stats={m: DistanceStats(**d["distance_stats"][m.label]) for m in MODES},
            access_prob={m: AccessProbability(**d["access_prob"][m.label]) for m in MODES},
            population_shares={m: float(d["population_shares"][m.label]) for m in MODES},
            group_sizes={m: int(d["group_sizes"][m.label]) for m in MODES},
        )

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "CalibrationBundle":
        with open(path, "r", encoding="utf-8") as fh:
            bundle = cls.from_dict(json.load(fh))
        bundle.validate()
        return bundle


def build_bundle(records: Sequence[SurveyRecord],
                 national_shares: Mapping[Mode, float] | None = None,
                 prototype_aggregation: str = "ratio_of_aggregates") -> CalibrationBundle:
    """Derive the full parameter bundle from cleaned records."""
    if not records:
        raise CalibrationError("cannot calibrate from an empty record set")
    shares = dict(national_shares) if national_shares is not None else dict(NATIONAL_SHARES)
    groups = _groups(records)
    for m in MODES:
        _require_group(groups, m, "calibration bundle")
    per_mode_prio, overall_prio = priority_means(records)
    bundle = CalibrationBundle(
        objective=objective_matrix(records, shares),
        priority_means=per_mode_prio,
        priority_means_overall=overall_prio,
        prototypes=filter_prototypes(records, all_response_median(records),
                                     prototype_aggregation),
        distance_stats=distance_stats(records),
        access_prob=access_probabilities(records),
        population_shares=shares,
        group_sizes={m: len(groups[m]) for m in MODES},
    )
    bundle.validate()
    return bundle

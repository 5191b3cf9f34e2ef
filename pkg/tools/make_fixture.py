"""Generate the bundled synthetic survey fixture and its reference bundle.

The fixture is a 650-row survey whose per-group statistics are planted
exactly: group sizes, distance means/medians, priority means, evaluation
medians and means, and access fractions. The script writes

  src/modalsim/data/fixture_survey.csv     the survey
  src/modalsim/data/fixture_bundle.json    parameters computed analytically
                                           from the planted tables (the
                                           recovery-test oracle)
  src/modalsim/data/default_bundle.json    output of the real calibration
                                           pipeline on the fixture (the
                                           bundle the simulator ships)

Planted values mirror the published survey statistics (group sizes
204/134/228/84, distance means 6.43/21.29/11.16/1.8 km, the reported
priority means and access fractions), so the quantitative calibration
checks can run against the fixture alone.

Multiset construction: for a group of even size n with target median M and
mean mu, take q = n/2 values M - d_i below and q values M + e_i above, with
d_1 = e_1 = 0 so the two middle order statistics are both M (median exact),
and e_i = d_i + n(mu - M)/(q - 1) for i >= 2 so the sum is exact (mirrored
when mu < M).
"""

from __future__ import annotations

import csv
import statistics
import sys
import zlib
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import numpy as np

from modalsim.calibration import (
    AccessProbability,
    CalibrationBundle,
    DistanceStats,
    MIN_FILTER_FACTOR,
    NATIONAL_SHARES,
    build_bundle,
    clean_records,
    parse_survey,
)
from modalsim.model import CRITERIA, MODES, Criterion, Mode, ModeCriterionMatrix, PriorityVector

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "modalsim" / "data"

GROUP_SIZES = {Mode.BIKE: 204, Mode.CAR: 134, Mode.BUS: 228, Mode.WALK: 84}
TOTAL = sum(GROUP_SIZES.values())

# Distance (mean_km, median_km, spread) per usual-mode group.
DISTANCES = {
    Mode.BIKE: (6.43, 5.0, 4.0),
    Mode.BUS: (11.16, 5.55, 5.0),
    Mode.CAR: (21.29, 15.0, 10.0),
    Mode.WALK: (1.8, 1.5, 0.9),
}

# Records per group lacking car / bus access (exact counts).
NO_CAR = {Mode.BIKE: 61, Mode.BUS: 131, Mode.CAR: 0, Mode.WALK: 42}
NO_BUS = {Mode.BIKE: 21, Mode.BUS: 0, Mode.CAR: 82, Mode.WALK: 7}

# Reported whole-sample priority means; the bracketed group is solved so the
# weighted mean lands exactly on the reported value.
PRIORITY_TABLE = {
    Criterion.ECOLOGY: ({Mode.CAR: 5.65, Mode.BUS: 7.5, Mode.WALK: 7.9}, Mode.BIKE, 7.08),
    Criterion.COMFORT: ({Mode.BIKE: 6.0, Mode.BUS: 6.2, Mode.CAR: 8.0, Mode.WALK: 6.4}, None, None),
    Criterion.PRICE: ({Mode.BIKE: 7.4, Mode.CAR: 5.63, Mode.WALK: 7.3}, Mode.BUS, 6.97),
    Criterion.TIME: ({Mode.BIKE: 7.5, Mode.CAR: 8.2, Mode.WALK: 6.7}, Mode.BUS, 7.47),
    Criterion.PRACTICALITY: ({Mode.BIKE: 7.2, Mode.BUS: 6.6, Mode.CAR: 7.8, Mode.WALK: 6.4}, None, None),
    Criterion.SAFETY: ({Mode.BIKE: 5.37, Mode.CAR: 6.6, Mode.WALK: 6.5}, Mode.BUS, 6.2),
}
PRIORITY_SPREAD = 1.5

# Consensus evaluation of each mode on each criterion (canonical order:
# bike, bus, car, walk x ecology, comfort, price, time, practicality, safety).
BASE_EVAL = {
    Mode.BIKE: [9.2, 5.5, 8.8, 6.0, 6.0, 4.6],
    Mode.BUS: [6.8, 4.8, 6.9, 4.2, 5.0, 7.2],
    Mode.CAR: [1.8, 8.6, 2.7, 8.5, 8.0, 7.0],
    Mode.WALK: [9.6, 5.0, 9.7, 2.5, 5.0, 6.8],
}
# Users rate their own mode above consensus, other modes below; the mean
# offsets skew each cell's distribution so group means differ from medians.
OWN_MEDIAN_BOOST = 1.0
CROSS_MEDIAN_CUT = 0.5
OWN_MEAN_OFFSET = 0.5
CROSS_MEAN_OFFSET = 0.35
EVAL_SPREAD = 1.6

MEDIAN_LO, MEDIAN_HI = 0.5, 9.5
MEAN_LO, MEAN_HI = 0.3, 9.7


def solved_priority_means() -> dict[Mode, list[float]]:
    means = {m: [0.0] * len(CRITERIA) for m in MODES}
    for c, (given, solve_for, overall) in PRIORITY_TABLE.items():
        for g, v in given.items():
            means[g][c] = v
        if solve_for is not None:
            assert overall is not None
            acc = sum(GROUP_SIZES[g] * v for g, v in given.items())
            means[solve_for][c] = (overall * TOTAL - acc) / GROUP_SIZES[solve_for]
    return means


def eval_median(group: Mode, mode: Mode, c: int) -> float:
    base = BASE_EVAL[mode][c]
    delta = OWN_MEDIAN_BOOST if mode is group else -CROSS_MEDIAN_CUT
    return min(MEDIAN_HI, max(MEDIAN_LO, base + delta))


def eval_mean(group: Mode, mode: Mode, c: int) -> float:
    # Offsets shrink near the scale ends: shifting the mean by delta needs
    # roughly 2*delta of room beyond the median for the upper half-sample.
    med = eval_median(group, mode, c)
    if mode is group:
        delta = min(OWN_MEAN_OFFSET, 0.45 * (10.0 - med))
    else:
        delta = -min(CROSS_MEAN_OFFSET, 0.45 * med)
    return min(MEAN_HI, max(MEAN_LO, med + delta))


def exact_multiset(n: int, median: float, mean: float, lo: float, hi: float,
                   spread: float) -> list[float]:
    """n values (n even) with the exact given median and mean, within [lo, hi]."""
    if n % 2 != 0:
        raise ValueError("group sizes must be even")
    q = n // 2
    delta = n * (mean - median)
    if delta >= 0:
        shift = delta / (q - 1)
        s = min(spread, median - lo, hi - median - shift)
        if s < 0:
            raise ValueError(f"infeasible multiset: median={median} mean={mean}")
        d = [s * i / (q - 1) for i in range(q)]
        lower = [median - di for di in d]
        upper = [median] + [median + d[i] + shift for i in range(1, q)]
    else:
        shift = -delta / (q - 1)
        s = min(spread, hi - median, median - lo - shift)
        if s < 0:
            raise ValueError(f"infeasible multiset: median={median} mean={mean}")
        e = [s * i / (q - 1) for i in range(q)]
        upper = [median + ei for ei in e]
        lower = [median] + [median - e[i] - shift for i in range(1, q)]
    values = lower + upper
    assert len(values) == n
    assert all(lo - 1e-9 <= v <= hi + 1e-9 for v in values), (median, mean, s)
    # Squash float residue at the bounds (order 1e-16; harmless to the mean).
    return [min(hi, max(lo, v)) for v in values]


def shuffled(values: list, tag: str) -> list:
    rng = np.random.default_rng(zlib.crc32(tag.encode("utf-8")))
    order = rng.permutation(len(values))
    return [values[k] for k in order]


def build_rows() -> tuple[list[dict], CalibrationBundle]:
    priority_means = solved_priority_means()

    rows: list[dict] = []
    eval_pools: dict[tuple[Mode, int], list[float]] = {
        (m, c): [] for m in MODES for c in range(len(CRITERIA))}
    distance_sd: dict[Mode, float] = {}

    for g in MODES:
        n = GROUP_SIZES[g]
        mean_km, median_km, spread = DISTANCES[g]
        dists = exact_multiset(n, median_km, mean_km, 0.5, 250.0, spread)
        distance_sd[g] = statistics.stdev(dists)
        dists = shuffled(dists, f"dist-{g.label}")

        prios = {}
        for c in CRITERIA:
            mu = priority_means[g][c]
            vals = exact_multiset(n, mu, mu, 0.0, 10.0, PRIORITY_SPREAD)
            prios[c] = shuffled(vals, f"prio-{g.label}-{c.label}")

        evals = {}
        for m in MODES:
            for c in range(len(CRITERIA)):
                vals = exact_multiset(n, eval_median(g, m, c), eval_mean(g, m, c),
                                      0.0, 10.0, EVAL_SPREAD)
                eval_pools[(m, c)].extend(vals)
                evals[(m, c)] = shuffled(vals, f"val-{g.label}-{m.label}-{c}")

        car_flags = shuffled([0] * NO_CAR[g] + [1] * (n - NO_CAR[g]), f"car-{g.label}")
        bus_flags = shuffled([0] * NO_BUS[g] + [1] * (n - NO_BUS[g]), f"bus-{g.label}")

        for k in range(n):
            row = {
                "usual_mode": g.label,
                "distance_km": repr(dists[k]),
                "trips_per_week": str(4 + (k % 7)),
                "access_car": str(car_flags[k]),
                "access_bus": str(bus_flags[k]),
            }
            for c in CRITERIA:
                row[f"prio_{c.label}"] = repr(prios[c][k])
            for m in MODES:
                for c in CRITERIA:
                    row[f"val_{m.label}_{c.label}"] = repr(evals[(m, int(c))][k])
            rows.append(row)

    rows = shuffled(rows, "row-order")

    # Reference bundle, computed from the planted tables (and plain sorting
    # for the pooled medians), independent of the calibration pipeline.
    pooled_median = {
        key: statistics.median(pool) for key, pool in eval_pools.items()}
    objective = ModeCriterionMatrix.value_matrix([
        [sum(NATIONAL_SHARES[g] * eval_median(g, m, int(c)) for g in MODES)
         for c in CRITERIA]
        for m in MODES
    ])
    prototypes = {}
    for g in MODES:
        rows_f = []
        for m in MODES:
            row_f = []
            for c in CRITERIA:
                med = pooled_median[(m, int(c))]
                if med == 0.0:
                    row_f.append(1.0)
                else:
                    row_f.append(max(eval_mean(g, m, int(c)) / med, MIN_FILTER_FACTOR))
            rows_f.append(row_f)
        prototypes[g] = ModeCriterionMatrix.filter_matrix(rows_f)

    overall_prio = PriorityVector.of([
        sum(GROUP_SIZES[g] * solved_priority_means()[g][c] for g in MODES) / TOTAL
        for c in CRITERIA
    ])
    bundle = CalibrationBundle(
        objective=objective,
        priority_means={g: PriorityVector.of(priority_means[g]) for g in MODES},
        priority_means_overall=overall_prio,
        prototypes=prototypes,
        distance_stats={
            g: DistanceStats(mean_km=DISTANCES[g][0], sd_km=distance_sd[g],
                             median_km=DISTANCES[g][1])
            for g in MODES
        },
        access_prob={
            g: AccessProbability(
                p_car_access=1.0 if g is Mode.CAR else (GROUP_SIZES[g] - NO_CAR[g]) / GROUP_SIZES[g],
                p_bus_access=1.0 if g is Mode.BUS else (GROUP_SIZES[g] - NO_BUS[g]) / GROUP_SIZES[g],
            )
            for g in MODES
        },
        population_shares=dict(NATIONAL_SHARES),
        group_sizes=dict(GROUP_SIZES),
    )
    return rows, bundle


def main() -> None:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    rows, planted = build_rows()

    columns = (["usual_mode", "distance_km", "trips_per_week", "access_car", "access_bus"]
               + [f"prio_{c.label}" for c in CRITERIA]
               + [f"val_{m.label}_{c.label}" for m in MODES for c in CRITERIA])
    csv_path = DATA_DIR / "fixture_survey.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)

    planted.save(DATA_DIR / "fixture_bundle.json")

    with open(csv_path, "r", encoding="utf-8") as fh:
        parsed = parse_survey(fh)
    assert not parsed.rejected, parsed.rejected[:3]
    records = clean_records(parsed.records)
    assert len(records) == TOTAL, len(records)
    calibrated = build_bundle(records)
    calibrated.save(DATA_DIR / "default_bundle.json")

    print(f"wrote {csv_path} ({len(rows)} rows)")
    print("objective matrix (calibrated):")
    for m in MODES:
        print(f"  {m.label:5s}", [round(v, 3) for v in calibrated.objective.row(m)])
    print("prototype own-row factors:")
    for g in MODES:
        print(f"  {g.label:5s}", [round(calibrated.prototypes[g].value(g, c), 3)
                                  for c in CRITERIA])


if __name__ == "__main__":
    main()

"""Per-tick macroscopic indicators and their CSV time-series format."""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import Mode

CSV_HEADER = (
    "tick,share_bike,share_bus,share_car,share_walk,"
    "sat_bike,sat_bus,sat_car,sat_walk,"
    "n_routine,n_biased,n_constrained,n_rational"
)


@dataclass(frozen=True)
class DecisionCounts:
    """Counts over one tick's decisions.

    biased and constrained are flags on non-routine decisions (one decision
    can be both); rational counts the non-routine decisions that are
    neither. routine + biased-or-constrained-or-rational = population size.
    """

    routine: int
    biased: int
    constrained: int
    rational: int


@dataclass(frozen=True)
class MetricsFrame:
    """Modal shares, per-mode mean satisfaction, and decision counts at one tick.

    Satisfaction is None for a mode with no current users.
    """

    tick: int
    modal_share: tuple[float, float, float, float]
    satisfaction: tuple[float | None, float | None, float | None, float | None]
    decisions: DecisionCounts

    def share(self, mode: Mode) -> float:
        return self.modal_share[mode]

    def sat(self, mode: Mode) -> float | None:
        return self.satisfaction[mode]

    def to_dict(self) -> dict:
        return {
            "tick": self.tick,
            "modal_share": {m.label: self.modal_share[m] for m in Mode},
            "satisfaction": {m.label: self.satisfaction[m] for m in Mode},
            "decisions": {
                "routine": self.decisions.routine,
                "biased": self.decisions.biased,
                "constrained": self.decisions.constrained,
                "rational": self.decisions.rational,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsFrame":
        return cls(
            tick=int(d["tick"]),
            modal_share=tuple(float(d["modal_share"][m.label]) for m in Mode),
            satisfaction=tuple(
                None if d["satisfaction"][m.label] is None
                else float(d["satisfaction"][m.label])
                for m in Mode
            ),
            decisions=DecisionCounts(**{k: int(v) for k, v in d["decisions"].items()}),
        )


def _cell(value: float | None) -> str:
    return "" if value is None else repr(value)


def frame_to_row(frame: MetricsFrame) -> str:
    share = frame.modal_share
    sat = frame.satisfaction
    d = frame.decisions
    return (
        f"{frame.tick},{_cell(share[0])},{_cell(share[1])},{_cell(share[2])},"
        f"{_cell(share[3])},{_cell(sat[0])},{_cell(sat[1])},{_cell(sat[2])},"
        f"{_cell(sat[3])},{d.routine},{d.biased},{d.constrained},{d.rational}"
    )


def frames_to_csv(frames: Iterable[MetricsFrame], fh: io.TextIOBase) -> None:
    """Write the documented time-series format: header plus one row per tick."""
    fh.write(CSV_HEADER + "\n")
    for frame in frames:
        fh.write(frame_to_row(frame) + "\n")


def frames_from_csv(fh: io.TextIOBase) -> list[MetricsFrame]:
    header = fh.readline().rstrip("\n")
    if header != CSV_HEADER:
        raise ValueError(f"unexpected time-series header: {header!r}")
    frames = []
    for line in fh:
        line = line.rstrip("\n")
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != 13:
            raise ValueError(f"malformed time-series row: {line!r}")
        frames.append(MetricsFrame(
            tick=int(cells[0]),
            modal_share=tuple(float(c) for c in cells[1:5]),
            satisfaction=tuple(None if c == "" else float(c) for c in cells[5:9]),
            decisions=DecisionCounts(*(int(c) for c in cells[9:13])),
        ))
    return frames


def frames_to_csv_string(frames: Sequence[MetricsFrame]) -> str:
    buf = io.StringIO()
    frames_to_csv(frames, buf)
    return buf.getvalue()

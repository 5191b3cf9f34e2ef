"""Scenario scripts: a line-oriented command format and its runner.

Format (one command per line, ``#`` starts a comment):

    at <tick> set-env <mode> <criterion> <value>
    ramp <tick_from> <tick_to> <mode> <criterion> <value_from> <value_to>
    at <tick> set-priority <criterion> <target_mean>
    at <tick> reset-habits
    at <tick> set-flags biases=<on|off> habits=<on|off>
    run-until <tick>

Commands apply immediately before the tick that produces the frame
``tick + 1``; ramps assign a linear interpolation step before every tick
in their range, with the endpoint assigned exactly. Ticks must be
non-decreasing in file order; the last run-until is the horizon.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Callable, Sequence, Union

from .calibration import CalibrationBundle
from .engine import Simulation, SimulationConfig
from .metrics import MetricsFrame
from .model import Criterion, Mode


class ScenarioError(ValueError):
    """Parse or validation failure, with its location in the script."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class SetEnv:
    tick: int
    mode: Mode
    criterion: Criterion
    value: float


@dataclass(frozen=True)
class RampEnv:
    tick_from: int
    tick_to: int
    mode: Mode
    criterion: Criterion
    value_from: float
    value_to: float

    def value_at(self, tick: int) -> float:
        if tick >= self.tick_to:
            return self.value_to
        span = self.tick_to - self.tick_from
        return self.value_from + (self.value_to - self.value_from) * (tick - self.tick_from) / span


@dataclass(frozen=True)
class SetPriority:
    tick: int
    criterion: Criterion
    target_mean: float


@dataclass(frozen=True)
class ResetHabits:
    tick: int


@dataclass(frozen=True)
class SetFlags:
    tick: int
    biases_on: bool
    habits_on: bool


@dataclass(frozen=True)
class RunUntil:
    tick: int


Command = Union[SetEnv, RampEnv, SetPriority, ResetHabits, SetFlags, RunUntil]


@dataclass(frozen=True)
class ScenarioScript:
    commands: tuple[Command, ...]

    @property
    def horizon(self) -> int:
        """Tick of the last run-until; 0 when the script never runs."""
        ticks = [c.tick for c in self.commands if isinstance(c, RunUntil)]
        return max(ticks) if ticks else 0


class _Line:
    def __init__(self, no: int, text: str):
        self.no = no
        self.tokens: list[tuple[str, int]] = []
        col = 1
        for raw in text.split(" "):
            if raw:
                self.tokens.append((raw, col))
            col += len(raw) + 1
        self._next = 0

    def take(self, what: str) -> tuple[str, int]:
        if self._next >= len(self.tokens):
            last_col = self.tokens[-1][1] + len(self.tokens[-1][0]) if self.tokens else 1
            raise ScenarioError(f"expected {what}", self.no, last_col)
        tok = self.tokens[self._next]
        self._next += 1
        return tok

    def done(self) -> None:
        if self._next < len(self.tokens):
            tok, col = self.tokens[self._next]
            raise ScenarioError(f"unexpected trailing token {tok!r}", self.no, col)


def _parse_int(line: _Line, what: str) -> int:
    tok, col = line.take(what)
    try:
        v = int(tok)
    except ValueError:
        raise ScenarioError(f"{what} must be an integer, got {tok!r}", line.no, col) from None
    if v < 0:
        raise ScenarioError(f"{what} must be non-negative, got {v}", line.no, col)
    return v


def _parse_value(line: _Line, what: str) -> float:
    tok, col = line.take(what)
    try:
        v = float(tok)
    except ValueError:
        raise ScenarioError(f"{what} must be a number, got {tok!r}", line.no, col) from None
    if not 0.0 <= v <= 10.0:
        raise ScenarioError(f"{what} {v} outside [0, 10]", line.no, col)
    return v


def _parse_mode(line: _Line) -> Mode:
    tok, col = line.take("mode")
    try:
        return Mode.from_label(tok)
    except ValueError as exc:
        raise ScenarioError(str(exc), line.no, col) from None


def _parse_criterion(line: _Line) -> Criterion:
    tok, col = line.take("criterion")
    try:
        return Criterion.from_label(tok)
    except ValueError as exc:
        raise ScenarioError(str(exc), line.no, col) from None


def _parse_flag(line: _Line, name: str) -> bool:
    tok, col = line.take(f"{name}=on|off")
    if "=" not in tok:
        raise ScenarioError(f"expected {name}=on|off, got {tok!r}", line.no, col)
    key, _, value = tok.partition("=")
    if key != name or value not in ("on", "off"):
        raise ScenarioError(f"expected {name}=on|off, got {tok!r}", line.no, col)
    return value == "on"


def parse_scenario(text: str) -> ScenarioScript:
    commands: list[Command] = []
    last_tick = 0
    for no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].rstrip()
        if not stripped.strip():
            continue
        line = _Line(no, stripped)
        head, head_col = line.take("command")

        if head == "at":
            tick = _parse_int(line, "tick")
            verb, verb_col = line.take("command verb")
            if verb == "set-env":
                cmd: Command = SetEnv(tick, _parse_mode(line), _parse_criterion(line),
                                      _parse_value(line, "value"))
            elif verb == "set-priority":
                cmd = SetPriority(tick, _parse_criterion(line), _parse_value(line, "mean"))
            elif verb == "reset-habits":
                cmd = ResetHabits(tick)
            elif verb == "set-flags":
                biases = _parse_flag(line, "biases")
                habits = _parse_flag(line, "habits")
                cmd = SetFlags(tick, biases, habits)
            else:
                raise ScenarioError(f"unknown command {verb!r}", no, verb_col)
            ordering_tick = tick
        elif head == "ramp":
            t0 = _parse_int(line, "tick_from")
            t1 = _parse_int(line, "tick_to")
            if t1 <= t0:
                raise ScenarioError(f"ramp needs tick_to > tick_from, got {t0}..{t1}", no, head_col)
            cmd = RampEnv(t0, t1, _parse_mode(line), _parse_criterion(line),
                          _parse_value(line, "value_from"), _parse_value(line, "value_to"))
            ordering_tick = t0
        elif head == "run-until":
            cmd = RunUntil(_parse_int(line, "tick"))
            ordering_tick = cmd.tick
        else:
            raise ScenarioError(f"unknown command {head!r}", no, head_col)
        line.done()

        if ordering_tick < last_tick:
            raise ScenarioError(
                f"ticks must be non-decreasing in file order "
                f"({ordering_tick} after {last_tick})", no, head_col)
        last_tick = ordering_tick
        commands.append(cmd)
    return ScenarioScript(commands=tuple(commands))


def apply_due_commands(sim: Simulation, script: ScenarioScript, tick: int) -> list[Command]:
    """Apply every command due right before ``tick`` runs; returns them."""
    applied = []
    for cmd in script.commands:
        if isinstance(cmd, SetEnv) and cmd.tick == tick:
            sim.set_objective(cmd.mode, cmd.criterion, cmd.value)
        elif isinstance(cmd, RampEnv) and cmd.tick_from <= tick <= cmd.tick_to:
            sim.set_objective(cmd.mode, cmd.criterion, cmd.value_at(tick))
        elif isinstance(cmd, SetPriority) and cmd.tick == tick:
            sim.shift_priority(cmd.criterion, cmd.target_mean)
        elif isinstance(cmd, ResetHabits) and cmd.tick == tick:
            sim.reset_habits()
        elif isinstance(cmd, SetFlags) and cmd.tick == tick:
            sim.set_flags(cmd.biases_on, cmd.habits_on)
        else:
            continue
        applied.append(cmd)
    return applied


def continue_scenario(sim: Simulation, script: ScenarioScript,
                      stop_at: int | None = None,
                      on_frame: Callable[[MetricsFrame], None] | None = None) -> list[MetricsFrame]:
    """Drive an existing simulation through the script from its current tick."""
    horizon = script.horizon if stop_at is None else min(script.horizon, stop_at)
    frames: list[MetricsFrame] = []
    while sim.tick_count < horizon:
        apply_due_commands(sim, script, sim.tick_count)
        frame = sim.tick()
        frames.append(frame)
        if on_frame is not None:
            on_frame(frame)
    return frames


def run_scenario(bundle: CalibrationBundle, config: SimulationConfig,
                 script: ScenarioScript, stop_at: int | None = None) -> list[MetricsFrame]:
    """Initialize a simulation and run the script; deterministic in the seed."""
    sim = Simulation(bundle, config)
    return continue_scenario(sim, script, stop_at=stop_at)


def bundled_scenario_names() -> list[str]:
    root = resources.files("modalsim").joinpath("scenarios")
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".scn"))


def load_bundled_scenario(name: str) -> str:
    path = resources.files("modalsim").joinpath("scenarios", f"{name}.scn")
    if not path.is_file():
        raise FileNotFoundError(
            f"no bundled scenario {name!r}; available: {bundled_scenario_names()}")
    return path.read_text(encoding="utf-8")

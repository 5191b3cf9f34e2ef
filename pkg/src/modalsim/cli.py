"""Command-line front door: calibrate, run scenarios, sweep seeds, serve.

Exit codes: 0 success, 1 usage error, 2 input validation error, 3 runtime
error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

from .calibration import (
    CalibrationBundle,
    CalibrationError,
    SurveyFormatError,
    build_bundle,
    clean_records,
    load_column_mapping,
    parse_survey,
)
from .engine import InitializationError, Simulation, SimulationConfig
from .metrics import frames_to_csv
from .scenario import (
    ScenarioError,
    bundled_scenario_names,
    continue_scenario,
    load_bundled_scenario,
    parse_scenario,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 by default; usage errors are 1
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def load_bundle_ref(ref: str) -> CalibrationBundle:
    """Load a bundle from a path, or the packaged bundle for ``default``."""
    if ref == "default":
        with resources.files("modalsim").joinpath("data", "default_bundle.json").open(
                "r", encoding="utf-8") as fh:
            bundle = CalibrationBundle.from_dict(json.load(fh))
        bundle.validate()
        return bundle
    return CalibrationBundle.load(ref)


def load_scenario_ref(ref: str) -> str:
    """Read scenario text from a file path or a bundled scenario name."""
    path = Path(ref)
    if path.is_file():
        return path.read_text(encoding="utf-8")
    if ref in bundled_scenario_names():
        return load_bundled_scenario(ref)
    raise FileNotFoundError(f"scenario {ref!r} is neither a file nor a bundled scenario "
                            f"(bundled: {', '.join(bundled_scenario_names())})")


def _cmd_calibrate(args) -> int:
    mapping = load_column_mapping(args.mapping) if args.mapping else None
    with open(args.survey, "r", encoding="utf-8", newline="") as fh:
        parsed = parse_survey(fh, mapping)
    if parsed.rejected:
        print(f"rejected {parsed.n_rejected} malformed row(s):", file=sys.stderr)
        for line_no, reason in parsed.rejected[:20]:
            print(f"  line {line_no}: {reason}", file=sys.stderr)
    records = clean_records(parsed.records)
    dropped = len(parsed.records) - len(records)
    aggregation = "mean_of_ratios" if args.mean_of_ratios else "ratio_of_aggregates"
    bundle = build_bundle(records, prototype_aggregation=aggregation)
    bundle.save(args.out)
    print(f"parsed {len(parsed.records)} records ({parsed.n_rejected} rejected), "
          f"cleaned out {dropped}, calibrated from {len(records)}")
    print(f"wrote {args.out}")
    return EXIT_OK


def _make_config(args, seed: int) -> SimulationConfig:
    return SimulationConfig(
        n_agents=args.agents,
        seed=seed,
        history_capacity=args.history_capacity,
        disruption_prob=args.disruption_prob,
        priority_noise=args.priority_noise,
        biases_on=args.biases != "off",
        habits_on=args.habits != "off",
    )


def _cmd_run(args) -> int:
    script = parse_scenario(load_scenario_ref(args.scenario))
    if args.from_snapshot:
        with open(args.from_snapshot, "r", encoding="utf-8") as fh:
            sim = Simulation.from_snapshot(json.load(fh))
    else:
        bundle = load_bundle_ref(args.bundle)
        sim = Simulation(bundle, _make_config(args, args.seed))
    frames = continue_scenario(sim, script, stop_at=args.stop_at)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        frames_to_csv(frames, fh)
    print(f"ran {len(frames)} tick(s) to tick {sim.tick_count}; wrote {args.out}")
    if args.snapshot:
        with open(args.snapshot, "w", encoding="utf-8") as fh:
            json.dump(sim.snapshot(), fh)
            fh.write("\n")
        print(f"wrote snapshot {args.snapshot}")
    return EXIT_OK


def _seed_range(spec: str) -> list[int]:
    if ".." in spec:
        lo, _, hi = spec.partition("..")
        seeds = list(range(int(lo), int(hi) + 1))
        if not seeds:
            raise ValueError(f"empty seed range {spec!r}")
        return seeds
    return [int(spec)]


def _sweep_out_path(template: str, seed: int) -> Path:
    if "{seed}" in template:
        return Path(template.replace("{seed}", str(seed)))
    path = Path(template)
    return path.with_name(f"{path.stem}.seed{seed}{path.suffix}")


def _sweep_one(payload: tuple) -> str:
    bundle_ref, scenario_ref, args_dict, seed, out_template = payload
    bundle = load_bundle_ref(bundle_ref)
    script = parse_scenario(load_scenario_ref(scenario_ref))
    ns = argparse.Namespace(**args_dict)
    sim = Simulation(bundle, _make_config(ns, seed))
    frames = continue_scenario(sim, script, stop_at=ns.stop_at)
    out = _sweep_out_path(out_template, seed)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        frames_to_csv(frames, fh)
    return str(out)


def _cmd_sweep(args) -> int:
    seeds = _seed_range(args.seeds)
    args_dict = {
        "agents": args.agents, "history_capacity": args.history_capacity,
        "disruption_prob": args.disruption_prob, "priority_noise": args.priority_noise,
        "biases": args.biases, "habits": args.habits, "stop_at": args.stop_at,
    }
    payloads = [(args.bundle, args.scenario, args_dict, seed, args.out) for seed in seeds]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            for out in pool.map(_sweep_one, payloads):
                print(f"wrote {out}")
    else:
        for payload in payloads:
            print(f"wrote {_sweep_one(payload)}")
    return EXIT_OK


def _cmd_scenarios(args) -> int:
    if args.action == "list":
        for name in bundled_scenario_names():
            print(name)
        return EXIT_OK
    if not args.name:
        raise SurveyFormatError("scenarios show requires a scenario name")
    print(load_bundled_scenario(args.name), end="")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(bundle_dir=args.bundle_dir, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="modalsim",
                     description="Agent-based commuter modal-choice simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="derive a parameter bundle from a survey CSV")
    p.add_argument("--survey", required=True, help="survey CSV file")
    p.add_argument("--mapping", help="JSON column-name mapping for foreign headers")
    p.add_argument("--out", required=True, help="output bundle JSON path")
    p.add_argument("--mean-of-ratios", action="store_true",
                   help="aggregate prototype factors as mean of per-record ratios")
    p.set_defaults(func=_cmd_calibrate)

    def add_run_flags(p, with_seed: bool):
        p.add_argument("--bundle", default="default",
                       help="bundle JSON path, or 'default' for the packaged bundle")
        p.add_argument("--scenario", required=True,
                       help="scenario file path or bundled scenario name")
        if with_seed:
            p.add_argument("--seed", type=int, default=0, help="RNG seed (64-bit)")
        p.add_argument("--out", required=True, help="output time-series CSV path")
        p.add_argument("--agents", type=int, default=200)
        p.add_argument("--history-capacity", type=int, default=20)
        p.add_argument("--disruption-prob", type=float, default=0.01)
        p.add_argument("--priority-noise", type=float, default=0.20)
        p.add_argument("--biases", choices=["on", "off"], default="on")
        p.add_argument("--habits", choices=["on", "off"], default="on")
        p.add_argument("--stop-at", type=int, default=None,
                       help="stop early at this tick (before the script horizon)")

    p = sub.add_parser("run", help="run one scenario headlessly")
    add_run_flags(p, with_seed=True)
    p.add_argument("--snapshot", help="write the final state snapshot to this path")
    p.add_argument("--from-snapshot", help="resume from a snapshot instead of initializing")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="run one scenario over a range of seeds")
    p.add_argument("--seeds", required=True, help="seed range a..b (inclusive) or single seed")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    add_run_flags(p, with_seed=False)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("scenarios", help="list or show bundled scenario scripts")
    p.add_argument("action", choices=["list", "show"])
    p.add_argument("name", nargs="?", help="scenario name (for show)")
    p.set_defaults(func=_cmd_scenarios)

    p = sub.add_parser("serve", help="start the HTTP session service")
    p.add_argument("--host", default=None, help="listen address (env MODALSIM_HOST)")
    p.add_argument("--port", type=int, default=None, help="listen port (env MODALSIM_PORT)")
    p.add_argument("--bundle-dir", default=None,
                   help="directory of extra bundle JSON files (env MODALSIM_BUNDLE_DIR)")
    p.add_argument("--ui-dir", default=None,
                   help="static dashboard directory to mount at /ui (env MODALSIM_UI_DIR)")
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "serve":
        import os

        args.host = args.host or os.environ.get("MODALSIM_HOST", "127.0.0.1")
        args.port = args.port or int(os.environ.get("MODALSIM_PORT", "8477"))
        args.bundle_dir = args.bundle_dir or os.environ.get("MODALSIM_BUNDLE_DIR")
        args.ui_dir = args.ui_dir or os.environ.get("MODALSIM_UI_DIR")
    try:
        return args.func(args)
    except (ScenarioError, SurveyFormatError, CalibrationError, InitializationError,
            FileNotFoundError, ValueError) as exc:
        print(f"modalsim: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"modalsim: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

"""Benchmark the compiled tick kernel against the pure-Python fallback.

Both backends are run on identical inputs; the script reports wall time,
throughput, speedup, and verifies the outputs stayed bit-identical.

Usage: python benchmarks/bench_backends.py [--agents N] [--ticks N]
"""

from __future__ import annotations

import argparse
import json
import time
from importlib import resources

import numpy as np

from modalsim.calibration import CalibrationBundle
from modalsim.engine import Simulation, SimulationConfig
from modalsim.kernels import get_backend


def load_default_bundle() -> CalibrationBundle:
    with resources.files("modalsim").joinpath("data", "default_bundle.json").open(
            "r", encoding="utf-8") as fh:
        return CalibrationBundle.from_dict(json.load(fh))


def run(backend: str, bundle, n_agents: int, ticks: int, habits_on: bool):
    tick_once, _, name = get_backend(backend)
    sim = Simulation(bundle, SimulationConfig(seed=7, n_agents=n_agents,
                                              habits_on=habits_on))
    start = time.perf_counter()
    state = sim.rng.getstate()
    for _ in range(ticks):
        state = tick_once(
            sim.objective, sim.prototypes, sim.priorities, sim.distance,
            sim.car_access, sim.bus_access, sim.current_mode, sim.initial_usual,
            sim.hist, sim.hist_start, sim.hist_len, sim.hist_count,
            state, sim.biases_on, sim.habits_on, sim.config.disruption_prob,
            sim.last_routine, sim.last_biased, sim.last_constrained, sim.last_sat)
    elapsed = time.perf_counter() - start
    digest = (int(state), sim.current_mode.tobytes(), sim.hist.tobytes(),
              sim.last_sat.tobytes())
    return name, elapsed, digest


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--agents", type=int, default=2000)
    parser.add_argument("--ticks", type=int, default=200)
    args = parser.parse_args()

    bundle = load_default_bundle()
    decisions = args.agents * args.ticks

    try:
        get_backend("cython")
        backends = ["python", "cython"]
    except ImportError:
        print("compiled kernel not built; benchmarking the fallback only")
        backends = ["python"]

    for habits_on, label in ((True, "mostly-routine (habits on)"),
                             (False, "full re-evaluation (habits off)")):
        print(f"\n== {args.agents} agents x {args.ticks} ticks, {label} ==")
        results = {}
        for backend in backends:
            name, elapsed, digest = run(backend, bundle, args.agents, args.ticks,
                                        habits_on)
            results[name] = (elapsed, digest)
            rate = decisions / elapsed / 1e6
            print(f"  {name:7s} {elapsed:8.3f} s   {rate:7.2f} M decisions/s")
        if len(results) == 2:
            py_t, py_d = results["python"]
            cy_t, cy_d = results["cython"]
            print(f"  speedup {py_t / cy_t:7.1f} x   outputs bit-identical: {py_d == cy_d}")
            if py_d != cy_d:
                raise SystemExit("backend outputs diverged")


if __name__ == "__main__":
    main()

"""Benchmark the compiled kernels against the pure-numpy reference.

Times the four hot kernels on both importable backends, then a full
simulator tick on the active backend and checks it against the 2 ms
compute budget that keeps the 200 Hz loop real time.

Run:  python3 benchmarks/bench_kernels.py [--reps N] [--ticks N]
"""

import argparse
import time

import numpy as np

from cdprsim.config import config_from_dict
from cdprsim.geometry import default_geometry
from cdprsim.kernels import BACKEND, available_backends
from cdprsim.simulation import OperatorInput, Simulator

TICK_BUDGET_S = 2e-3


def time_call(fn, args, reps):
    fn(*args)  # warmup and sanity
    best = np.inf
    for _ in range(5):
        started = time.perf_counter()
        for _ in range(reps):
            fn(*args)
        best = min(best, (time.perf_counter() - started) / reps)
    return best


def bench_kernels(reps):
    geometry = default_geometry()
    fa = geometry.frame_anchors
    ba = geometry.body_anchors
    qt = np.array([0.05, -0.03, 0.08])
    qo = np.array([0.1, -0.2, 0.15])
    tensions = np.linspace(1.0, 4.0, 8)

    cases = [
        ("rotation_xyz", lambda mod: (mod.rotation_xyz, (qo[0], qo[1], qo[2]))),
        ("cable_lengths", lambda mod: (mod.cable_lengths, (fa, ba, qt, qo))),
        ("lengths_and_jacobian", lambda mod: (mod.lengths_and_jacobian, (fa, ba, qt, qo))),
        ("net_torque", lambda mod: (mod.net_torque, (fa, ba, qt, qo, tensions, 0.328, np.zeros(3)))),
    ]

    backends = available_backends()
    names = list(backends)
    print(f"kernel timings, best of 5 x {reps} reps (us per call)")
    header = f"{'kernel':24s}" + "".join(f"{name:>12s}" for name in names)
    if len(names) == 2:
        header += f"{'speedup':>10s}"
    print(header)
    for label, make in cases:
        row = f"{label:24s}"
        per_call = []
        for name in names:
            fn, args = make(backends[name])
            seconds = time_call(fn, args, reps)
            per_call.append(seconds)
            row += f"{seconds * 1e6:12.2f}"
        if len(per_call) == 2:
            row += f"{per_call[0] / per_call[1]:9.1f}x"
        print(row)


def bench_tick(ticks):
    geometry = default_geometry()
    config = config_from_dict({"sim": {"noise_sigma": 2e-4}})
    sim = Simulator(geometry, config)
    target = (0.04, -0.02, 0.03)
    for _ in range(50):  # warm the solver and the allocator
        sim.step(OperatorInput(drag_target=target, pedal=True, timestamp=sim.state.time))

    durations = np.empty(ticks)
    for k in range(ticks):
        started = time.perf_counter()
        sim.step(OperatorInput(drag_target=target, pedal=True, timestamp=sim.state.time))
        durations[k] = time.perf_counter() - started

    mean = float(np.mean(durations))
    p99 = float(np.percentile(durations, 99))
    print(f"\nfull tick on backend {BACKEND!r} over {ticks} ticks")
    print(f"mean {mean * 1e3:.3f} ms, p99 {p99 * 1e3:.3f} ms, "
          f"budget {TICK_BUDGET_S * 1e3:.1f} ms")
    verdict = "within" if p99 < TICK_BUDGET_S else "OVER"
    print(f"p99 is {verdict} the real-time budget")
    return p99 < TICK_BUDGET_S


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reps", type=int, default=2000, help="reps per kernel timing")
    parser.add_argument("--ticks", type=int, default=2000, help="simulator ticks to time")
    args = parser.parse_args()
    bench_kernels(args.reps)
    ok = bench_tick(args.ticks)
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())

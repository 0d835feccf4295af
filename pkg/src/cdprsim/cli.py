"""Command line interface: serve, replay, workspace, fk-bench.

Configuration resolution is the same for every subcommand: an explicit
--config wins over the CDPRSIM_CONFIG environment variable, which wins
over built-in defaults.  Network and reproducibility knobs (port, seed,
latency window) can be overridden per invocation without editing files.
"""

import argparse
import dataclasses
import logging
import math
import statistics
import sys
import time

import numpy as np

from .config import ENV_CONFIG, load_or_default
from .errors import TooFewMembersError
from .fk import fk_solve_robust
from .geometry import Pose, default_geometry, load_geometry
from .kinematics import inverse_kinematics
from .simulation import inject_noise, replay
from .service import run_service
from .statics import gravity_compensation
from .workspace import build_report, format_report, sample_workspace, write_samples


def _add_common(parser):
    parser.add_argument(
        "--geometry", metavar="FILE",
        help="geometry YAML (frame_anchors/body_anchors); default is the built-in rig",
    )
    parser.add_argument(
        "--config", metavar="FILE",
        help=f"config YAML; falls back to ${ENV_CONFIG}, then to built-in defaults",
    )


def _load_setup(args):
    geometry = load_geometry(args.geometry) if args.geometry else default_geometry()
    config = load_or_default(args.config)
    return geometry, config


def _replace_sim(config, **changes):
    return dataclasses.replace(config, sim=dataclasses.replace(config.sim, **changes))


def cmd_serve(args):
    geometry, config = _load_setup(args)
    changes = {}
    if args.host is not None:
        changes["host"] = args.host
    if args.port is not None:
        changes["port"] = args.port
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.latency is not None:
        changes["latency_min"], changes["latency_max"] = args.latency
    if changes:
        config = _replace_sim(config, **changes)
    try:
        run_service(geometry, config, record_prefix=args.record)
    except OSError as exc:
        print(f"cannot listen on {config.sim.host}:{config.sim.port}: {exc}", file=sys.stderr)
        return 1
    return 0


def cmd_replay(args):
    config = None
    if args.config:
        config = load_or_default(args.config)
    try:
        result = replay(args.record, config=config)
    except (OSError, ValueError) as exc:
        print(f"cannot replay {args.record}: {exc}", file=sys.stderr)
        return 1
    ticks = len(result.states)
    print(f"replayed {ticks} ticks from {args.record}")
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(result.content)
        print(f"wrote replayed trajectory to {args.output}")
    if not result.comparable:
        print("note: run is not comparable to the recording "
              "(different config or kernel backend), skipping byte check")
        return 0
    with open(args.record, encoding="utf-8") as fh:
        identical = fh.read() == result.content
    if identical:
        print("replay is byte-identical to the recording")
        return 0
    print("replay DIVERGED from the recording", file=sys.stderr)
    return 1


def cmd_workspace(args):
    geometry, config = _load_setup(args)
    inertia = config.statics.inertia()
    tensions = gravity_compensation(
        geometry, geometry.center_pose(), inertia, f_min=config.statics.f_min
    )
    started = time.perf_counter()
    samples = sample_workspace(
        geometry,
        tensions,
        inertia,
        count=args.count,
        fraction=args.fraction,
        sampler=args.sampler,
        seed=args.seed,
    )
    elapsed = time.perf_counter() - started
    if args.dump:
        write_samples(samples, args.dump)
        print(f"wrote {len(samples)} samples to {args.dump}", file=sys.stderr)
    print(f"sweep took {elapsed:.1f} s", file=sys.stderr)
    try:
        report = build_report(samples, fit_threshold=math.radians(args.fit_threshold))
    except TooFewMembersError as exc:
        print(f"cannot fit the wall ellipsoid: {exc}; "
              "increase --count or loosen --fit-threshold", file=sys.stderr)
        return 1
    text = format_report(report)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_fk_bench(args):
    geometry, config = _load_setup(args)
    fk_config = config.fk.fk_config(geometry)
    lo, hi = fk_config.bounds_lo, fk_config.bounds_hi
    center = Pose.from_vector(0.5 * (lo + hi))
    rng = np.random.default_rng(args.seed)

    solved = 0
    iteration_counts = []
    times = []
    errors = []
    for _ in range(args.poses):
        pose = Pose.from_vector(lo + rng.random(6) * (hi - lo))
        lengths = inverse_kinematics(geometry, pose)
        if args.noise > 0.0:
            lengths = inject_noise(lengths, args.noise, rng)
        started = time.perf_counter()
        solution = fk_solve_robust(geometry, lengths, center, fk_config)
        times.append(time.perf_counter() - started)
        iteration_counts.append(solution.iterations)
        if solution.converged:
            solved += 1
            errors.append(
                float(np.linalg.norm(solution.pose.translation - pose.translation))
            )

    print(f"poses: {args.poses}  noise sigma: {args.noise:g} m")
    print(f"converged: {solved}/{args.poses}")
    print(f"median iterations: {statistics.median(iteration_counts):g}")
    print(f"mean solve time: {1e3 * statistics.fmean(times):.3f} ms")
    if errors:
        errors.sort()
        print(f"median translation error: {errors[len(errors) // 2]:.3e} m")
        print(f"max translation error:    {errors[-1]:.3e} m")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cdprsim",
        description="Cable-driven teleoperation master: simulation service and analysis tools.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the WebSocket simulation service")
    _add_common(serve)
    serve.add_argument("--host", help="bind address (default from config)")
    serve.add_argument("--port", type=int, help="bind port (default from config, 0 = ephemeral)")
    serve.add_argument("--seed", type=int, help="override the simulation seed")
    serve.add_argument(
        "--latency", type=float, nargs=2, metavar=("MIN", "MAX"),
        help="override the injected slave latency window, seconds",
    )
    serve.add_argument(
        "--record", metavar="PREFIX",
        help="write PREFIX.left.traj and PREFIX.right.traj on shutdown",
    )
    serve.set_defaults(func=cmd_serve)

    rep = sub.add_parser("replay", help="re-run a recorded trajectory and verify it")
    rep.add_argument("record", help="trajectory file written by serve --record")
    rep.add_argument("--config", metavar="FILE",
                     help="replay under this config instead of the recorded one")
    rep.add_argument("--output", metavar="FILE", help="write the replayed trajectory here")
    rep.set_defaults(func=cmd_replay)

    ws = sub.add_parser("workspace", help="passive-orientation sweep and ellipsoid fit")
    _add_common(ws)
    ws.add_argument("--count", type=int, default=9261, help="sample count (default 9261)")
    ws.add_argument("--fraction", type=float, default=0.8,
                    help="fraction of the frame box to sweep (default 0.8)")
    ws.add_argument("--sampler", choices=("grid", "monte-carlo"), default="grid")
    ws.add_argument("--seed", type=int, default=0, help="Monte Carlo seed")
    ws.add_argument("--fit-threshold", type=float, default=10.0,
                    help="orientation threshold for the ellipsoid fit, degrees (default 10)")
    ws.add_argument("--dump", metavar="FILE", help="write per-sample data here")
    ws.add_argument("--output", metavar="FILE", help="write the report here instead of stdout")
    ws.set_defaults(func=cmd_workspace)

    bench = sub.add_parser("fk-bench", help="forward-kinematics solver statistics")
    _add_common(bench)
    bench.add_argument("--poses", type=int, default=200, help="number of random poses")
    bench.add_argument("--noise", type=float, default=0.0, help="length noise sigma, meters")
    bench.add_argument("--seed", type=int, default=0)
    bench.set_defaults(func=cmd_fk_bench)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line harness: fixture assertions, benchmarks, and the MPC demo.

Subcommands:

    assert          check the hard-coded size/index fixture table (hermetic)
    bench-build     hierarchy+map construction sweep over (horizon, rotors)
    bench-access    leaf-read overhead of each map flavor vs raw indexing
    demo-quadrotor  closed-loop receding-horizon hover regulation, CSV out

Exit codes: 0 success, 1 assertion/solver failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .bench import ACCESS_COLUMNS, BUILD_COLUMNS, BenchConfig, bench_access, bench_build, write_csv
from .dynamics import (
    ORIENTATION,
    STATE_SIZE,
    QuadrotorParams,
    integrate_step,
)
from .errors import FlatvarsError, ValidationError
from .presets import clm_variables, locomotion_variables, quadrotor_variables
from .sqp import quadrotor_hover_instance, save_solution, shift_guess, solve, transcribe
from .variables import resolve, size_of

DEMO_COLUMNS = (
    ["t"]
    + [f"p{a}" for a in "xyz"]
    + [f"q{a}" for a in "xyzw"]
    + [f"v{a}" for a in "xyz"]
    + [f"w{a}" for a in "xyz"]
)


# ---------------------------------------------------------------------------
# Fixture assertion table


def fixture_checks(inject_fault: bool = False) -> list:
    """Named (description, actual, expected) checks over the fixture trees.

    ``inject_fault`` deliberately corrupts one expectation, for exercising
    the failure path.
    """
    quad = quadrotor_variables(horizon=30, rotor_count=4)
    loco = locomotion_variables(horizon=30, leg_count=4)
    clm = clm_variables(horizon=10, robot_count=2, leg_count=4)
    X, U, dv = quad.stacked_states, quad.stacked_inputs, quad.decision_variables

    checks = [
        ("x.size", size_of(quad.state), 13),
        ("X.size", size_of(X), 403),
        ("u.size", size_of(quad.input), 4),
        ("U.size", size_of(U), 120),
        ("decision_variables.size", size_of(dv), 523),
        ("X(x,0).offset", resolve(X, ("x", 0)).offset, 0),
        ("X(x,1).offset", resolve(X, ("x", 1)).offset, 13),
        ("X(x,1,linear_velocity).offset", resolve(X, ("x", 1, "linear_velocity")).offset, 20),
        ("decision_variables(U).offset", resolve(dv, ("U",)).offset, 403),
        ("U(u,0).offset", resolve(U, ("u", 0)).offset, 0),
        ("U(u,1).offset", resolve(U, ("u", 1)).offset, 4),
        ("U(u,1,rotor_speed,0).offset", resolve(U, ("u", 1, "rotor_speed", 0)).offset, 4),
        ("U(u,1,rotor_speed,1).offset", resolve(U, ("u", 1, "rotor_speed", 1)).offset, 5),
    ]

    bypass_pairs = [
        ("X(x,1,linear_velocity) == X(linear_velocity,1)",
         ("x", 1, "linear_velocity"), ("linear_velocity", 1), X),
        ("U(u,1,rotor_speed,0) == U(rotor_speed,1,0)",
         ("u", 1, "rotor_speed", 0), ("rotor_speed", 1, 0), U),
        ("U(u,1,rotor_speed,1) == U(rotor_speed,1,1)",
         ("u", 1, "rotor_speed", 1), ("rotor_speed", 1, 1), U),
        ("dv(X,x,1,linear_velocity) == dv(linear_velocity,1)",
         ("X", "x", 1, "linear_velocity"), ("linear_velocity", 1), dv),
        ("dv(U,u,2,rotor_speed,3) == dv(u,2,rotor_speed,3)",
         ("U", "u", 2, "rotor_speed", 3), ("u", 2, "rotor_speed", 3), dv),
        ("dv(U,u,2,rotor_speed,3) == dv(rotor_speed,2,3)",
         ("U", "u", 2, "rotor_speed", 3), ("rotor_speed", 2, 3), dv),
    ]
    for name, full, bypass, root in bypass_pairs:
        checks.append((name, resolve(root, full) == resolve(root, bypass), True))

    checks += [
        ("locomotion leg_input.size", size_of(loco.leg_input), 6),
        ("locomotion u.size", size_of(loco.input), 24),
        ("locomotion U.size", size_of(loco.stacked_inputs), 720),
        ("locomotion X.size", size_of(loco.stacked_states), 403),
        ("locomotion total size", size_of(loco.decision_variables), 1123),
        ("clm x.size", size_of(clm.state), 39),
        ("clm X.size", size_of(clm.stacked_states), 429),
        ("clm robot_input.size", size_of(clm.robot_input), 30),
        ("clm u.size", size_of(clm.input), 60),
        ("clm U.size", size_of(clm.stacked_inputs), 600),
        ("clm total size", size_of(clm.decision_variables), 1029),
    ]

    if inject_fault:
        name, actual, _ = checks[7]
        checks[7] = (name, actual, 21)
    return checks


def cmd_assert(args) -> int:
    checks = fixture_checks(inject_fault=args.self_test_fault)
    failures = 0
    width = max(len(name) for name, _, _ in checks)
    for name, actual, expected in checks:
        ok = actual == expected
        failures += 0 if ok else 1
        status = "PASS" if ok else "FAIL"
        print(f"[{status}] {name:<{width}}  actual={actual}  expected={expected}")
    print(f"{len(checks) - failures}/{len(checks)} assertions passed")
    return 0 if failures == 0 else 1


# ---------------------------------------------------------------------------
# Benchmarks


def _bench_config(args) -> BenchConfig:
    return BenchConfig(
        horizons=tuple(args.horizon),
        rotor_counts=tuple(args.rotors),
        repetitions=args.reps,
        warmup=args.warmup,
        access_samples=getattr(args, "samples", 20_000),
    )


def cmd_bench_build(args) -> int:
    config = _bench_config(args)
    rows = bench_build(config)
    if args.out:
        write_csv(args.out, rows, BUILD_COLUMNS)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        _print_rows(rows, BUILD_COLUMNS)
    horizon, rotors = config.largest_point()
    largest = {
        row["flavor"]: row["median_ns"]
        for row in rows
        if row["horizon"] == horizon and row["rotors"] == rotors
    }
    if largest["lazy"] > largest["eager"]:
        print(
            f"note: lazy construction ({largest['lazy']} ns) was not faster than "
            f"eager ({largest['eager']} ns) at horizon={horizon}, rotors={rotors}"
        )
    return 0


def cmd_bench_access(args) -> int:
    config = _bench_config(args)
    rows = bench_access(config)
    if args.out:
        write_csv(args.out, rows, ACCESS_COLUMNS)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        _print_rows(rows, ACCESS_COLUMNS)
    eager_ratio = next(r["ratio"] for r in rows if r["flavor"] == "eager")
    gate = 2.0
    if eager_ratio > gate:
        print(f"note: eager access ratio {eager_ratio} exceeds the soft gate {gate} (reported only)")
    return 0


def _print_rows(rows, columns) -> None:
    print(",".join(columns))
    for row in rows:
        print(",".join(str(row[c]) for c in columns))


# ---------------------------------------------------------------------------
# Closed-loop quadrotor demo


class DemoResult:
    def __init__(self, rows, reports, final_error, last_solution, instance):
        self.rows = rows
        self.reports = reports
        self.final_error = final_error
        self.last_solution = last_solution
        self.instance = instance


def run_quadrotor_demo(
    params: QuadrotorParams,
    horizon: int,
    dt: float,
    steps: int,
    start_position=(1.0, 0.0, 0.0),
    setpoint=(0.0, 0.0, 0.0),
    map_flavor: str = "lazy",
):
    """Receding-horizon loop: solve, apply the first input, step the plant, shift.

    Returns (trajectory rows, per-step reports, final position error).
    """
    instance = quadrotor_hover_instance(
        params=params,
        horizon=horizon,
        dt=dt,
        start_position=start_position,
        setpoint=setpoint,
    )
    trans = transcribe(instance)
    plant = instance.model
    x = instance.initial_state.copy()
    guess = None
    rows = []
    reports = []
    solution = None
    m = instance.n_inputs
    input_columns = [f"u{i}" for i in range(m)]
    for step in range(steps):
        instance.set_initial_state(x)
        solution, report = solve(instance, guess, map_flavor=map_flavor)
        reports.append(report)
        if report.termination == "line_search_failed":
            raise FlatvarsError(f"solver failed at step {step}: {report.termination}")
        first = trans.input_offsets[0]
        u0 = solution[first : first + m].copy()
        row = {"t": round(step * dt, 10)}
        for name, value in zip(DEMO_COLUMNS[1:], x):
            row[name] = repr(float(value))
        for name, value in zip(input_columns, u0):
            row[name] = repr(float(value))
        rows.append(row)
        x = np.asarray(integrate_step(x, u0, dt, plant))
        if not np.all(np.isfinite(x)):
            raise FlatvarsError(f"plant state became non-finite at step {step}")
        guess = shift_guess(trans, solution)
        guess[trans.state_offsets[0] : trans.state_offsets[0] + STATE_SIZE] = x
    final_error = float(np.linalg.norm(x[0:3] - np.asarray(setpoint, dtype=float)))
    return DemoResult(rows, reports, final_error, solution, instance)


def cmd_demo_quadrotor(args) -> int:
    params = QuadrotorParams.from_file(args.params) if args.params else QuadrotorParams()
    try:
        result = run_quadrotor_demo(
            params,
            horizon=args.horizon,
            dt=args.dt,
            steps=args.steps,
            start_position=tuple(args.start),
            setpoint=tuple(args.setpoint),
            map_flavor=args.map_flavor,
        )
    except FlatvarsError as err:
        print(f"demo failed: {err}", file=sys.stderr)
        return 1
    rows, reports = result.rows, result.reports
    m = len([c for c in rows[0] if c.startswith("u")])
    columns = DEMO_COLUMNS + [f"u{i}" for i in range(m)]
    if args.out:
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=columns)
            writer.writeheader()
            writer.writerows(rows)
        print(f"wrote {len(rows)} trajectory rows to {path}")
    iterations = [r.iterations for r in reports]
    print(
        f"first solve: {reports[0].summary()}\n"
        f"steps={len(rows)} mean_iterations={np.mean(iterations):.2f} "
        f"final_position_error={result.final_error:.3e} m"
    )
    if args.save_solution:
        save_solution(args.save_solution, result.instance, result.last_solution, reports[-1])
        print(f"saved last solve to {args.save_solution}")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flatvars",
        description="fixture assertions, construction/access benchmarks, and the MPC demo",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_assert = sub.add_parser("assert", help="run the hermetic fixture assertion table")
    p_assert.add_argument(
        "--self-test-fault",
        action="store_true",
        help="deliberately corrupt one expectation (failure-path test)",
    )
    p_assert.set_defaults(handler=cmd_assert)

    for name, handler in (("bench-build", cmd_bench_build), ("bench-access", cmd_bench_access)):
        p = sub.add_parser(name, help=f"run the {name.replace('-', ' ')} benchmark")
        p.add_argument("--horizon", type=int, nargs="+", default=[30, 90, 390])
        p.add_argument("--rotors", type=int, nargs="+", default=[4, 8])
        p.add_argument("--reps", type=int, default=5)
        p.add_argument("--warmup", type=int, default=1)
        p.add_argument("--out", type=str, default=None, help="CSV output path")
        if name == "bench-access":
            p.add_argument("--samples", type=int, default=20_000)
        p.set_defaults(handler=handler)

    p_demo = sub.add_parser("demo-quadrotor", help="closed-loop hover regulation demo")
    p_demo.add_argument("--params", type=str, default=None, help="key=value parameter file")
    p_demo.add_argument("--horizon", type=int, default=30)
    p_demo.add_argument("--dt", type=float, default=0.05)
    p_demo.add_argument("--steps", type=int, default=200)
    p_demo.add_argument("--start", type=float, nargs=3, default=[1.0, 0.0, 0.0])
    p_demo.add_argument("--setpoint", type=float, nargs=3, default=[0.0, 0.0, 0.0])
    p_demo.add_argument("--map-flavor", choices=("lazy", "eager"), default="lazy")
    p_demo.add_argument("--out", type=str, default=None, help="trajectory CSV path")
    p_demo.add_argument("--save-solution", type=str, default=None)
    p_demo.set_defaults(handler=cmd_demo_quadrotor)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_err:
        return int(exit_err.code or 0)
    try:
        return args.handler(args)
    except ValidationError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    except FlatvarsError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())

"""Command-line front end: scenario generation, planning, simulation,
RB/power solving, parameter sweeps, and the terrestrial baseline comparison.

All outputs are CSV-style text; floats are printed with 9 significant
digits so identical runs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import sys

from . import harness, queueing, raopt, scheduler
from .model import RadioParams, generate_scenario, load_scenario, save_scenario


def _parse_values(text: str) -> tuple[float, ...]:
    """Sweep value lists: 'a,b,c' or an inclusive range 'a:b:step'."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"range must be a:b:step, got {text!r}")
        a, b, step = (float(p) for p in parts)
        if step <= 0:
            raise argparse.ArgumentTypeError("range step must be positive")
        values = []
        v = a
        while v <= b + 1e-9 * max(1.0, abs(b)):
            values.append(round(v, 12))
            v += step
        return tuple(values)
    return tuple(float(p) for p in text.split(","))


def _write_out(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return load_scenario(fh.read())


def _radio_from_args(args) -> RadioParams:
    radio = RadioParams()
    overrides = {}
    if args.area is not None:
        overrides["area_m"] = args.area
    if args.p_tx is not None:
        overrides["p_tx"] = args.p_tx
    if args.rbs is not None:
        overrides["total_rbs"] = args.rbs
    if args.packet_bits is not None:
        overrides["packet_bits"] = args.packet_bits
    return dataclasses.replace(radio, **overrides) if overrides else radio


def _add_common(p: argparse.ArgumentParser, scenario: bool = True) -> None:
    if scenario:
        p.add_argument("--scenario", required=True, help="scenario file to read")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--mu", type=float, default=1.0,
                   help="packets served per full slot of dwelling")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="uavm2m",
        description="UAV fleet planning and uplink resource allocation "
                    "for clustered M2M traffic",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random scenario file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clusters", type=int, default=20)
    p.add_argument("--member-min", type=int, default=1)
    p.add_argument("--member-max", type=int, default=10)
    p.add_argument("--area", type=float, default=None)
    p.add_argument("--p-tx", type=float, default=None)
    p.add_argument("--rbs", type=int, default=None)
    p.add_argument("--packet-bits", type=float, default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("plan", help="dwell plan and minimum UAV count")
    _add_common(p)
    p.add_argument("--slack-target", type=float, default=0.0)

    p = sub.add_parser("simulate", help="Monte Carlo queue backlog simulation")
    _add_common(p)
    p.add_argument("--horizon", type=int, default=10_000)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--integer-service", action="store_true")
    p.add_argument("--slack-target", type=float, default=0.0)

    p = sub.add_parser("solve-ra", help="solve the RB/power allocation")
    _add_common(p)
    p.add_argument("--rbs", type=int, default=None, help="override the scenario RB budget")
    p.add_argument("--solver", choices=("kkt", "reduced", "both"), default="reduced")

    p = sub.add_parser("sweep", help="parameter sweep over full pipeline runs")
    p.add_argument("--variable", choices=harness.SWEEP_VARIABLES, required=True)
    p.add_argument("--values", type=_parse_values, required=True,
                   help="comma list a,b,c or inclusive range a:b:step")
    p.add_argument("--replications", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clusters", type=int, default=20)
    p.add_argument("--member-min", type=int, default=1)
    p.add_argument("--member-max", type=int, default=10)
    p.add_argument("--area", type=float, default=None)
    p.add_argument("--p-tx", type=float, default=None)
    p.add_argument("--rbs", type=int, default=None)
    p.add_argument("--packet-bits", type=float, default=None)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--solver", choices=("kkt", "reduced", "both"), default="reduced")
    p.add_argument("--horizon-slots", type=int, default=1)
    p.add_argument("--out", default=None)

    p = sub.add_parser("baseline", help="UAV vs terrestrial power comparison")
    _add_common(p)
    p.add_argument("--bs-height", type=float, default=25.0)
    p.add_argument("--bs-exponent", type=float, default=3.5)
    p.add_argument("--placement", choices=("grid", "at_cluster_heads"), default="grid")

    args = parser.parse_args(argv)

    if args.command == "gen":
        scenario = generate_scenario(args.seed, args.clusters, args.member_min,
                                     args.member_max, _radio_from_args(args))
        _write_out(save_scenario(scenario), args.out)
        return 0

    if args.command == "plan":
        scenario = _load(args.scenario)
        rates = queueing.arrival_rates(scenario)
        u_min = scheduler.min_uavs(rates, args.mu)
        plan = scheduler.find_dwell(rates, u_min, args.mu, slack_target=args.slack_target)
        if plan is None:
            print(f"infeasible: demand needs more than {u_min} UAVs with the "
                  f"requested slack", file=sys.stderr)
            return 1
        buf = io.StringIO()
        scheduler.write_plan_csv(plan, buf)
        _write_out(buf.getvalue(), args.out)
        print(f"u_min={u_min}", file=sys.stderr)
        return 0

    if args.command == "simulate":
        scenario = _load(args.scenario)
        rates = queueing.arrival_rates(scenario)
        u_min = scheduler.min_uavs(rates, args.mu)
        plan = scheduler.find_dwell(rates, u_min, args.mu, slack_target=args.slack_target)
        if plan is None:
            print("infeasible plan", file=sys.stderr)
            return 1
        trace = queueing.simulate(scenario, plan.dwell, service_rate=args.mu,
                                  horizon=args.horizon, seed=args.seed,
                                  integer_service=args.integer_service)
        buf = io.StringIO()
        queueing.write_trace_csv(trace, buf)
        _write_out(buf.getvalue(), args.out)
        stable = queueing.is_rate_stable(trace, args.epsilon) if args.horizon >= 1000 else None
        print(f"max_backlog_rate={float(trace.final_rates().max()):.9g} "
              f"stable={stable}", file=sys.stderr)
        return 0

    if args.command == "solve-ra":
        scenario = _load(args.scenario)
        if args.rbs is not None:
            scenario = dataclasses.replace(scenario, total_rbs=args.rbs)
        result = harness.run_pipeline(scenario, mu=args.mu, seed=args.seed,
                                      solver=args.solver)
        buf = io.StringIO()
        raopt.write_solution_csv(result.best, result.instance, buf)
        _write_out(buf.getvalue(), args.out)
        line = (f"u_min={result.u_min} avg_power_w={result.avg_power_w:.9g} "
                f"continuous_objective_w={result.continuous.objective:.9g}")
        if result.kkt_objective_w is not None:
            line += f" kkt_objective_w={result.kkt_objective_w:.9g}"
        print(line, file=sys.stderr)
        return 0

    if args.command == "sweep":
        spec = harness.SweepSpec(
            variable=args.variable, values=args.values,
            replications=args.replications, base_seed=args.seed,
            num_clusters=args.clusters, member_min=args.member_min,
            member_max=args.member_max, radio=_radio_from_args(args),
            mu=args.mu, solver=args.solver, horizon_slots=args.horizon_slots,
        )
        rows = harness.run_sweep(spec)
        buf = io.StringIO()
        harness.sweep_to_csv(rows, buf)
        _write_out(buf.getvalue(), args.out)
        return 0

    if args.command == "baseline":
        scenario = _load(args.scenario)
        spec = harness.BaselineSpec(bs_height_m=args.bs_height,
                                    pathloss_exp_terrestrial=args.bs_exponent,
                                    placement=args.placement)
        result = harness.run_baseline_comparison(scenario, spec, mu=args.mu,
                                                 seed=args.seed)
        text = ("u_min,uav_avg_power_w,terrestrial_avg_power_w,reduction\n"
                f"{result.u_min},{result.uav_avg_power_w:.9g},"
                f"{result.terrestrial_avg_power_w:.9g},{result.reduction:.9g}\n")
        _write_out(text, args.out)
        return 0

    return 2  # unreachable


if __name__ == "__main__":
    sys.exit(main())

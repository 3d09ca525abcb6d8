"""Command-line front end: solve, export-lp, generate, bench, ga, compare."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import statistics
import sys
import time
from pathlib import Path
from typing import Sequence

from .ga import GaParams, evolve, write_history
from .generator import SCENARIOS, GeneratorConfig, generate
from .instance import (
    AllocationSolution,
    InstanceFormatError,
    ProblemInstance,
    dumps_instance,
    errors_only,
    load_instance,
    validate_instance,
)
from .lpformat import export_stages
from .milp import InfeasibleModelError, Priority, build_model
from .solver import SolveLimits, SolveReport, Status, solve
from .validation import validate_solution

log = logging.getLogger("asilalloc")

EXIT_OK, EXIT_USAGE, EXIT_TIMEOUT, EXIT_INFEASIBLE = 0, 1, 2, 3
TIME_LIMIT_ENV = "ASILALLOC_TIME_LIMIT"


class CliError(Exception):
    pass


def _default_time_limit() -> float | None:
    raw = os.environ.get(TIME_LIMIT_ENV)
    if not raw:
        return None
    try:
        return float(raw)
    except ValueError:
        raise CliError(f"{TIME_LIMIT_ENV}={raw!r} is not a number") from None


def _load(path: str) -> ProblemInstance:
    try:
        inst = load_instance(path)
    except FileNotFoundError:
        raise CliError(f"{path}: no such file") from None
    except IsADirectoryError:
        raise CliError(f"{path}: is a directory") from None
    except InstanceFormatError as exc:
        raise CliError(f"{path}: {exc}") from None
    errors = errors_only(validate_instance(inst))
    if errors:
        lines = "\n".join(f"  {d.entity}: {d.message} [{d.invariant}]" for d in errors)
        raise CliError(f"{path}: invalid instance\n{lines}")
    return inst


def _run_solve(inst: ProblemInstance, priority: Priority, time_limit: float | None,
               node_limit: int | None = None, strict_pmhf: bool = False,
               focus_app: str | None = None) -> SolveReport:
    try:
        model = build_model(inst, focus_app=focus_app, priority=priority, strict_pmhf=strict_pmhf)
    except InfeasibleModelError as exc:
        return SolveReport(Status.INFEASIBLE, message=str(exc))
    return solve(model, SolveLimits(time_limit=time_limit, node_limit=node_limit))


def schedule_table(solution: AllocationSolution, inst: ProblemInstance) -> str:
    rows = [("task", "ecu", "asil", "start", "finish")]
    for p in sorted(solution.placements, key=lambda p: (p.ecu, p.start_ms, p.task)):
        w = inst.task(p.task).wcet_ms[(p.ecu, p.asil)]
        rows.append((p.task, p.ecu, "QABCD"[p.asil], f"{p.start_ms:g}", f"{p.start_ms + w:g}"))
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)


def _headline(report: SolveReport, priority: Priority) -> str:
    cost, latency = report.cost, report.latency
    if priority is Priority.COST:
        return f"cost={cost:g} latency={latency:g}"
    return f"latency={latency:g} cost={cost:g}"


def cmd_solve(args: argparse.Namespace) -> int:
    inst = _load(args.instance)
    priority = Priority.parse(args.priority)
    limit = args.time_limit if args.time_limit is not None else _default_time_limit()
    report = _run_solve(inst, priority, limit, args.node_limit, args.strict_pmhf, args.focus_app)
    if report.solution is None:
        print(f"status={report.status.value}: {report.message}", file=sys.stderr)
        return EXIT_TIMEOUT if report.status is Status.TIMEOUT else EXIT_INFEASIBLE
    print(_headline(report, priority))
    print(schedule_table(report.solution, inst))
    print(f"status={report.status.value} nodes={report.nodes} time={report.wall_time:.3f}s")
    problems = validate_solution(inst, report.solution, strict_pmhf=args.strict_pmhf)
    for v in problems:
        print(f"violation: {v}", file=sys.stderr)
    if args.out:
        doc = report.solution.to_dict()
        doc["solver"] = {
            "status": report.status.value,
            "priority": priority.value,
            "objectives": dict(zip(report.objective_names, report.objective_values)),
            "nodes": report.nodes,
            "wall_time_s": round(report.wall_time, 6),
        }
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
    return EXIT_TIMEOUT if report.status is Status.TIMEOUT else EXIT_OK


def cmd_export_lp(args: argparse.Namespace) -> int:
    inst = _load(args.instance)
    try:
        model = build_model(inst, priority=args.priority, strict_pmhf=args.strict_pmhf)
    except InfeasibleModelError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    try:
        paths = export_stages(model, args.out_dir, Path(args.instance).stem)
    except OSError as exc:
        raise CliError(f"cannot write LP files: {exc}") from None
    for p in paths:
        print(p)
    return EXIT_OK


def _config(args: argparse.Namespace, scenario: str | None = None) -> GeneratorConfig:
    try:
        return GeneratorConfig(scenario=scenario or args.scenario, edge_probability=args.edge_prob,
                               binding_memory=args.binding_memory)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def cmd_generate(args: argparse.Namespace) -> int:
    if args.tasks < 1 or args.ecus < 1:
        raise CliError("--tasks and --ecus must be at least 1")
    text = dumps_instance(generate(args.tasks, args.ecus, args.seed, _config(args)))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def parse_range(text: str) -> range:
    try:
        lo, hi = (int(x) for x in text.split(".."))
    except ValueError:
        raise CliError(f"bad range {text!r}; expected A..B") from None
    if lo < 1 or hi < lo:
        raise CliError(f"empty task range {text!r}")
    return range(lo, hi + 1)


def cmd_bench(args: argparse.Namespace) -> int:
    sizes = parse_range(args.tasks_range)
    scenarios = args.scenario or list(SCENARIOS)
    limit = args.time_limit if args.time_limit is not None else _default_time_limit()
    priority = Priority.parse(args.priority)
    rows = []
    for scenario in scenarios:
        cfg = _config(args, scenario)
        for n in sizes:
            times, nodes, timeouts = [], [], 0
            for seed in range(args.seed, args.seed + args.seeds):
                inst = generate(n, args.ecus, seed, cfg)
                t0 = time.perf_counter()
                report = _run_solve(inst, priority, limit)
                times.append((time.perf_counter() - t0) * 1000.0)  # model build included
                nodes.append(report.nodes)
                timeouts += report.status is Status.TIMEOUT
            row = {"n_tasks": n, "scenario": scenario, "solve_ms": round(statistics.median(times), 3),
                   "nodes": statistics.median(nodes), "seeds": args.seeds, "timeouts": timeouts}
            rows.append(row)
            log.info("%s n=%d median %.1f ms", scenario, n, row["solve_ms"])
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _ga_params(args: argparse.Namespace) -> GaParams:
    try:
        return GaParams(population=args.population, generations=args.generations, tournament=args.tournament,
                        crossover=args.crossover, mutation=args.mutation, penalty=args.penalty, seed=args.seed,
                        enforce_memory=not args.no_memory, enforce_localization=not args.no_localization)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _evolve(inst: ProblemInstance, params: GaParams):
    try:
        return evolve(inst, params)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def cmd_ga(args: argparse.Namespace) -> int:
    inst = _load(args.instance)
    result = _evolve(inst, _ga_params(args))
    print(f"ga_best={result.best_fitness:g}")
    if args.out:
        write_history(result.history, args.out)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    inst = _load(args.instance)
    limit = args.time_limit if args.time_limit is not None else _default_time_limit()
    report = _run_solve(inst, Priority.COST, limit)
    result = _evolve(inst, _ga_params(args))
    if report.solution is None:
        print(f"ilp status={report.status.value}: {report.message}", file=sys.stderr)
        print(f"ga={result.best_fitness:g}")
        return EXIT_TIMEOUT if report.status is Status.TIMEOUT else EXIT_INFEASIBLE
    ilp = report.cost
    gap = (result.best_fitness - ilp) / ilp if ilp else 0.0
    print(f"ilp={ilp:g} ga={result.best_fitness:g} gap={gap:.4f}")
    return EXIT_TIMEOUT if report.status is Status.TIMEOUT else EXIT_OK


def _add_ga_flags(p: argparse.ArgumentParser) -> None:
    d = GaParams()
    p.add_argument("--population", type=int, default=d.population)
    p.add_argument("--generations", type=int, default=d.generations)
    p.add_argument("--tournament", type=int, default=d.tournament)
    p.add_argument("--crossover", type=float, default=d.crossover)
    p.add_argument("--mutation", type=float, default=d.mutation)
    p.add_argument("--penalty", type=float, default=None, help="default: 10 x sum of per-task maximum costs")
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--no-memory", action="store_true", help="do not penalize ECU memory overruns")
    p.add_argument("--no-localization", action="store_true", help="ignore localization restrictions")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="asilalloc", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    priorities = ["cost", "latency"]

    p = sub.add_parser("solve", help="optimal decomposition, allocation and schedule")
    p.add_argument("instance")
    p.add_argument("--priority", choices=priorities, default="cost")
    p.add_argument("--time-limit", type=float, default=None, help=f"seconds (default: ${TIME_LIMIT_ENV} or none)")
    p.add_argument("--node-limit", type=int, default=None)
    p.add_argument("--seed", type=int, default=0, help="accepted for reproducibility records; the search is deterministic")
    p.add_argument("--focus-app", default=None)
    p.add_argument("--strict-pmhf", action="store_true", help="apply the PMHF check to every task")
    p.add_argument("--out", help="write the solution as JSON")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("export-lp", help="write stage-1 and stage-2 LP files")
    p.add_argument("instance")
    p.add_argument("--priority", choices=priorities, default="cost")
    p.add_argument("--strict-pmhf", action="store_true")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_export_lp)

    def gen_flags(q: argparse.ArgumentParser) -> None:
        q.add_argument("--edge-prob", type=float, default=0.9)
        q.add_argument("--binding-memory", action="store_true")

    p = sub.add_parser("generate", help="random instance")
    p.add_argument("--tasks", type=int, required=True)
    p.add_argument("--ecus", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scenario", choices=list(SCENARIOS), default="no-decomp")
    p.add_argument("--out")
    gen_flags(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("bench", help="solve-time sweep over generated instances")
    p.add_argument("--tasks-range", required=True, help="A..B")
    p.add_argument("--scenario", choices=list(SCENARIOS), action="append",
                   help="repeatable; default: all scenarios")
    p.add_argument("--ecus", type=int, default=4)
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--priority", choices=priorities, default="cost")
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--out")
    gen_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("ga", help="run the genetic baseline")
    p.add_argument("instance")
    p.add_argument("--out", help="write the per-generation history CSV")
    _add_ga_flags(p)
    p.set_defaults(func=cmd_ga)

    p = sub.add_parser("compare", help="ILP cost optimum against the genetic baseline")
    p.add_argument("instance")
    p.add_argument("--time-limit", type=float, default=None)
    _add_ga_flags(p)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

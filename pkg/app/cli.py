"""
Command-line front end.

Usage:
    python -m app solve --instance ftv35.atsp --runs 200 --iters 4000 --target 1323
    python -m app exact --instance small.atsp [--lp-out model.lp]
    python -m app or --instance ftv35.atsp --parents parents.txt
    python -m app cuts --instance big.atsp --solution sol.txt --cuts cuts.json --lp-out model.lp

``solve`` writes summary.csv, dynamics.csv and runs/<seed>.csv under
``--out`` (default: <output_dir>/<instance name>).  Orders are printed with
1-based job numbers.

Exit codes: 0 success, 2 invalid arguments, 3 unreadable or invalid input,
4 solver limit refused, 1 anything else.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from pydantic import ValidationError

from app.config import settings
from app.reports.csv_store import build_report, good_threshold, load_targets, q_limit, write_batch
from app.scheduling.errors import (
    ContractViolation,
    RecombinationTooLarge,
    SolverLimitExceeded,
    TsplibParseError,
)
from app.scheduling.exact import (
    AssignmentSolution,
    SubtourCut,
    add_cuts_from_solution,
    emit_cut,
    find_subtours,
    held_karp_path,
    write_ilp,
)
from app.scheduling.genetic import GAConfig, Mutation, Replacement
from app.scheduling.instance import (
    Schedule,
    evaluate_cost,
    format_order,
    load_instance,
    parse_order,
)
from app.scheduling.recombination import solve_bruteforce, solve_gray
from app.workers.batch_runner import run_batch

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_LIMIT = 4


class UsageError(Exception):
    """Invalid combination of command-line parameters."""


# ── Commands ──────────────────────────────────────────────────────────────────


def cmd_solve(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance)
    try:
        cfg = GAConfig(
            population_size=args.pop,
            alpha=args.alpha,
            max_iterations=args.iters,
            mutation=args.mutation,
            mutation_probability=args.mutation_prob,
            rng_seed=args.seed,
            stats_period=args.stats_period,
            q_cap=args.q_cap,
            replacement=args.replacement,
        )
    except ValidationError as exc:
        raise UsageError(str(exc)) from exc
    if cfg.mutation is not Mutation.NONE and cfg.mutation_probability == 0:
        logger.warning("Mutation %s selected with probability 0", cfg.mutation.value)

    target = args.target
    if target is None and args.targets and Path(args.targets).exists():
        target = load_targets(args.targets).get(inst.name)
    if target is None:
        logger.warning("No target cost for %s; n_opt will be empty", inst.name)

    out_dir = Path(args.out) if args.out else Path(settings.output_dir) / inst.name
    records = run_batch(inst, cfg, args.runs, workers=args.workers)
    report = build_report(inst, cfg, records, target)
    write_batch(report, out_dir, with_timings=args.with_timings)

    row = report.summary_row(with_timings=True)
    print(f"instance: {inst.name} (k={inst.k})")
    print(f"q_limit: {q_limit(inst.k)}  (good if q <= {good_threshold(inst.k):.3f})")
    print(f"runs: {report.runs}  best: {row['best']}  mean: {row['mean_reached']:.2f}")
    if target is not None:
        print(f"target: {target}  n_opt: {row['n_opt']}  rate: {row['success_rate']:.3f}")
    t_opt = row["t_avg_to_opt"]
    print(f"t_avg: {row['t_avg']:.3f}s  t_avg_to_opt: {'n/a' if t_opt is None else f'{t_opt:.3f}s'}")
    best_run = min(records, key=lambda r: r.reached)
    print(f"best order: {format_order(best_run.best_order)}")
    print(f"output: {out_dir}")
    return EXIT_OK


def cmd_exact(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance)
    max_k = args.max_k
    if inst.k <= max_k:
        cost, order = held_karp_path(inst, max_k=max_k)
        print(f"instance: {inst.name} (k={inst.k})")
        print("method: held-karp")
        print(f"optimum: {cost}")
        print(f"order: {format_order(order)}")
        if args.lp_out:
            write_ilp(inst, [], Path(args.lp_out))
        return EXIT_OK

    lp_out = Path(args.lp_out) if args.lp_out else Path(settings.output_dir) / f"{inst.name}.lp"
    write_ilp(inst, [], lp_out)
    print(f"instance: {inst.name} (k={inst.k}) is above the Held-Karp limit {max_k}")
    print(f"model: {lp_out}")
    print("next: solve the model with a MILP solver, save the nonzero variables as")
    print("      'name value' lines, then run:")
    print(f"      python -m app cuts --instance {args.instance} --solution <file> "
          f"--cuts <cuts.json> --lp-out {lp_out}")
    return EXIT_OK


def cmd_or(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance)
    tokens = Path(args.parents).read_text().split()
    if len(tokens) != 2 * inst.k:
        raise ContractViolation(
            f"parent file must hold two permutations of {inst.k} jobs, found {len(tokens)} numbers"
        )
    p1 = Schedule.of(inst, parse_order(tokens[: inst.k], inst.k))
    p2 = Schedule.of(inst, parse_order(tokens[inst.k :], inst.k))

    result = solve_gray(inst, p1, p2, q_cap=args.q_cap)
    print(f"q: {result.q}")
    print(f"solutions: {result.solutions_enumerated}")
    print(f"special_edges: {result.special_edges}")
    print(f"parent_costs: {p1.cost} {p2.cost}")
    print(f"offspring: {format_order(result.offspring.order)}")
    print(f"cost: {result.offspring.cost}")
    if result.q <= settings.bruteforce_q_cap:
        oracle = solve_bruteforce(inst, p1, p2, q_cap=settings.bruteforce_q_cap)
        agrees = oracle.offspring.cost == result.offspring.cost
        print(f"oracle_check: {'pass' if agrees else 'FAIL'}")
        if not agrees:
            return EXIT_FAILURE
    else:
        print("oracle_check: skipped")
    return EXIT_OK


def cmd_cuts(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance)
    values = _read_solution(Path(args.solution))
    sol = AssignmentSolution.from_values(inst.k, values)
    cuts_path = Path(args.cuts) if args.cuts else None
    cuts = _read_cuts(cuts_path, inst.k) if cuts_path and cuts_path.exists() else []

    subtours = find_subtours(sol)
    if not subtours:
        order = sol.path()
        print("subtours: 0")
        print(f"path: {format_order(order)}")
        print(f"cost: {evaluate_cost(inst, order)}")
        return EXIT_OK

    cuts = add_cuts_from_solution(cuts, sol)
    for cycle in subtours:
        print(f"subtour: {format_order(cycle)}")
    if cuts_path:
        cuts_path.write_text(
            json.dumps([[v + 1 for v in c.vertices] for c in cuts], indent=1) + "\n"
        )
    lp_out = Path(args.lp_out) if args.lp_out else Path(settings.output_dir) / f"{inst.name}.lp"
    write_ilp(inst, cuts, lp_out)
    print(f"cuts: {len(cuts)}")
    return EXIT_OK


# ── Helpers ───────────────────────────────────────────────────────────────────


def _read_solution(path: Path) -> dict[str, float]:
    """``name value`` (or ``name = value``) lines; anything else is skipped."""
    values: dict[str, float] = {}
    for line in path.read_text().splitlines():
        words = line.replace("=", " ").split()
        if len(words) < 2:
            continue
        try:
            values[words[0]] = float(words[1])
        except ValueError:
            continue
    return values


def _read_cuts(path: Path, k: int) -> list[SubtourCut]:
    """Cuts saved by an earlier round, as 1-based vertex lists."""
    raw = json.loads(path.read_text())
    return [emit_cut([v - 1 for v in c], k) for c in raw]


# ── Entry point ───────────────────────────────────────────────────────────────


def _float_arg(text: str) -> float:
    return float("inf") if text.lower() in ("inf", "infinity") else float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m app", description=__doc__.split("\n\n")[0])
    parser.add_argument("--log-level", default=settings.log_level)
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run a seeded batch of GA runs")
    solve.add_argument("--instance", required=True)
    solve.add_argument("--runs", type=int, default=1)
    solve.add_argument("--iters", type=int, default=settings.iterations)
    solve.add_argument("--pop", type=int, default=settings.population_size)
    solve.add_argument("--alpha", type=_float_arg, default=settings.replacement_alpha)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--stats-period", type=int, default=settings.stats_period)
    solve.add_argument("--target", type=_float_arg, default=None)
    solve.add_argument("--targets", default=settings.targets_file)
    solve.add_argument("--mutation", choices=[m.value for m in Mutation], default="none")
    solve.add_argument("--mutation-prob", type=float, default=0.0)
    solve.add_argument(
        "--replacement", choices=[r.value for r in Replacement], default="probabilistic"
    )
    solve.add_argument("--q-cap", type=int, default=settings.q_cap)
    solve.add_argument("--workers", type=int, default=None)
    solve.add_argument("--out", default=None)
    solve.add_argument("--with-timings", action="store_true")
    solve.set_defaults(handler=cmd_solve)

    exact = sub.add_parser("exact", help="Held-Karp optimum or LP model export")
    exact.add_argument("--instance", required=True)
    exact.add_argument("--lp-out", default=None)
    exact.add_argument("--max-k", type=int, default=settings.held_karp_max_k)
    exact.set_defaults(handler=cmd_exact)

    recombine = sub.add_parser("or", help="optimal recombination of two parents")
    recombine.add_argument("--instance", required=True)
    recombine.add_argument("--parents", required=True)
    recombine.add_argument("--q-cap", type=int, default=settings.q_cap)
    recombine.set_defaults(handler=cmd_or)

    cuts = sub.add_parser("cuts", help="one cutting-plane round from a solver solution")
    cuts.add_argument("--instance", required=True)
    cuts.add_argument("--solution", required=True)
    cuts.add_argument("--cuts", default=None)
    cuts.add_argument("--lp-out", default=None)
    cuts.set_defaults(handler=cmd_cuts)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=args.log_level.upper(),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    )
    if getattr(args, "target", None) is not None and float(args.target).is_integer():
        args.target = int(args.target)

    try:
        if getattr(args, "runs", 1) < 1:
            raise UsageError("--runs must be positive")
        return args.handler(args)
    except UsageError as exc:
        logger.error("Invalid parameters: %s", exc)
        return EXIT_USAGE
    except (OSError, TsplibParseError, ContractViolation, json.JSONDecodeError) as exc:
        logger.error("Input error: %s", exc)
        return EXIT_INPUT
    except (RecombinationTooLarge, SolverLimitExceeded) as exc:
        logger.error("Solver limit: %s", exc)
        return EXIT_LIMIT
    except Exception as exc:
        logger.error("Unexpected failure: %s", exc, exc_info=True)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())

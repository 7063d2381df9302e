"""Command line: ``failprove prove|oracle|bench``.

Exit status: 0 failure proven (or, for ``oracle``, a failing
pre-interpretation exists), 1 exhausted / no failure, 2 budget exceeded,
64 usage error.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .corpus import FACTS, NAMES, UnknownProblemError, load_corpus
from .engine import POLICIES, Evaluator, format_tables
from .oracle import EnumerationCapExceeded, exhaustive_verdict
from .preinterp import CellIndex
from .search import (
    BUDGET_EXCEEDED,
    CANONICAL_ORDER,
    DEFAULT_BUDGET,
    EXHAUSTED,
    FAILURE_PROVEN,
    INSERTIONS,
    SINGLE_CS,
    STRATEGIES,
    ProofRun,
    SearchConfig,
    cell_count,
    outcome_record,
    prove,
)
from .syntax import Program, ProgramError, parse_program
from .transform import FA_MODES, compile_program, instrument

EXIT_PROVEN = 0
EXIT_NO_FAILURE = 1
EXIT_BUDGET = 2
EXIT_USAGE = 64

VERDICT_EXIT = {FAILURE_PROVEN: EXIT_PROVEN, EXHAUSTED: EXIT_NO_FAILURE, BUDGET_EXCEEDED: EXIT_BUDGET}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def load_problem(ref: str) -> tuple[str, Program]:
    """A corpus name or a path to a program file."""
    if ref in FACTS:
        return ref, load_corpus(ref).program
    path = Path(ref)
    if path.is_file():
        return path.stem, parse_program(path.read_text())
    raise UsageError(f"{ref!r} is neither a corpus problem ({', '.join(NAMES)}) nor a file")


def _config(args, m: int | None = None, seed: int | None = None) -> SearchConfig:
    return SearchConfig(
        strategy=args.strategy,
        m=m if m is not None else args.domain_size,
        max_m=getattr(args, "max_domain_size", None),
        seed=seed if seed is not None else args.seed,
        budget=args.budget,
        fa=args.fa,
        policy=args.policy,
        insertion=args.insertion,
    )


def _run_records(name: str, program: Program, cfg: SearchConfig, run: ProofRun) -> list[dict]:
    return [outcome_record(name, cfg, o, cell_count(program, o.m)) for o in run.outcomes]


def cmd_prove(args) -> int:
    name, program = load_problem(args.problem)
    cfg = _config(args)
    if args.max_domain_size is not None and args.max_domain_size < cfg.m:
        raise UsageError("--max-domain-size is smaller than --domain-size")
    flat = compile_program(program)
    if args.dump_flat:
        print(flat.dump(), end="")
    if args.dump_instrumented:
        print(instrument(flat, cfg.fa).listing(), end="")
    run = prove(program, cfg)
    final = run.final
    records = _run_records(name, program, cfg, run)
    if args.format == "json":
        print(json.dumps(records[-1] if len(records) == 1 else records, indent=2, sort_keys=True))
    else:
        for o, rec in zip(run.outcomes, records):
            print(f"{name}: m={o.m} cells={rec['cells']} {o.verdict} after {o.stats.backtracks} backtracks"
                  f" ({o.stats.seconds:.2f}s)")
        if final.model is not None:
            print("model:")
            print(final.model.dump())
    if args.trace_tables:
        if final.model is None:
            print("no failing pre-interpretation, no tables to show", file=sys.stderr)
        else:
            ip = instrument(flat, cfg.fa)
            ev = Evaluator(ip, CellIndex(ip.signature, final.m))
            print(format_tables(ev.tables(final.model, cfg.policy), final.model.index))
    return VERDICT_EXIT[final.verdict]


def cmd_oracle(args) -> int:
    name, program = load_problem(args.problem)
    try:
        report = exhaustive_verdict(program, args.domain_size, args.cap)
    except EnumerationCapExceeded as e:
        raise UsageError(str(e)) from e
    out = {"problem": name, "m": args.domain_size, **report.as_dict()}
    print(json.dumps(out, indent=2, sort_keys=True))
    return EXIT_PROVEN if report.failing else EXIT_NO_FAILURE


def _bench_one(task):
    name, cfg = task
    program = load_corpus(name).program
    run = prove(program, cfg)
    return outcome_record(name, cfg, run.final, cell_count(program, run.final.m))


def aggregate(records: list[dict]) -> dict:
    """Per-problem backtrack statistics, recomputable from the records."""
    by_problem: dict[str, list[dict]] = {}
    for r in records:
        by_problem.setdefault(r["problem"], []).append(r)
    out = {}
    for name, rs in by_problem.items():
        bt = [r["backtracks"] for r in rs]
        out[name] = {
            "runs": len(rs),
            "proven": sum(r["verdict"] == FAILURE_PROVEN for r in rs),
            "mean_backtracks": round(statistics.mean(bt), 2),
            "median_backtracks": statistics.median(bt),
            "min_backtracks": min(bt),
            "max_backtracks": max(bt),
        }
    return out


def run_bench(names: list[str], seeds: int, args) -> dict:
    tasks = []
    for name in names:
        facts = FACTS[name]
        m = args.domain_size or (facts.m if facts else 2)
        for seed in range(seeds):
            tasks.append((name, _config(args, m=m, seed=seed)))
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            records = list(pool.map(_bench_one, tasks))
    else:
        records = [_bench_one(t) for t in tasks]
    return {
        "strategy": args.strategy,
        "seeds": list(range(seeds)),
        "budget": args.budget,
        "records": records,
        "aggregate": aggregate(records),
    }


def cmd_bench(args) -> int:
    if args.all:
        names = list(NAMES)
    else:
        for p in args.problem:
            if p not in FACTS:
                raise UsageError(f"unknown problem {p!r}")
        names = args.problem
    report = run_bench(names, args.seeds, args)
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_PROVEN


def _search_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--strategy", choices=STRATEGIES, default=SINGLE_CS)
    p.add_argument("--fa", choices=FA_MODES, help="failure analysis (default: from strategy)")
    p.add_argument("--policy", choices=POLICIES, help="check_return policy (default: from strategy)")
    p.add_argument("--insertion", choices=sorted(INSERTIONS), default=CANONICAL_ORDER,
                   help="order of cells newly moved into the ordered set")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="maximum number of backtracks")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="failprove", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("prove", help="search for a pre-interpretation under which the query fails")
    p.add_argument("problem", help="corpus problem name or program file")
    p.add_argument("--domain-size", "-m", type=int, required=True)
    p.add_argument("--max-domain-size", type=int)
    p.add_argument("--seed", type=int, default=0)
    _search_options(p)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--dump-flat", action="store_true", help="print the function-free program first")
    p.add_argument("--dump-instrumented", action="store_true", help="print the instrumented program first")
    p.add_argument("--trace-tables", action="store_true", help="print the final answer tables")
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("oracle", help="count failing pre-interpretations by brute force")
    p.add_argument("problem")
    p.add_argument("--domain-size", "-m", type=int, required=True)
    p.add_argument("--cap", type=int, default=10**6, help="refuse to enumerate more assignments")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="run corpus problems over several seeds")
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--all", action="store_true")
    which.add_argument("--problem", action="append", help="may be repeated")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--domain-size", "-m", type=int, help="default: the problem's reference size")
    p.add_argument("--jobs", type=int, default=1)
    _search_options(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for flag in ("domain_size", "max_domain_size", "seeds", "jobs", "budget", "cap"):
        v = getattr(args, flag, None)
        if v is not None and v < 1:
            parser.error(f"--{flag.replace('_', '-')} must be positive")
    try:
        return args.func(args)
    except (UsageError, UnknownProblemError, ProgramError, OSError) as e:
        print(f"failprove: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

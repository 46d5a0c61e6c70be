"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 precondition violation (for
example a τ-cycle), 3 I/O error, 4 partitions differ (compare).
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field

from .actions import ActionPartition, NotWellFounded, check_wellfounded
from .distributed import MsgKind, OwnerMaps, Schedule, run_distributed_reduce
from .lts import BRANCHING, STRONG, TAU, LtsError, Partition, parse_partition, quotient, read_aut, save_aut, write_partition
from .oracle import OracleLimitExceeded, coarsest_branching_bisimulation, coarsest_strong_bisimulation
from .refine import Method, reduce
from .scc import eliminate_tau_sccs, tau_sccs

EXIT_OK, EXIT_USAGE, EXIT_PRECONDITION, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass
class RunConfig:
    input: str
    output: str | None = None
    partition: str | None = None
    equivalence: str = BRANCHING
    method: str = "inductive"
    engine: str = "sequential"
    workers: int = 1
    schedule: str = "waves"
    seed: int = 0
    owner: str = "modulo"
    greater: list[str] = field(default_factory=list)
    scc: bool = False
    stats: str | None = None
    stats_json: str | None = None

    def validate(self) -> None:
        if self.engine == "distributed" and (self.equivalence, self.method) != (BRANCHING, "inductive"):
            raise UsageError("the distributed engine supports --equivalence branching --method inductive only")
        if self.greater and (self.equivalence, self.method) != (STRONG, "inductive"):
            raise UsageError("--greater applies to --equivalence strong --method inductive only")
        if (self.equivalence, self.method) == (STRONG, "inductive") and not self.greater:
            raise UsageError("strong inductive reduction needs --greater LABEL[,LABEL...]")
        if self.workers < 1:
            raise UsageError("--workers must be at least 1")
        if self.engine == "sequential" and (self.workers != 1 or self.schedule != "waves" or self.owner != "modulo"):
            raise UsageError("--workers, --schedule and --owner need --engine distributed")

    @property
    def refine_method(self) -> Method:
        return {
            (STRONG, "classic"): Method.STRONG_CLASSIC,
            (BRANCHING, "classic"): Method.BRANCHING_CLASSIC,
            (STRONG, "inductive"): Method.STRONG_INDUCTIVE,
            (BRANCHING, "inductive"): Method.BRANCHING_INDUCTIVE,
        }[(self.equivalence, self.method)]


def format_stats(pairs: list[tuple[str, object]]) -> str:
    return "".join(f"{k} {v}\n" for k, v in pairs)


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def cmd_reduce(cfg: RunConfig) -> int:
    cfg.validate()
    lts = read_aut(cfg.input)
    original = lts
    scc_map = None
    if cfg.scc:
        lts, scc_map = eliminate_tau_sccs(lts)

    ap = None
    if cfg.method == "inductive":
        if cfg.equivalence == BRANCHING:
            ap = ActionPartition.branching_default(lts.alphabet | {TAU})
        else:
            ap = ActionPartition.with_greater(lts.alphabet | set(cfg.greater), cfg.greater)
        witness = check_wellfounded(lts, ap)
        if witness is not None:
            what = "tau cycle" if cfg.equivalence == BRANCHING else "cycle over --greater actions"
            print(f"error: {what}: {' '.join(map(str, witness))}", file=sys.stderr)
            if cfg.equivalence == BRANCHING:
                print("hint: rerun with --scc to collapse tau cycles first", file=sys.stderr)
            return EXIT_PRECONDITION

    pairs: list[tuple[str, object]] = [
        ("states", original.state_count),
        ("transitions", len(original.transitions)),
    ]
    if scc_map is not None:
        pairs += [("scc_states", lts.state_count), ("scc_transitions", len(lts.transitions))]

    started = time.perf_counter()
    if cfg.engine == "distributed":
        owners = OwnerMaps.named(cfg.owner, cfg.workers)
        part, estats = run_distributed_reduce(
            lts, ap, cfg.workers, owners, Schedule(cfg.schedule), cfg.seed
        )
        pairs += [("iterations", estats.iterations), ("splitting_rounds", estats.splitting_rounds)]
        pairs += [(f"blocks_round_{k}", r.block_count) for k, r in enumerate(estats.rounds, 1)]
        totals = estats.total_messages()
        pairs += [(f"msgs_{kind.value}", totals[kind]) for kind in MsgKind]
        pairs += [
            ("waves", sum(r.waves for r in estats.rounds)),
            ("steps", sum(r.steps for r in estats.rounds)),
            ("max_in_flight", max(r.max_in_flight for r in estats.rounds)),
            ("duplicated_edges", estats.duplicated_edges),
            ("workers", cfg.workers),
        ]
    else:
        part, rstats = reduce(lts, cfg.refine_method, ap)
        pairs += [("iterations", rstats.iterations), ("splitting_rounds", rstats.splitting_rounds)]
        pairs += [(f"blocks_round_{k}", c) for k, c in enumerate(rstats.block_counts, 1)]
    elapsed = time.perf_counter() - started

    semantics = BRANCHING if cfg.equivalence == BRANCHING else STRONG
    reduced = quotient(lts, part, semantics)
    pairs += [
        ("blocks", part.block_count),
        ("reduced_states", reduced.state_count),
        ("reduced_transitions", len(reduced.transitions)),
    ]

    if cfg.output:
        save_aut(reduced, cfg.output)
    if cfg.partition:
        full = part
        if scc_map is not None:
            full = Partition(part[r] for r in scc_map.representative)
        _write_text(cfg.partition, write_partition(full.canonical()))
    text = format_stats(pairs)
    if cfg.stats:
        _write_text(cfg.stats, text)
    if cfg.stats_json:
        _write_text(cfg.stats_json, json.dumps(dict(pairs), indent=2, sort_keys=True) + "\n")
    sys.stdout.write(text)
    sys.stdout.write(f"wall_time {elapsed:.6f}\n")
    return EXIT_OK


def cmd_scc_elim(args) -> int:
    lts = read_aut(args.input)
    out, scc_map = eliminate_tau_sccs(lts)
    save_aut(out, args.output)
    if args.map:
        _write_text(args.map, "".join(f"{r}\n" for r in scc_map.representative))
    sys.stdout.write(format_stats([
        ("states", lts.state_count),
        ("components", scc_map.component_count),
        ("transitions", len(out.transitions)),
    ]))
    return EXIT_OK


def cmd_oracle(args) -> int:
    lts = read_aut(args.input)
    fn = coarsest_branching_bisimulation if args.equivalence == BRANCHING else coarsest_strong_bisimulation
    try:
        part = fn(lts, limit=args.limit)
    except OracleLimitExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    if args.partition:
        _write_text(args.partition, write_partition(part))
    sys.stdout.write(format_stats([("states", lts.state_count), ("blocks", part.block_count)]))
    return EXIT_OK


def cmd_compare(args) -> int:
    a = parse_partition(_read_text(args.a))
    b = parse_partition(_read_text(args.b))
    for aut, part, name in ((args.aut_a, a, "first"), (args.aut_b, b, "second")):
        if aut is not None and read_aut(aut).state_count != len(part):
            print(f"error: {name} partition does not match its LTS", file=sys.stderr)
            return EXIT_PRECONDITION
    if len(a) != len(b):
        print(f"error: state counts differ ({len(a)} vs {len(b)})", file=sys.stderr)
        return EXIT_PRECONDITION
    pair = a.distinguishing_pair(b)
    if pair is None:
        print("equal")
        return EXIT_OK
    print(f"different {pair[0]} {pair[1]}")
    return 4


def cmd_stats(args) -> int:
    lts = read_aut(args.input)
    comp = tau_sccs(lts)
    ncomp = len(set(comp))
    pairs: list[tuple[str, object]] = [
        ("states", lts.state_count),
        ("transitions", len(lts.transitions)),
        ("labels", len(lts.alphabet)),
        ("tau_transitions", sum(1 for _, a, _ in lts.transitions if a == TAU)),
        ("tau_components", ncomp),
        ("tau_cycle_free", int(ncomp == lts.state_count and not any(s == t for s, a, t in lts.transitions if a == TAU))),
    ]
    sys.stdout.write(format_stats(pairs))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sigref", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("reduce", help="minimize an AUT file")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="write the quotient LTS here")
    p.add_argument("--partition", help="write a 'state block' sidecar here")
    p.add_argument("--equivalence", choices=[STRONG, BRANCHING], default=BRANCHING)
    p.add_argument("--method", choices=["classic", "inductive"], default="inductive")
    p.add_argument("--engine", choices=["sequential", "distributed"], default="sequential")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--schedule", choices=["waves", "random"], default="waves")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--owner", choices=["modulo", "hash"], default="modulo")
    p.add_argument("--greater", default="", help="comma-separated A_> labels (strong inductive)")
    p.add_argument("--scc", action="store_true", help="collapse tau cycles first")
    p.add_argument("--stats", help="write key/value statistics here")
    p.add_argument("--stats-json", help="write statistics as JSON here")

    p = sub.add_parser("scc-elim", help="collapse tau strongly connected components")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--map", help="write the original-to-output state map here")

    p = sub.add_parser("oracle", help="brute-force coarsest bisimulation")
    p.add_argument("input")
    p.add_argument("--equivalence", choices=[STRONG, BRANCHING], default=BRANCHING)
    p.add_argument("--partition")
    p.add_argument("--limit", type=int, default=2000)

    p = sub.add_parser("compare", help="compare two partition sidecars up to renaming")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--aut-a")
    p.add_argument("--aut-b")

    p = sub.add_parser("stats", help="print size and tau-structure statistics")
    p.add_argument("input")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "reduce":
            cfg = RunConfig(
                input=args.input, output=args.output, partition=args.partition,
                equivalence=args.equivalence, method=args.method, engine=args.engine,
                workers=args.workers, schedule=args.schedule, seed=args.seed, owner=args.owner,
                greater=[g for g in args.greater.split(",") if g], scc=args.scc,
                stats=args.stats, stats_json=args.stats_json,
            )
            return cmd_reduce(cfg)
        handler = {
            "scc-elim": cmd_scc_elim,
            "oracle": cmd_oracle,
            "compare": cmd_compare,
            "stats": cmd_stats,
        }[args.command]
        return handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NotWellFounded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except LtsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 success or solved, 1 usage or I/O error, 2 validation or
verification failure, 3 infeasible, 4 gave up.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, field

from . import bench
from .explicit import simulate_distributed, verify_solution
from .fixer import STRATEGIES, synthesize
from .model import (
    ModelError,
    check_deployable,
    close_priorities,
    format_pairs,
    parse_pairs,
    parse_system,
)

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_GAVE_UP = 0, 1, 2, 3, 4
_VERDICT_EXIT = {"solved": EXIT_OK, "infeasible": EXIT_INFEASIBLE, "gave_up": EXIT_GAVE_UP}


@dataclass
class RunReport:
    command: str
    input_digest: str
    verdict: str
    priorities: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    reason: str = ""
    counterexample: list | None = None
    trace: list = field(default_factory=list)

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


class _Fail(Exception):
    def __init__(self, code, message):
        self.code = code
        super().__init__(message)


def _read(path):
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as err:
        raise _Fail(EXIT_IO, f"cannot read {path}: {err.strerror}") from None


def _load(path):
    raw = _read(path)
    try:
        system, com = parse_system(raw.decode("utf-8"))
    except (ModelError, UnicodeDecodeError) as err:
        raise _Fail(EXIT_IO, f"{path}: {err}") from None
    return system, com, hashlib.sha256(raw).hexdigest()


def _load_pairs(path, system):
    try:
        pairs = parse_pairs(_read(path).decode("utf-8"))
    except (ModelError, UnicodeDecodeError) as err:
        raise _Fail(EXIT_IO, f"{path}: {err}") from None
    for pair in pairs:
        for s in pair:
            if s not in system.index:
                raise _Fail(EXIT_IO, f"{path}: unknown interaction {s!r}")
    return pairs


def _write_report(path, report):
    if path is None:
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(report.to_json() + "\n")
    except OSError as err:
        raise _Fail(EXIT_IO, f"cannot write {path}: {err.strerror}") from None


def cmd_validate(args, out):
    system, com, _ = _load(args.path)
    violations = check_deployable(system, com)
    for v in violations:
        print(f"violation: {v}", file=out)
    if violations:
        return EXIT_INVALID
    print(f"ok: {len(system.components)} components, {len(system.alphabet)} interactions, "
          f"{len(close_priorities(system.priorities))} priorities (closed)", file=out)
    return EXIT_OK


def cmd_synthesize(args, out):
    system, com, digest = _load(args.path)
    violations = check_deployable(system, com)
    if violations:
        for v in violations:
            print(f"violation: {v}", file=out)
        return EXIT_INVALID
    start = time.perf_counter()
    result = synthesize(system, com, over_approx=args.over_approx, strategy=args.strategy,
                        max_iter=args.max_iter)
    wall = time.perf_counter() - start
    stats = {
        "components": result.components,
        "interactions": result.interactions,
        "iterations": result.iterations,
        "added": len(result.priorities),
        "wall_time": wall,
        "timings": result.timings,
    }
    if result.verdict == "gave_up" and result.core:
        stats["last_core"] = [list(p) for p in system.sort_pairs(result.core)]
    report = RunReport("synthesize", digest, result.verdict,
                       [list(p) for p in system.sort_pairs(result.priorities)],
                       stats, result.reason, None, result.trace)
    _write_report(args.report, report)
    if result.verdict == "solved":
        out.write(format_pairs(result.priorities, system))
    else:
        print(f"{result.verdict}: {result.reason}", file=out)
    return _VERDICT_EXIT.get(result.verdict, EXIT_INVALID)


def cmd_verify(args, out):
    system, com, _ = _load(args.path)
    added = _load_pairs(args.priorities, system)
    bad = verify_solution(system, com, added)
    if bad is None:
        print("ok: all conditions hold", file=out)
        return EXIT_OK
    print(f"condition {bad.condition} violated: {bad.message}", file=out)
    if bad.counterexample is not None:
        print(bad.counterexample.format(system), file=out)
    return EXIT_INVALID


def cmd_simulate(args, out):
    system, com, _ = _load(args.path)
    if args.priorities:
        added = _load_pairs(args.priorities, system)
        try:
            system = system.with_priorities(close_priorities(set(system.priorities) | set(added)))
        except ModelError as err:
            raise _Fail(EXIT_INVALID, str(err)) from None
    sim = simulate_distributed(system, com, args.seed, args.steps)
    if sim.run.steps:
        print(sim.run.format(system), file=out)
    print(f"verdict: {sim.verdict}", file=out)
    return EXIT_OK


def cmd_bench(args, out):
    if args.name == "fig1":
        doc = bench.fig1_doc()
    elif args.name == "philosophers":
        try:
            doc = bench.philosophers_doc(args.n, args.dir)
        except ValueError as err:
            raise _Fail(EXIT_IO, str(err)) from None
    else:
        doc = bench.random_doc(args.seed)
    text = json.dumps(doc, indent=2) + "\n"
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as err:
            raise _Fail(EXIT_IO, f"cannot write {args.output}: {err.strerror}") from None
    else:
        out.write(text)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="dpsyn", description="Distributed priority synthesis.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check a model and its architecture")
    s.add_argument("path")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("synthesize", help="synthesize deployable priorities")
    s.add_argument("path")
    s.add_argument("--over-approx", action="store_true",
                   help="condemn every boundary source, not only those without escape")
    s.add_argument("--strategy", choices=STRATEGIES, default="rp1")
    s.add_argument("--max-iter", type=int, default=32)
    s.add_argument("--report", help="write a JSON run report here")
    s.set_defaults(func=cmd_synthesize)

    s = sub.add_parser("verify", help="check a priority set against a model")
    s.add_argument("path")
    s.add_argument("priorities", help="file with 'low < high' lines or a JSON list of pairs")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("simulate", help="seeded random distributed run")
    s.add_argument("path")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--steps", type=int, default=100)
    s.add_argument("--priorities", help="extra priorities to apply")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("bench", help="emit a generated model")
    s.add_argument("name", choices=("fig1", "philosophers", "random"))
    s.add_argument("--n", type=int, default=5)
    s.add_argument("--dir", choices=bench.DIRECTIONS, default="ccw")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_IO
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "max_iter", 0) < 0 or getattr(args, "steps", 0) < 0:
        print("error: counts must be nonnegative", file=sys.stderr)
        return EXIT_IO
    try:
        return args.func(args, out)
    except _Fail as err:
        print(f"error: {err}", file=sys.stderr)
        return err.code


if __name__ == "__main__":
    sys.exit(main())

"""Priority fixing: candidates from boundary moves, SAT conflict resolution,
and the outer diagnose-and-fix loop guided by unsatisfiable cores.
"""
from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field

from .attractor import check_feasible, nested_risk_attractor
from .explicit import verify_solution
from .game import encode
from .model import CycleError, close_priorities, check_deployable, compute_visibility
from .satcore import Cnf, Sat, solve
from .stateset import primed

logger = logging.getLogger(__name__)

STRATEGIES = ("rp1", "rp2")


class NotDeployable(ValueError):
    def __init__(self, violations):
        self.violations = violations
        super().__init__("architecture is not deployable: " + "; ".join(map(str, violations)))


@dataclass(frozen=True)
class FixCandidate:
    chosen: str
    escapes: frozenset

    def pairs(self):
        return [(self.chosen, e) for e in self.escapes]


def extract_candidates(boundary, enc):
    """One candidate per distinct (chosen interaction, visible enabled others)."""
    system = enc.system
    choice_p = [primed(v) for v in enc.choice_bits]
    bit_p = {s: primed(v) for s, v in enc.inter_bits.items()}
    out = set()
    for a in boundary.enumerate(choice_p + list(bit_p.values())):
        code = sum(1 << b for b, v in enumerate(choice_p) if a[v])
        chosen = system.alphabet[code]
        escapes = frozenset(s for s, v in bit_p.items() if a[v] and s != chosen)
        if escapes:
            out.add(FixCandidate(chosen, escapes))
        else:
            logger.warning("boundary move choosing %s without visible escape", chosen)
    idx = system.index
    return sorted(out, key=lambda c: (idx[c.chosen], sorted(idx[e] for e in c.escapes)))


@dataclass
class ConstraintSystem:
    cnf: Cnf
    var_of: dict  # (low, high) -> var
    selectors: dict  # selector var -> FixCandidate
    existing: frozenset
    universe: tuple

    def pair_of(self, var):
        for pair, v in self.var_of.items():
            if v == var:
                return pair
        raise KeyError(var)


def build_constraints(cands, existing, vis):
    """CNF over priority propositions for the candidates and existing priorities.

    Candidate clauses are guarded by selector literals and existing priorities
    are posed as assumptions, so a failed solve names the responsible ones.
    Transitivity clauses whose premise is already ruled out by the
    architecture are left out; they are satisfied by the unit clauses.
    """
    system = vis.system
    used = set()
    for c in cands:
        used.add(c.chosen)
        used.update(c.escapes)
    for low, high in existing:
        used.update((low, high))
    universe = tuple(s for s in system.alphabet if s in used)
    cnf = Cnf(0)
    var_of = {}
    for x in universe:
        for y in universe:
            var_of[x, y] = cnf.new_var()

    def ok(low, high):
        return low != high and vis(high, low)

    selectors = {}
    for c in cands:
        sel = cnf.new_var()
        selectors[sel] = c
        cnf.add(-sel, *[var_of[p] for p in sorted(c.pairs(), key=lambda p: system.index[p[1]])])
        cnf.assumptions.append(sel)
    for pair in system.sort_pairs(existing):
        cnf.assumptions.append(var_of[pair])
    for x in universe:
        cnf.add(-var_of[x, x])
    for s1 in universe:
        for s2 in universe:
            if not ok(s1, s2):
                continue
            for s3 in universe:
                if ok(s2, s3):
                    cnf.add(-var_of[s1, s2], -var_of[s2, s3], var_of[s1, s3])
    for s1 in universe:
        for s2 in universe:
            if s1 != s2 and not vis(s2, s1):
                cnf.add(-var_of[s1, s2])
                for s3 in universe:
                    if s3 not in (s1, s2) and vis(s3, s1) and vis(s2, s3):
                        cnf.add(-var_of[s1, s3], -var_of[s3, s2])
    return ConstraintSystem(cnf, var_of, selectors, frozenset(existing), universe)


@dataclass
class Resolution:
    added: frozenset | None  # new priorities on success
    core: frozenset | None  # conflicting priority pairs on failure

    @property
    def ok(self):
        return self.added is not None


def resolve(cs):
    result = solve(cs.cnf)
    if isinstance(result, Sat):
        chosen = {p for p, v in cs.var_of.items() if result.model[v] and p[0] != p[1]}
        return Resolution(frozenset(chosen - cs.existing), None)
    core = set()
    for lit in result.core:
        if lit in cs.selectors:
            core.update(cs.selectors[lit].pairs())
        else:
            core.add(cs.pair_of(lit))
    return Resolution(None, frozenset(core))


def _consistent(pairs, vis):
    try:
        closed = close_priorities(pairs)
    except CycleError:
        return False
    return all(vis(h, l) for l, h in closed)


def _local(system, pair):
    low, high = pair
    return bool(set(system.participants[low]) & set(system.participants[high]))


def refinement_options(core, vis, existing=frozenset(), strategy="rp1"):
    """Priority sets to assert next, best first.

    rp1 asserts a single pair, preferring pairs whose reverse is also in the
    core (the two directions cannot both hold).  rp2 first tries a maximal
    set of pairs sharing a component that stays acyclic and supported, then
    falls back to single pairs.
    """
    if not core:
        raise ValueError("refinement needs a nonempty core")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    system = vis.system
    pairs = [p for p in system.sort_pairs(core) if p not in existing]
    two_way = [p for p in pairs if (p[1], p[0]) in core]
    singles = [p for p in two_way + [p for p in pairs if p not in two_way]
               if _consistent(set(existing) | {p}, vis)]
    options = [frozenset([p]) for p in singles]
    if strategy == "rp2":
        chosen = set()
        for p in pairs:
            if _local(system, p) and _consistent(set(existing) | chosen | {p}, vis):
                chosen.add(p)
        if chosen:
            options = [frozenset(chosen)] + [o for o in options if o != frozenset(chosen)]
    return options


def core_guided_refine(core, vis, existing=frozenset(), strategy="rp1"):
    options = refinement_options(core, vis, existing, strategy)
    if not options:
        return frozenset()
    return options[0]


# ---------------------------------------------------------------------------
# outer loop


@dataclass
class SynthesisResult:
    verdict: str  # solved | infeasible | gave_up | error
    priorities: frozenset = frozenset()
    reason: str = ""
    core: frozenset = frozenset()
    iterations: int = 0
    trace: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    components: int = 0
    interactions: int = 0

    @property
    def solved(self):
        return self.verdict == "solved"

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "priorities": sorted(list(p) for p in self.priorities),
            "reason": self.reason,
            "core": sorted(list(p) for p in self.core),
            "iterations": self.iterations,
            "trace": self.trace,
            "timings": self.timings,
            "components": self.components,
            "interactions": self.interactions,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            verdict=d["verdict"],
            priorities=frozenset(tuple(p) for p in d["priorities"]),
            reason=d["reason"],
            core=frozenset(tuple(p) for p in d["core"]),
            iterations=d["iterations"],
            trace=d["trace"],
            timings=d["timings"],
            components=d["components"],
            interactions=d["interactions"],
        )

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def synthesize(system, com, over_approx=False, strategy="rp1", max_iter=32,
               component_order=None, verify_limit=200_000):
    """Search for deployable priorities making ``system`` safe under ``com``.

    Each iteration encodes the game with the original and currently asserted
    priorities, computes the nested risk attractor, and either stops
    (initial state inside: infeasible when nothing is asserted, otherwise
    backtrack) or resolves the fix candidates with SAT.  An unsatisfiable
    resolution asserts priorities taken from the core and continues.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    violations = check_deployable(system, com)
    if violations:
        raise NotDeployable(violations)
    vis = compute_visibility(system, com)
    base = system.closed_priorities
    timings = {"encode": 0.0, "attractor": 0.0, "sat": 0.0, "verify": 0.0}
    result = SynthesisResult("gave_up", timings=timings,
                             components=len(system.components),
                             interactions=len(system.alphabet))
    stack = [frozenset()]
    tried = set()
    sys_idx = system.index

    def fmt(pairs):
        return [f"{l} < {h}" for l, h in sorted(pairs, key=lambda p: (sys_idx[p[0]], sys_idx[p[1]]))]

    while stack:
        if result.iterations >= max_iter:
            result.reason = f"iteration budget of {max_iter} exhausted"
            return result
        asserted = stack.pop()
        if asserted in tried:
            continue
        tried.add(asserted)
        result.iterations += 1
        entry = {"iteration": result.iterations, "asserted": fmt(asserted)}
        result.trace.append(entry)
        try:
            current = close_priorities(base | asserted)
        except CycleError:
            entry["outcome"] = "cyclic assertion"
            continue
        if not all(vis(h, l) for l, h in current):
            entry["outcome"] = "unsupported assertion"
            continue

        t0 = time.perf_counter()
        enc = encode(system.with_priorities(current), vis, component_order)
        t1 = time.perf_counter()
        nested = nested_risk_attractor(enc, over_approx=over_approx)
        t2 = time.perf_counter()
        timings["encode"] += t1 - t0
        timings["attractor"] += t2 - t1
        entry["attractor_rounds"] = nested.iterations

        if not check_feasible(enc, nested):
            if not asserted and over_approx:
                # an over-approximated set proves nothing about infeasibility
                result.reason = "initial state in over-approximated nested-risk-attractor"
                entry["outcome"] = "gave up"
                return result
            if not asserted:
                result.verdict = "infeasible"
                result.reason = "initial state in nested-risk-attractor"
                entry["outcome"] = "infeasible"
                return result
            entry["outcome"] = "initial state in nested-risk-attractor; backtrack"
            continue

        cands = extract_candidates(nested.boundary, enc)
        entry["candidates"] = [
            {"chosen": c.chosen, "escapes": sorted(c.escapes, key=sys_idx.get)} for c in cands
        ]
        t0 = time.perf_counter()
        if cands:
            res = resolve(build_constraints(cands, current, vis))
        else:
            res = Resolution(frozenset(), None)
        timings["sat"] += time.perf_counter() - t0

        if res.ok:
            added = frozenset((current | res.added) - base)
            t0 = time.perf_counter()
            bad = verify_solution(system, com, added, max_states=verify_limit)
            timings["verify"] += time.perf_counter() - t0
            if bad is not None:
                result.verdict = "error"
                result.reason = f"synthesized set failed verification: {bad}"
                result.priorities = added
                entry["outcome"] = "verification failed"
                return result
            result.verdict = "solved"
            result.priorities = added
            entry["outcome"] = "solved"
            entry["added"] = fmt(added)
            return result

        result.core = res.core
        entry["outcome"] = "unsat"
        entry["core"] = fmt(res.core)
        options = refinement_options(res.core, vis, current, strategy)
        for opt in reversed(options):
            stack.append(asserted | opt)

    result.reason = "search space exhausted without a fix"
    return result

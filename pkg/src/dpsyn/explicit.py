"""Explicit-state semantics: enabledness, successors, exploration, simulation.

This is the reference the symbolic pipeline is checked against, so it works
directly on configurations and never touches the game encoding.
"""
from __future__ import annotations

import itertools
import logging
import random
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache

from . import expr as ex
from .model import CycleError, close_priorities, compute_visibility

logger = logging.getLogger(__name__)

DEFAULT_STATE_LIMIT = 10**7


class StateLimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Configuration:
    locations: tuple
    values: tuple  # per component, a tuple of bools in variable order

    def format(self, system):
        locs = ",".join(self.locations)
        assigns = ",".join(
            f"{c.name}.{v}={int(b)}"
            for c, vals in zip(system.components, self.values)
            for v, b in zip(c.var_names, vals)
        )
        return f"({locs} | {assigns})" if assigns else f"({locs})"


def initial(system):
    return Configuration(
        tuple(c.initial_location for c in system.components),
        tuple(c.initial_values for c in system.components),
    )


class _Compiled:
    """Per-system lookup tables: transitions by (component, location, label)."""

    def __init__(self, system):
        self.system = system
        self.by_loc = []
        for comp in system.components:
            vidx = {v: k for k, v in enumerate(comp.var_names)}
            table = {}
            for t in comp.transitions:
                guard = _compile_guard(t.guard, vidx)
                choices = [
                    (None if u is None else tuple(sorted(u))) for _, u in t.update
                ]
                table.setdefault((t.source, t.label), []).append((guard, choices, t.target))
            self.by_loc.append(table)
        self.participants = [system.participants[s] for s in system.alphabet]
        self.higher = {
            s: [h for (l, h) in system.sort_pairs(system.closed_priorities) if l == s]
            for s in system.alphabet
        }

    def joint(self, c, sigma):
        for i in self.system.participants[sigma]:
            opts = self.by_loc[i].get((c.locations[i], sigma), ())
            if not any(g(c.values[i]) for g, _, _ in opts):
                return False
        return True


def _compile_guard(guard, vidx):
    return ex.fold(
        guard,
        atom=lambda name: (lambda vals, k=vidx[name]: vals[k]),
        const=lambda b: (lambda vals: b),
        neg=lambda f: (lambda vals: not f(vals)),
        conj=lambda f, g: (lambda vals: f(vals) and g(vals)),
        disj=lambda f, g: (lambda vals: f(vals) or g(vals)),
    )


@lru_cache(maxsize=64)
def _compiled(system):
    return _Compiled(system)


def joint_participation(system, c):
    """Interactions whose participants all have a guard-satisfying transition."""
    comp = _compiled(system)
    return frozenset(s for s in system.alphabet if comp.joint(c, s))


def _enabled(comp, c):
    jp = {s for s in comp.system.alphabet if comp.joint(c, s)}
    return frozenset(s for s in jp if not any(h in jp for h in comp.higher[s]))


def enabled(system, c):
    return _enabled(_compiled(system), c)


def is_deadlock(system, c):
    """Deadlock ignores priorities: no interaction has joint participation."""
    return not joint_participation(system, c)


def dist_enabled(system, com, c):
    """Interactions enabled using only information visible under ``com``.

    A higher-priority interaction suppresses ``sigma`` when it is visible to
    at least one executor of ``sigma`` and its joint participation holds.
    """
    comp = _compiled(system)
    names = [x.name for x in system.components]

    def visible_by(tau, j):
        return all(com.informs(names[i], names[j]) for i in system.participants[tau])

    jp = {s for s in system.alphabet if comp.joint(c, s)}
    out = set()
    for s in system.alphabet:
        execs = system.participants[s]
        if s not in jp or not all(visible_by(s, i) for i in execs):
            continue
        if any(h in jp and any(visible_by(h, i) for i in execs) for h in comp.higher[s]):
            continue
        out.add(s)
    return frozenset(out)


def _successors(comp, c, sigma):
    system = comp.system
    parts = system.participants[sigma]
    per_comp = []
    for i in parts:
        local = []
        for guard, choices, target in comp.by_loc[i].get((c.locations[i], sigma), ()):
            vals = c.values[i]
            if not guard(vals):
                continue
            opts = [(vals[k],) if ch is None else ch for k, ch in enumerate(choices)]
            for new_vals in itertools.product(*opts):
                local.append((target, tuple(new_vals)))
        per_comp.append(local)
    out = []
    seen = set()
    for combo in itertools.product(*per_comp):
        locs = list(c.locations)
        vals = list(c.values)
        for i, (loc, v) in zip(parts, combo):
            locs[i] = loc
            vals[i] = v
        nxt = Configuration(tuple(locs), tuple(vals))
        if nxt not in seen:
            seen.add(nxt)
            out.append(nxt)
    return out


def step(system, c, sigma):
    """All sigma-successors of ``c``; ``sigma`` must be enabled at ``c``."""
    comp = _compiled(system)
    if sigma not in _enabled(comp, c):
        raise ValueError(f"{sigma} is not enabled at {c.format(system)}")
    return set(_successors(comp, c, sigma))


def is_risk(system, c):
    def lookup(atom):
        if "@" in atom:
            name, loc = atom.split("@")
            return c.locations[system.comp_index[name]] == loc
        name, var = atom.split(".")
        i = system.comp_index[name]
        return c.values[i][system.components[i].var_names.index(var)]

    return ex.evaluate(system.risk, lookup)


# ---------------------------------------------------------------------------
# runs


@dataclass
class Run:
    start: Configuration
    steps: list = field(default_factory=list)  # [(interaction, Configuration)]

    @property
    def configurations(self):
        return [self.start] + [c for _, c in self.steps]

    def format(self, system):
        lines = [f"init -> {self.start.format(system)}"]
        lines += [f"{s} -> {c.format(system)}" for s, c in self.steps]
        return "\n".join(lines)

    def replays(self, system):
        """True iff every step is a valid successor under ``system``."""
        cur = self.start
        for s, nxt in self.steps:
            try:
                if nxt not in step(system, cur, s):
                    return False
            except ValueError:
                return False
            cur = nxt
        return True


def _path(parent, c):
    steps = []
    while parent[c] is not None:
        prev, s = parent[c]
        steps.append((s, c))
        c = prev
    return Run(c, steps[::-1])


@dataclass
class Exploration:
    reachable: set
    deadlocks: set
    risks: set
    counterexample: Run | None

    @property
    def safe(self):
        return not self.deadlocks and not self.risks


def explore(system, max_states=DEFAULT_STATE_LIMIT):
    """Breadth-first exploration from the initial configuration.

    The counterexample is a shortest run to the first deadlock or risk
    configuration discovered; successors are expanded in interaction
    declaration order.
    """
    comp = _compiled(system)
    c0 = initial(system)
    parent = {c0: None}
    queue = deque([c0])
    deadlocks, risks = set(), set()
    first_bad = None
    while queue:
        c = queue.popleft()
        jp = [s for s in system.alphabet if comp.joint(c, s)]
        bad = False
        if not jp:
            deadlocks.add(c)
            bad = True
        if is_risk(system, c):
            risks.add(c)
            bad = True
        if bad and first_bad is None:
            first_bad = c
        jps = set(jp)
        for s in jp:
            if any(h in jps for h in comp.higher[s]):
                continue
            for nxt in _successors(comp, c, s):
                if nxt not in parent:
                    parent[nxt] = (c, s)
                    if len(parent) > max_states:
                        raise StateLimitExceeded(f"more than {max_states} configurations")
                    queue.append(nxt)
    cex = _path(parent, first_bad) if first_bad is not None else None
    return Exploration(set(parent), deadlocks, risks, cex)


# ---------------------------------------------------------------------------
# solution checking


@dataclass
class ViolatedCondition:
    condition: int  # 1 order, 2 safety, 3 architecture support
    message: str
    pairs: tuple = ()
    counterexample: Run | None = None

    def __str__(self):
        return f"condition {self.condition}: {self.message}"


def verify_solution(system, com, added, max_states=DEFAULT_STATE_LIMIT, symbolic_fallback=True):
    """Check that ``added`` solves distributed priority synthesis.

    Returns None when all three conditions hold, otherwise the first violated
    condition (order, then architecture support, then safety).  When explicit
    exploration exceeds ``max_states`` and ``symbolic_fallback`` is set, safety
    is decided on a BDD reachability analysis instead.
    """
    try:
        closed = close_priorities(set(system.priorities) | set(added))
    except CycleError as err:
        return ViolatedCondition(1, str(err), err.cycle)
    vis = compute_visibility(system, com)
    for low, high in system.sort_pairs(closed):
        if not vis(high, low):
            return ViolatedCondition(
                3, f"{low} < {high} is not supported: {high} is not visible to {low}", ((low, high),)
            )
    extended = system.with_priorities(closed)
    try:
        result = explore(extended, max_states=max_states)
    except StateLimitExceeded:
        if not symbolic_fallback:
            raise
        from .game import symbolic_safety

        logger.info("explicit verification too large, checking safety symbolically")
        safe, detail = symbolic_safety(extended)
        if not safe:
            return ViolatedCondition(2, detail)
        return None
    if not result.safe:
        kind = "deadlock" if result.deadlocks else "risk"
        return ViolatedCondition(2, f"reachable {kind} configuration", (), result.counterexample)
    return None


# ---------------------------------------------------------------------------
# simulation


@dataclass
class Simulation:
    run: Run
    verdict: str  # "no violation observed" | "deadlock" | "risk"
    violation_step: int | None = None


def simulate_distributed(system, com, seed, max_steps):
    """Seeded random distributed run.

    Each step picks uniformly among distributively-enabled interactions and
    then among the resulting successors; a single global choice stands in
    for the controllers' agreement protocol.
    """
    rng = random.Random(seed)
    comp = _compiled(system)
    c = initial(system)
    run = Run(c)

    def check(cur, k):
        if not joint_participation(system, cur):
            return Simulation(run, "deadlock", k)
        if is_risk(system, cur):
            return Simulation(run, "risk", k)
        return None

    for k in range(max_steps):
        verdict = check(c, k)
        if verdict is not None:
            return verdict
        choices = [s for s in system.alphabet if s in dist_enabled(system, com, c)]
        sigma = rng.choice(choices)
        c = rng.choice(_successors(comp, c, sigma))
        run.steps.append((sigma, c))
    if max_steps > 0:
        verdict = check(c, max_steps)
        if verdict is not None:
            return verdict
    return Simulation(run, "no violation observed")


# ---------------------------------------------------------------------------
# explicit game graph (oracle for the symbolic game)


def control_bits(system, vis, c, sigma, jp=None):
    """Interaction bits recorded when ``sigma`` is chosen at ``c``.

    Mirrors the symbolic control move: visible interactions with joint
    participation are set, then each priority clears the lower bit when both
    bits are set.
    """
    if jp is None:
        jp = joint_participation(system, c)
    bits = {sigma} | {t for t in jp if t != sigma and vis(t, sigma)}
    for low, high in system.sort_pairs(system.closed_priorities):
        if low in bits and high in bits and low != sigma:
            bits.discard(low)
    return frozenset(bits)


@dataclass
class GameGraph:
    initial: tuple
    succ: dict  # node -> list of nodes
    control: set
    environment: set

    def predecessors(self):
        pred = {n: [] for n in self.succ}
        for n, out in self.succ.items():
            for m in out:
                pred[m].append(n)
        return pred


def game_graph(system, com, max_nodes=10**6):
    """Reachable explicit game: ``("ctrl", c)`` and ``("env", c, sigma, bits)`` nodes."""
    comp = _compiled(system)
    vis = compute_visibility(system, com)
    start = ("ctrl", initial(system))
    succ = {}
    control, environment = set(), set()
    queue = deque([start])
    seen = {start}
    while queue:
        node = queue.popleft()
        out = []
        if node[0] == "ctrl":
            control.add(node)
            c = node[1]
            jp = frozenset(s for s in system.alphabet if comp.joint(c, s))
            for s in sorted(_enabled(comp, c), key=system.index.get):
                out.append(("env", c, s, control_bits(system, vis, c, s, jp)))
        else:
            environment.add(node)
            out = [("ctrl", n) for n in _successors(comp, node[1], node[2])]
        succ[node] = out
        for m in out:
            if m not in seen:
                seen.add(m)
                if len(seen) > max_nodes:
                    raise StateLimitExceeded(f"more than {max_nodes} game nodes")
                queue.append(m)
    return GameGraph(start, succ, control, environment)


def explicit_attractor(graph, bad):
    """Backward induction: nodes from which the environment forces a visit to ``bad``."""
    pred = graph.predecessors()
    remaining = {n: len(graph.succ[n]) for n in graph.control}
    attr = set(bad)
    work = deque(attr)
    while work:
        m = work.popleft()
        for n in pred[m]:
            if n in attr:
                continue
            if n in graph.environment:
                attr.add(n)
                work.append(n)
            else:
                remaining[n] -= 1
                if remaining[n] == 0:
                    attr.add(n)
                    work.append(n)
    return attr

"""Independent explicit oracles shared by the property and acceptance tests."""
from __future__ import annotations

import itertools

from dpsyn.attractor import risk_attractor
from dpsyn.explicit import (
    Configuration,
    enabled,
    explicit_attractor,
    explore,
    game_graph,
    is_deadlock,
    is_risk,
    step,
)
from dpsyn.game import bad_states
from dpsyn.model import check_deployable, close_priorities, compute_visibility


def all_configurations(system):
    per_comp = []
    for comp in system.components:
        vals = list(itertools.product([False, True], repeat=len(comp.var_names)))
        per_comp.append([(loc, v) for loc in comp.locations for v in vals])
    for combo in itertools.product(*per_comp):
        yield Configuration(tuple(l for l, _ in combo), tuple(v for _, v in combo))


def valid_configurations(enc):
    return enc.vd.disj(enc.configuration(c) for c in all_configurations(enc.system))


def symbolic_deadlocks(enc):
    dead = enc.c_dead & valid_configurations(enc)
    return {enc.lifter.decode_configuration(a) for a in dead.enumerate(_config_vars(enc))}


def explicit_deadlocks(system):
    return {c for c in all_configurations(system) if is_deadlock(system, c)}


def _config_vars(enc):
    roles = ("location", "data")
    return [v for v in enc.unprimed if enc.vd.roles.get(v) in roles]


def symbolic_two_step(enc, c, sigma):
    """Configurations reached from ``c`` by a control move choosing sigma then an environment move."""
    mid = enc.image(enc.control_state(c), enc.t_ctrl & enc.enc(sigma, prime=True))
    after = enc.image(mid, enc.t_env)
    return {n[1] for n in enc.states(after)}


def explicit_bad_nodes(system, graph):
    return {n for n in graph.control if is_risk(system, n[1]) or is_deadlock(system, n[1])}


def attractor_pair(system, com, enc):
    """(symbolic, explicit) attractor of the bad states as sets of game nodes."""
    sym = enc.states(risk_attractor(bad_states(enc), enc))
    graph = game_graph(system, com)
    exp = explicit_attractor(graph, explicit_bad_nodes(system, graph))
    return sym, exp


def reachable(system):
    return explore(system).reachable


def priority_invariant_violations(system, com, added):
    """Closure problems of the original plus added priorities (empty when fine)."""
    problems = []
    try:
        closed = close_priorities(set(system.priorities) | set(added))
    except Exception as err:  # cycle
        return [f"cycle: {err}"]
    for low, high in closed:
        if low == high:
            problems.append(f"reflexive {low}")
    for (a, b), (c, d) in itertools.product(closed, closed):
        if b == c and (a, d) not in closed:
            problems.append(f"not transitive at {a}<{b}<{d}")
    vis = compute_visibility(system, com)
    for low, high in closed:
        if not vis(high, low):
            problems.append(f"unsupported {low} < {high}")
    if check_deployable(system, com):
        problems.append("architecture not deployable")
    return problems


def enabled_everywhere(system, configs):
    return {c: enabled(system, c) for c in configs}


def successors(system, c, sigma):
    return step(system, c, sigma)

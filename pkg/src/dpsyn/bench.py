"""Model generators: the two-component resource example, dining philosophers,
and seeded random systems for property tests.

Generators return model documents (dicts in the ``model`` format) through
the ``*_doc`` functions and parsed ``(System, CommArchitecture)`` pairs
through the ``gen_*`` functions.

Dining philosophers
-------------------
Philosopher ``i`` has locations ``think -> hasleft -> eat -> think`` with
interactions ``left_i`` (take the left fork), ``right_i`` (take the right
fork) and ``release_i`` (put both down).  Its right fork is ``Fork{i}`` and
its left fork is ``Fork{(i+1) % n}``, so ``Phil{i-1}`` is its right-hand
neighbour.  Forks are two-state components (``free``/``held``) joining the
take and release interactions of both neighbours.  Components are declared
``Phil0, Fork0, Phil1, Fork1, ...`` which keeps neighbours close in the
BDD variable order.

The architecture always contains the mandatory self and group pairs.  On
top of that, ``ccw`` adds ``Phil{i} -> Phil{i-1}`` (each philosopher
informs its right neighbour, over its right fork) and ``cw`` adds
``Phil{i} -> Phil{i+1}`` (informing the left neighbour, over the left
fork).  ``none`` adds nothing.
"""
from __future__ import annotations

import random

from .model import CommArchitecture, system_from_dict

DIRECTIONS = ("cw", "ccw", "none")


def fig1_doc():
    def comp(name, take, give):
        return {
            "name": name,
            "locations": ["idle", "used"],
            "initial": "idle",
            "variables": {},
            "transitions": [
                {"from": "idle", "to": "used", "label": take},
                {"from": "used", "to": "idle", "label": give},
            ],
        }

    return {
        "components": [comp("C1", "a", "b"), comp("C2", "c", "d")],
        "priorities": [],
        "communication": [["C1", "C1"], ["C2", "C2"], ["C2", "C1"]],
        "risk": "C1@used & C2@used",
    }


def gen_fig1():
    return system_from_dict(fig1_doc())


def philosophers_doc(n, direction="ccw"):
    if n < 2:
        raise ValueError("need at least two philosophers")
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    comps = []
    for i in range(n):
        prev = (i - 1) % n
        comps.append({
            "name": f"Phil{i}",
            "locations": ["think", "hasleft", "eat"],
            "initial": "think",
            "transitions": [
                {"from": "think", "to": "hasleft", "label": f"left_{i}"},
                {"from": "hasleft", "to": "eat", "label": f"right_{i}"},
                {"from": "eat", "to": "think", "label": f"release_{i}"},
            ],
        })
        # Fork i: right fork of Phil i, left fork of Phil i-1
        comps.append({
            "name": f"Fork{i}",
            "locations": ["free", "held"],
            "initial": "free",
            "transitions": [
                {"from": "free", "to": "held", "label": f"right_{i}"},
                {"from": "free", "to": "held", "label": f"left_{prev}"},
                {"from": "held", "to": "free", "label": f"release_{i}"},
                {"from": "held", "to": "free", "label": f"release_{prev}"},
            ],
        })
    com = set()
    for i in range(n):
        nxt = (i + 1) % n
        p, f, fl = f"Phil{i}", f"Fork{i}", f"Fork{nxt}"
        for a, b in ((p, p), (f, f), (p, f), (f, p), (p, fl), (fl, p), (f, fl), (fl, f)):
            com.add((a, b))
        if direction == "ccw":
            com.add((p, f"Phil{(i - 1) % n}"))
        elif direction == "cw":
            com.add((p, f"Phil{nxt}"))
    return {
        "components": comps,
        "priorities": [],
        "communication": [list(pair) for pair in sorted(com)],
        "risk": "false",
    }


def gen_philosophers(n, direction="ccw"):
    return system_from_dict(philosophers_doc(n, direction))


def random_doc(seed, max_components=4, max_locations=3, max_variables=1,
               max_interactions=5, priority_prob=0.3, extra_com_prob=0.3):
    """Deterministic pseudo-random model document.

    The architecture contains every mandatory pair (including those needed
    by the generated priorities) plus random extra pairs.
    """
    rng = random.Random(seed)
    m = rng.randint(1, max_components)
    comps = []
    for i in range(m):
        nloc = rng.randint(1, max_locations)
        nvar = rng.randint(0, max_variables)
        comps.append({
            "name": f"K{i}",
            "locations": [f"l{k}" for k in range(nloc)],
            "initial": "l0",
            "variables": {f"x{k}": rng.random() < 0.5 for k in range(nvar)},
            "transitions": [],
        })

    def guard(comp):
        vars_ = list(comp["variables"])
        if not vars_ or rng.random() < 0.5:
            return "true"
        v = rng.choice(vars_)
        return v if rng.random() < 0.5 else f"!{v}"

    def update(comp):
        return {v: rng.choice(["true", "false", "any"])
                for v in comp["variables"] if rng.random() < 0.6}

    n_inter = rng.randint(1, max_interactions)
    labels = [f"i{k}" for k in range(n_inter)]
    for label in labels:
        size = 1 if m == 1 or rng.random() < 0.5 else 2
        for idx in rng.sample(range(m), size):
            comp = comps[idx]
            for _ in range(rng.randint(1, 2)):
                comp["transitions"].append({
                    "from": rng.choice(comp["locations"]),
                    "to": rng.choice(comp["locations"]),
                    "label": label,
                    "guard": guard(comp),
                    "update": update(comp),
                })
    # every component needs at least one interaction
    for comp in comps:
        if not comp["transitions"]:
            comp["transitions"].append({
                "from": "l0", "to": rng.choice(comp["locations"]),
                "label": rng.choice(labels), "guard": "true", "update": {},
            })
    used = [l for l in labels if any(t["label"] == l for c in comps for t in c["transitions"])]

    # acyclic priorities: only from lower to higher label index
    priorities = []
    for a in range(len(used)):
        for b in range(a + 1, len(used)):
            if rng.random() < priority_prob / max(1, len(used)):
                low, high = (used[a], used[b]) if rng.random() < 0.5 else (used[b], used[a])
                priorities.append([low, high])
    priorities = _acyclic(priorities)

    atoms = [f"{c['name']}@{l}" for c in comps for l in c["locations"]]
    atoms += [f"{c['name']}.{v}" for c in comps for v in c["variables"]]
    r = rng.random()
    if r < 0.3:
        risk = "false"
    elif r < 0.7:
        risk = rng.choice(atoms)
    else:
        risk = f"{rng.choice(atoms)} & {rng.choice(atoms)}"

    doc = {"components": comps, "priorities": priorities, "communication": [], "risk": risk}
    system, _ = system_from_dict(doc)
    mandatory = CommArchitecture.mandatory(system, system.priorities).pairs
    names = [c["name"] for c in comps]
    extra = {(a, b) for a in names for b in names if rng.random() < extra_com_prob}
    doc["communication"] = [list(p) for p in sorted(mandatory | extra)]
    return doc


def _acyclic(pairs):
    from .model import CycleError, close_priorities

    kept = []
    for p in pairs:
        try:
            close_priorities([tuple(q) for q in kept] + [tuple(p)])
        except CycleError:
            continue
        kept.append(p)
    return kept


def gen_random(seed, **sizes):
    return system_from_dict(random_doc(seed, **sizes))

"""Systems of interacting components, priorities and communication architectures.

A model document is JSON with the fields ``components``, ``priorities``,
``communication`` and ``risk``::

    {
      "components": [
        {"name": "C1", "locations": ["idle", "used"], "initial": "idle",
         "variables": {"x": false},
         "transitions": [
           {"from": "idle", "to": "used", "label": "a", "guard": "x",
            "update": {"x": "any"}}
         ]}
      ],
      "priorities": [["a", "d"]],
      "communication": [["C2", "C1"]],
      "risk": "C1@used & C2@used"
    }

A priority ``[low, high]`` reads ``low < high``.  ``update`` maps a variable
to ``"true"``, ``"false"`` or ``"any"``; a variable missing from ``update``
keeps its current value.  ``guard`` defaults to ``"true"`` and ``risk`` to
``"false"``.  Interactions are indexed in order of first appearance in the
document, which fixes every symbolic encoding derived from the system.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import cached_property

from . import expr as ex

KEEP = None
BOTH = frozenset((False, True))
_UPDATE_VALUES = {"true": frozenset((True,)), "false": frozenset((False,)), "any": BOTH}


class ModelError(Exception):
    pass


class ParseError(ModelError):
    """Malformed or inconsistent model document.

    ``kind`` is one of ``syntax``, ``reference``, ``update``, ``priority``.
    """

    def __init__(self, message, kind="syntax"):
        super().__init__(message)
        self.kind = kind


class CycleError(ModelError):
    def __init__(self, cycle):
        self.cycle = tuple(cycle)
        super().__init__("priority cycle: " + " < ".join(self.cycle))


@dataclass(frozen=True)
class Transition:
    source: str
    guard: tuple
    label: str
    update: tuple  # ((var, frozenset | KEEP), ...) in component variable order
    target: str

    def choices(self, var):
        return dict(self.update)[var]


@dataclass(frozen=True)
class Component:
    name: str
    locations: tuple
    initial_location: str
    variables: tuple  # ((name, initial_value), ...)
    transitions: tuple

    @cached_property
    def var_names(self):
        return tuple(v for v, _ in self.variables)

    @cached_property
    def initial_values(self):
        return tuple(bool(b) for _, b in self.variables)

    @cached_property
    def alphabet(self):
        return frozenset(t.label for t in self.transitions)


@dataclass(frozen=True)
class System:
    components: tuple
    alphabet: tuple
    priorities: frozenset = frozenset()
    risk: tuple = ex.FALSE

    @cached_property
    def comp_index(self):
        return {c.name: i for i, c in enumerate(self.components)}

    @cached_property
    def index(self):
        """Interaction name -> declaration index."""
        return {s: i for i, s in enumerate(self.alphabet)}

    @cached_property
    def participants(self):
        """Interaction name -> tuple of indices of components using it."""
        return {
            s: tuple(i for i, c in enumerate(self.components) if s in c.alphabet)
            for s in self.alphabet
        }

    @cached_property
    def closed_priorities(self):
        return close_priorities(self.priorities)

    def with_priorities(self, priorities):
        return replace(self, priorities=frozenset(priorities))

    def component(self, name):
        return self.components[self.comp_index[name]]

    def sort_pairs(self, pairs):
        return sorted(pairs, key=lambda p: (self.index[p[0]], self.index[p[1]]))


@dataclass(frozen=True)
class CommArchitecture:
    pairs: frozenset = field(default_factory=frozenset)

    def informs(self, src, dst):
        return (src, dst) in self.pairs

    def without(self, pair):
        return CommArchitecture(self.pairs - {pair})

    @classmethod
    def full(cls, system):
        names = [c.name for c in system.components]
        return cls(frozenset((a, b) for a in names for b in names))

    @classmethod
    def mandatory(cls, system, priorities=()):
        """Smallest architecture satisfying the three deployability rules."""
        names = [c.name for c in system.components]
        pairs = {(n, n) for n in names}
        for s in system.alphabet:
            group = [names[i] for i in system.participants[s]]
            pairs.update((a, b) for a in group for b in group)
        for low, high in close_priorities(priorities):
            for j in system.participants[low]:
                for i in system.participants[high]:
                    pairs.add((names[i], names[j]))
        return cls(frozenset(pairs))


# ---------------------------------------------------------------------------
# priorities


def close_priorities(pairs):
    """Transitive closure of a priority relation.

    Raises CycleError with a witness cycle when the closure relates an
    interaction to itself.
    """
    succ = {}
    for low, high in pairs:
        succ.setdefault(low, set()).add(high)
        succ.setdefault(high, set())
    nodes = sorted(succ)
    reach = {n: set(succ[n]) for n in nodes}
    for k in nodes:
        for i in nodes:
            if k in reach[i]:
                reach[i] |= reach[k]
    for n in nodes:
        if n in reach[n]:
            raise CycleError(_find_cycle(succ, n))
    return frozenset((a, b) for a in nodes for b in reach[a])


def _find_cycle(succ, start):
    # BFS back to start gives a shortest witness
    parent = {start: None}
    frontier = [start]
    while frontier:
        nxt = []
        for u in frontier:
            for v in sorted(succ.get(u, ())):
                if v == start:
                    path = [u]
                    while parent[path[-1]] is not None:
                        path.append(parent[path[-1]])
                    return path[::-1] + [start]
                if v not in parent:
                    parent[v] = u
                    nxt.append(v)
        frontier = nxt
    return [start, start]


# ---------------------------------------------------------------------------
# architecture


@dataclass(frozen=True)
class Violation:
    rule: str  # "self-transmission" | "group-transmission" | "priority-transmission"
    pair: tuple  # the missing (informer, informed) pair
    reason: str

    def __str__(self):
        return f"{self.rule}: missing {self.pair[0]} -> {self.pair[1]} ({self.reason})"


def check_deployable(system, com):
    """Return the list of deployability violations (empty when deployable)."""
    names = [c.name for c in system.components]
    out = []
    for n in names:
        if not com.informs(n, n):
            out.append(Violation("self-transmission", (n, n), f"{n} must inform itself"))
    seen = {(n, n) for n in names}
    for s in system.alphabet:
        group = [names[i] for i in system.participants[s]]
        for a in group:
            for b in group:
                if a != b and not com.informs(a, b) and (a, b) not in seen:
                    seen.add((a, b))
                    out.append(Violation("group-transmission", (a, b), f"both take part in {s}"))
    for low, high in system.sort_pairs(system.closed_priorities):
        for j in system.participants[low]:
            for i in system.participants[high]:
                pair = (names[i], names[j])
                if not com.informs(*pair) and pair not in seen:
                    seen.add(pair)
                    out.append(Violation("priority-transmission", pair, f"needed by {low} < {high}"))
    return out


class VisTable:
    """``vis(tau, sigma)``: tau's enabledness is known to every executor of sigma."""

    def __init__(self, system, table):
        self.system = system
        self._table = table

    def __call__(self, tau, sigma):
        return self._table[tau, sigma]

    def visible_to(self, sigma):
        return [t for t in self.system.alphabet if t != sigma and self._table[t, sigma]]

    def items(self):
        return self._table.items()


def compute_visibility(system, com):
    names = [c.name for c in system.components]
    table = {}
    for tau in system.alphabet:
        for sigma in system.alphabet:
            table[tau, sigma] = all(
                com.informs(names[i], names[j])
                for i in system.participants[tau]
                for j in system.participants[sigma]
            )
    return VisTable(system, table)


# ---------------------------------------------------------------------------
# documents


def _req(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"{where}: missing field {key!r}")
    return obj[key]


def _name(value, where):
    if not isinstance(value, str) or not value:
        raise ParseError(f"{where}: expected a nonempty name, got {value!r}")
    return value


def _expr(text, where):
    try:
        return ex.parse_expr(text)
    except ex.ExprSyntaxError as err:
        raise ParseError(f"{where}: {err}") from None


def _component(doc, idx, labels):
    where = f"components[{idx}]"
    name = _name(_req(doc, "name", where), where)
    where = f"component {name}"
    locations = _req(doc, "locations", where)
    if not isinstance(locations, list) or not locations:
        raise ParseError(f"{where}: locations must be a nonempty list")
    locations = tuple(_name(l, where) for l in locations)
    if len(set(locations)) != len(locations):
        raise ParseError(f"{where}: duplicate location")
    initial = doc.get("initial", locations[0])
    if initial not in locations:
        raise ParseError(f"{where}: unknown initial location {initial!r}", "reference")
    variables = doc.get("variables", {}) or {}
    if not isinstance(variables, dict) or not all(isinstance(v, bool) for v in variables.values()):
        raise ParseError(f"{where}: variables must map names to booleans")
    var_names = tuple(variables)
    transitions = []
    for k, t in enumerate(doc.get("transitions", [])):
        tw = f"{where} transition {k}"
        src, dst = _req(t, "from", tw), _req(t, "to", tw)
        for loc in (src, dst):
            if loc not in locations:
                raise ParseError(f"{tw}: unknown location {loc!r}", "reference")
        label = _name(_req(t, "label", tw), tw)
        guard = _expr(t.get("guard", "true"), tw)
        unknown = ex.atoms(guard) - set(var_names)
        if unknown:
            raise ParseError(f"{tw}: guard mentions unknown variable(s) {sorted(unknown)}", "reference")
        update = t.get("update", {}) or {}
        if not isinstance(update, dict):
            raise ParseError(f"{tw}: update must be an object", "update")
        for v, val in update.items():
            if v not in var_names:
                raise ParseError(f"{tw}: update of unknown variable {v!r}", "reference")
            if val not in _UPDATE_VALUES:
                raise ParseError(f"{tw}: update value for {v!r} must be true/false/any", "update")
        upd = tuple((v, _UPDATE_VALUES[update[v]] if v in update else KEEP) for v in var_names)
        if label not in labels:
            labels.append(label)
        transitions.append(Transition(src, guard, label, upd, dst))
    return Component(name, locations, initial, tuple(variables.items()), tuple(transitions))


def _risk(text, components):
    risk = _expr(text, "risk")
    by_name = {c.name: c for c in components}
    for atom in ex.atoms(risk):
        if "@" in atom:
            comp, loc = atom.split("@")
            if comp not in by_name or loc not in by_name[comp].locations:
                raise ParseError(f"risk: unknown location atom {atom!r}", "reference")
        elif "." in atom:
            comp, var = atom.split(".")
            if comp not in by_name or var not in by_name[comp].var_names:
                raise ParseError(f"risk: unknown variable atom {atom!r}", "reference")
        else:
            raise ParseError(f"risk: atom {atom!r} must be Comp@loc or Comp.var", "reference")
    return risk


def system_from_dict(doc):
    """Build and validate ``(System, CommArchitecture)`` from a parsed document."""
    if not isinstance(doc, dict):
        raise ParseError("model document must be an object")
    comps = _req(doc, "components", "document")
    if not isinstance(comps, list) or not comps:
        raise ParseError("document: components must be a nonempty list")
    labels = []
    components = tuple(_component(c, i, labels) for i, c in enumerate(comps))
    names = [c.name for c in components]
    if len(set(names)) != len(names):
        raise ParseError("document: duplicate component name")
    if not labels:
        raise ParseError("document: no interactions")

    pairs = []
    for p in doc.get("priorities", []) or []:
        if not (isinstance(p, list) and len(p) == 2):
            raise ParseError(f"priority {p!r} must be [low, high]", "priority")
        low, high = p
        for s in (low, high):
            if s not in labels:
                raise ParseError(f"priority {low} < {high}: unknown interaction {s!r}", "priority")
        if low == high:
            raise CycleError([low, low])
        if (high, low) in pairs:
            raise CycleError([low, high, low])
        pairs.append((low, high))
    close_priorities(pairs)

    com = set()
    for p in doc.get("communication", []) or []:
        if not (isinstance(p, list) and len(p) == 2):
            raise ParseError(f"communication entry {p!r} must be [from, to]")
        for n in p:
            if n not in names:
                raise ParseError(f"communication: unknown component {n!r}", "reference")
        com.add(tuple(p))

    risk = _risk(doc.get("risk", "false"), components)
    system = System(components, tuple(labels), frozenset(pairs), risk)
    return system, CommArchitecture(frozenset(com))


def parse_system(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"invalid JSON: {err}") from None
    return system_from_dict(doc)


def load_system(path):
    with open(path, encoding="utf-8") as fh:
        return parse_system(fh.read())


_UPDATE_NAMES = {v: k for k, v in _UPDATE_VALUES.items()}


def system_to_dict(system, com):
    comps = []
    for c in system.components:
        comps.append({
            "name": c.name,
            "locations": list(c.locations),
            "initial": c.initial_location,
            "variables": dict(c.variables),
            "transitions": [
                {
                    "from": t.source,
                    "to": t.target,
                    "label": t.label,
                    "guard": ex.to_str(t.guard),
                    "update": {v: _UPDATE_NAMES[u] for v, u in t.update if u is not KEEP},
                }
                for t in c.transitions
            ],
        })
    return {
        "components": comps,
        "priorities": [list(p) for p in system.sort_pairs(system.priorities)],
        "communication": [list(p) for p in sorted(com.pairs)],
        "risk": ex.to_str(system.risk),
    }


def dump_system(system, com):
    return json.dumps(system_to_dict(system, com), indent=2)


def format_pairs(pairs, system=None):
    """One ``low < high`` per line, in declaration order when a system is given."""
    ordered = system.sort_pairs(pairs) if system is not None else sorted(pairs)
    return "".join(f"{low} < {high}\n" for low, high in ordered)


def parse_pairs(text):
    """Read priorities written as ``low < high`` lines or as a JSON list of pairs."""
    stripped = text.strip()
    if stripped.startswith("["):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as err:
            raise ParseError(f"invalid priority list: {err}") from None
        return frozenset(tuple(p) for p in data)
    out = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split("<")]
        if len(parts) != 2 or not all(parts):
            raise ParseError(f"line {lineno}: expected 'low < high', got {line!r}", "priority")
        out.add((parts[0], parts[1]))
    return frozenset(out)

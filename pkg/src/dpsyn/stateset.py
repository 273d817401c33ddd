"""Predicates over Boolean variables, backed by binary decision diagrams.

Every :class:`StateSet` belongs to a :class:`VarDictionary`, which owns the
BDD manager and a fixed variable order.  Each unprimed variable ``x`` has a
primed twin ``x'`` declared right after it.  The manager is not thread safe;
share a dictionary between threads only for reading finished sets.
"""
from __future__ import annotations

import logging

try:
    from dd import cudd as _backend
except ImportError:  # pragma: no cover - pure Python fallback
    from dd import autoref as _backend

logger = logging.getLogger(__name__)

PRIME = "'"


def primed(name):
    return name + PRIME


def is_primed(name):
    return name.endswith(PRIME)


def unprimed(name):
    return name[: -len(PRIME)] if is_primed(name) else name


class DictionaryMismatch(ValueError):
    pass


class VarDictionary:
    """Ordered variables with roles and primed twins.

    ``names`` lists the unprimed variables top-down; ``roles`` optionally
    maps each of them to a role tag (``turn``, ``choice``, ...).
    """

    def __init__(self, names, roles=None):
        names = list(names)
        if len(set(names)) != len(names) or any(is_primed(n) for n in names):
            raise ValueError("variable names must be unique and unprimed")
        self.bdd = _backend.BDD()
        if hasattr(self.bdd, "configure"):
            self.bdd.configure(reordering=False)
        self.names = tuple(names)
        self.primed_names = tuple(primed(n) for n in names)
        self.roles = dict(roles or {n: "var" for n in names})
        order = []
        for n in names:
            order += [n, primed(n)]
        self.order = tuple(order)
        self.position = {v: i for i, v in enumerate(order)}
        for v in order:
            self.bdd.declare(v)
        self._to_primed = {n: primed(n) for n in names}
        self._to_unprimed = {primed(n): n for n in names}
        self._and_exists = getattr(_backend, "and_exists", None)

    def __repr__(self):
        return f"VarDictionary({len(self.names)} vars)"

    def role_vars(self, role, prime=False):
        out = [n for n in self.names if self.roles.get(n) == role]
        return [primed(n) for n in out] if prime else out

    # constructors --------------------------------------------------------

    def atom(self, name):
        if name not in self.position:
            raise KeyError(f"unknown variable {name!r}")
        return StateSet(self, self.bdd.var(name))

    def constant(self, value):
        return StateSet(self, self.bdd.true if value else self.bdd.false)

    @property
    def true(self):
        return self.constant(True)

    @property
    def false(self):
        return self.constant(False)

    def cube(self, assignment):
        """Conjunction of literals from ``{var: bool}``."""
        node = self.bdd.true
        for v, b in assignment.items():
            lit = self.bdd.var(v)
            node = node & (lit if b else ~lit)
        return StateSet(self, node)

    def conj(self, sets):
        out = self.bdd.true
        for s in sets:
            out = out & self._node(s)
        return StateSet(self, out)

    def disj(self, sets):
        out = self.bdd.false
        for s in sets:
            out = out | self._node(s)
        return StateSet(self, out)

    def _node(self, s):
        if s.vd is not self:
            raise DictionaryMismatch("state sets belong to different dictionaries")
        return s.node

    def and_exists(self, a, b, qvars):
        """``exists(qvars, a & b)`` without building the conjunction when possible."""
        u, v = self._node(a), self._node(b)
        qvars = set(qvars)
        if self._and_exists is not None:
            return StateSet(self, self._and_exists(u, v, qvars))
        return StateSet(self, self.bdd.exist(qvars, u & v))


class StateSet:
    """Immutable predicate; ``==`` is semantic equality."""

    __slots__ = ("vd", "node")

    def __init__(self, vd, node):
        self.vd = vd
        self.node = node

    def _other(self, other):
        if not isinstance(other, StateSet):
            return NotImplemented
        if other.vd is not self.vd:
            raise DictionaryMismatch("state sets belong to different dictionaries")
        return other.node

    def __and__(self, other):
        return StateSet(self.vd, self.node & self._other(other))

    def __or__(self, other):
        return StateSet(self.vd, self.node | self._other(other))

    def __invert__(self):
        return StateSet(self.vd, ~self.node)

    def __sub__(self, other):
        return StateSet(self.vd, self.node & ~self._other(other))

    def implies(self, other):
        return StateSet(self.vd, ~self.node | self._other(other))

    def iff(self, other):
        o = self._other(other)
        return StateSet(self.vd, (self.node & o) | (~self.node & ~o))

    def __eq__(self, other):
        if not isinstance(other, StateSet):
            return NotImplemented
        return self.node == self._other(other)

    def __hash__(self):
        return hash(int(self.node)) if hasattr(self.node, "__int__") else id(self.node)

    def __bool__(self):
        raise TypeError("use .is_false / .is_true to test a StateSet")

    def __repr__(self):
        return f"<StateSet support={sorted(self.support, key=self.vd.position.get)}>"

    @property
    def is_false(self):
        return self.node == self.vd.bdd.false

    @property
    def is_true(self):
        return self.node == self.vd.bdd.true

    def subset_of(self, other):
        return (self - other).is_false

    @property
    def support(self):
        return set(self.vd.bdd.support(self.node))

    def exists(self, names):
        names = set(names)
        unknown = names - self.vd.position.keys()
        if unknown:
            raise KeyError(f"unknown variables {sorted(unknown)}")
        return StateSet(self.vd, self.vd.bdd.exist(names, self.node))

    def forall(self, names):
        return StateSet(self.vd, self.vd.bdd.forall(set(names), self.node))

    def swap_primed(self):
        """Rename unprimed variables to their primed twins, or the reverse."""
        sup = self.support
        has_primed = any(is_primed(v) for v in sup)
        has_plain = any(not is_primed(v) for v in sup)
        if has_primed and has_plain:
            raise ValueError("swap_primed needs a set over only primed or only unprimed variables")
        if not sup:
            return self
        table = self.vd._to_unprimed if has_primed else self.vd._to_primed
        rename = {v: table[v] for v in sup}
        return StateSet(self.vd, self.vd.bdd.let(rename, self.node))

    def enumerate(self, names):
        """All satisfying assignments of the projection onto ``names``.

        Assignments are dicts over exactly ``names`` and come in lexicographic
        order of the dictionary's variable order (False before True).
        """
        names = sorted(set(names), key=self.vd.position.__getitem__)
        projected = self.exists(self.support - set(names))
        if projected.is_false:
            return []
        if not names:
            return [{}]
        out = [dict(a) for a in self.vd.bdd.pick_iter(projected.node, care_vars=set(names))]
        out.sort(key=lambda a: tuple(a[n] for n in names))
        return out

    def count(self, names):
        """Number of assignments over ``names`` satisfying the projection."""
        names = set(names)
        projected = self.exists(self.support - names)
        if projected.is_false:
            return 0
        return int(self.vd.bdd.count(projected.node, nvars=len(names)))

    def dump(self, names=None):
        """Debug text: one satisfying assignment per line as ``var=0/1``."""
        names = names if names is not None else self.support
        lines = []
        for a in self.enumerate(names):
            lines.append(" ".join(f"{v}={int(a[v])}" for v in sorted(a, key=self.vd.position.get)))
        return "\n".join(lines)

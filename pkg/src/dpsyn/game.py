"""Symbolic safety game for a system under a communication architecture.

Control states (``p0`` true) hold a configuration; a control move picks an
interaction, stamps its code on the choice bits and records, on one bit per
interaction, which other interactions are enabled and visible to the chosen
one.  Environment states (``p0`` false) resolve the chosen interaction:
participants take a guard-satisfying transition and pick variable values,
and all choice and interaction bits are cleared again.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

from . import expr as ex
from .explicit import Configuration
from .model import KEEP, compute_visibility
from .stateset import VarDictionary, primed

logger = logging.getLogger(__name__)


def _nbits(n):
    return max(0, math.ceil(math.log2(n))) if n > 1 else 0


class _Lifter:
    """Maps a system's locations, variables and guards onto dictionary variables."""

    def __init__(self, system, vd, loc_bits, data_bits):
        self.system = system
        self.vd = vd
        self.loc_bits = loc_bits  # component index -> [var]
        self.data_bits = data_bits  # component index -> [var] in variable order
        self._p = {}

    def _lit(self, var, value, prime=False):
        s = self.vd.atom(primed(var) if prime else var)
        return s if value else ~s

    def loc(self, i, loc, prime=False):
        code = self.system.components[i].locations.index(loc)
        return self.vd.conj(
            self._lit(v, (code >> b) & 1, prime) for b, v in enumerate(self.loc_bits[i])
        )

    def data(self, i, var, prime=False):
        k = self.system.components[i].var_names.index(var)
        v = self.data_bits[i][k]
        return self.vd.atom(primed(v) if prime else v)

    def guard(self, i, guard):
        vd = self.vd
        return ex.fold(
            guard,
            atom=lambda name: self.data(i, name),
            const=vd.constant,
            neg=lambda s: ~s,
            conj=lambda a, b: a & b,
            disj=lambda a, b: a | b,
        )

    def risk(self):
        def atom(name):
            if "@" in name:
                comp, loc = name.split("@")
                return self.loc(self.system.comp_index[comp], loc)
            comp, var = name.split(".")
            return self.data(self.system.comp_index[comp], var)

        vd = self.vd
        return ex.fold(self.system.risk, atom, vd.constant, lambda s: ~s,
                       lambda a, b: a & b, lambda a, b: a | b)

    def joint(self, sigma):
        """Joint participation of ``sigma`` over unprimed location/data bits."""
        if sigma not in self._p:
            out = self.vd.true
            for i in self.system.participants[sigma]:
                comp = self.system.components[i]
                out = out & self.vd.disj(
                    self.loc(i, t.source) & self.guard(i, t.guard)
                    for t in comp.transitions if t.label == sigma
                )
            self._p[sigma] = out
        return self._p[sigma]

    def frame(self, i):
        vd = self.vd
        return vd.conj(vd.atom(v).iff(vd.atom(primed(v))) for v in self.loc_bits[i] + self.data_bits[i])

    def move(self, sigma):
        """Local effect of ``sigma``: participants move, everyone else stutters."""
        vd = self.vd
        out = vd.true
        parts = set(self.system.participants[sigma])
        for i, comp in enumerate(self.system.components):
            if i not in parts:
                out = out & self.frame(i)
                continue
            options = []
            for t in comp.transitions:
                if t.label != sigma:
                    continue
                opt = self.loc(i, t.source) & self.guard(i, t.guard) & self.loc(i, t.target, prime=True)
                for k, (var, choices) in enumerate(t.update):
                    v = self.data_bits[i][k]
                    if choices is KEEP:
                        opt = opt & vd.atom(v).iff(vd.atom(primed(v)))
                    elif len(choices) == 1:
                        opt = opt & self._lit(v, next(iter(choices)), prime=True)
                options.append(opt)
            out = out & vd.disj(options)
        return out

    def configuration(self, c, prime=False):
        vd = self.vd
        out = vd.true
        for i, comp in enumerate(self.system.components):
            out = out & self.loc(i, c.locations[i], prime)
            for k, b in enumerate(c.values[i]):
                out = out & self._lit(self.data_bits[i][k], b, prime)
        return out

    def decode_configuration(self, a, prime=False):
        locs, vals = [], []
        for i, comp in enumerate(self.system.components):
            code = 0
            for b, v in enumerate(self.loc_bits[i]):
                if a[primed(v) if prime else v]:
                    code |= 1 << b
            locs.append(comp.locations[code] if code < len(comp.locations) else f"<{code}>")
            vals.append(tuple(bool(a[primed(v) if prime else v]) for v in self.data_bits[i]))
        return Configuration(tuple(locs), tuple(vals))


def build_dictionary(system, component_order=None):
    """Variable dictionary for the game.

    Order: turn bit, choice bits, then per component (declaration order
    unless ``component_order`` names another) its location bits, data bits
    and the bits of interactions whose last participant it is.
    """
    names = [c.name for c in system.components]
    order = list(component_order) if component_order else names
    if sorted(order) != sorted(names):
        raise ValueError("component_order must be a permutation of the component names")
    rank = {n: k for k, n in enumerate(order)}
    n_choice = max(1, _nbits(len(system.alphabet)))
    varnames = ["p0"]
    roles = {"p0": "turn"}
    choice = [f"a{b}" for b in range(n_choice)]
    for v in choice:
        varnames.append(v)
        roles[v] = "choice"
    last = {
        s: max(system.participants[s], key=lambda i: rank[names[i]]) for s in system.alphabet
    }
    loc_bits, data_bits, inter_bits = {}, {}, {}
    for name in order:
        i = system.comp_index[name]
        comp = system.components[i]
        loc_bits[i] = [f"y{i}_{b}" for b in range(_nbits(len(comp.locations)))]
        data_bits[i] = [f"v{i}_{k}" for k in range(len(comp.var_names))]
        for v in loc_bits[i]:
            roles[v] = "location"
        for v in data_bits[i]:
            roles[v] = "data"
        varnames += loc_bits[i] + data_bits[i]
        for s in system.alphabet:
            if last[s] == i:
                inter_bits[s] = f"s{system.index[s]}"
                roles[inter_bits[s]] = "interaction"
                varnames.append(inter_bits[s])
    vd = VarDictionary(varnames, roles)
    return vd, choice, loc_bits, data_bits, inter_bits


@dataclass
class GameEncoding:
    system: object
    vis: object
    vd: VarDictionary
    lifter: _Lifter
    choice_bits: list
    inter_bits: dict  # interaction -> variable
    t_ctrl: object
    t_env: object
    c_dead: object
    init: object
    p_enabled: dict
    applied: tuple = ()
    _reach: object = field(default=None, repr=False)

    # variable groups ------------------------------------------------------

    @property
    def unprimed(self):
        return list(self.vd.names)

    @property
    def primed(self):
        return list(self.vd.primed_names)

    def enc(self, sigma, prime=False):
        code = self.system.index[sigma]
        vd = self.vd
        return vd.conj(
            (vd.atom(primed(v) if prime else v) if (code >> b) & 1
             else ~vd.atom(primed(v) if prime else v))
            for b, v in enumerate(self.choice_bits)
        )

    def bit(self, sigma, prime=False):
        v = self.inter_bits[sigma]
        return self.vd.atom(primed(v) if prime else v)

    @property
    def p0(self):
        return self.vd.atom("p0")

    # reachability ---------------------------------------------------------

    def image(self, states, trans):
        return self.vd.and_exists(states, trans, self.unprimed).swap_primed()

    def preimage(self, states, trans):
        """States with some ``trans`` successor in ``states``."""
        return self.vd.and_exists(trans, states.swap_primed(), self.primed)

    @property
    def reach(self):
        if self._reach is None:
            self._reach = reachable_states(self)
        return self._reach

    @property
    def t_ctrl_reach(self):
        return self.t_ctrl & self.reach

    @property
    def t_env_reach(self):
        return self.t_env & self.reach

    # decoding -------------------------------------------------------------

    def decode_state(self, a, prime=False):
        """Assignment -> ``("ctrl", c)`` or ``("env", c, chosen, bits)``."""
        def val(v):
            return bool(a[primed(v) if prime else v])

        c = self.lifter.decode_configuration(a, prime)
        if val("p0"):
            return ("ctrl", c)
        code = sum(1 << b for b, v in enumerate(self.choice_bits) if val(v))
        chosen = self.system.alphabet[code] if code < len(self.system.alphabet) else f"<{code}>"
        bits = frozenset(s for s, v in self.inter_bits.items() if val(v))
        return ("env", c, chosen, bits)

    def states(self, s):
        """Decode a set over unprimed variables into explicit game nodes."""
        return {self.decode_state(a) for a in s.enumerate(self.unprimed)}

    def transitions(self, t):
        return {
            (self.decode_state(a), self.decode_state(a, prime=True))
            for a in t.enumerate(self.unprimed + self.primed)
        }

    def control_state(self, c):
        """Canonical control encoding of configuration ``c``."""
        zero = {v: False for v in self.choice_bits + list(self.inter_bits.values())}
        return self.p0 & self.vd.cube(zero) & self.lifter.configuration(c)

    def configuration(self, c, prime=False):
        return self.lifter.configuration(c, prime)


def encode(system, vis=None, component_order=None, com=None):
    """Build the game for ``system`` with its (closed) priorities applied."""
    if not system.alphabet:
        raise ValueError("system has no interactions")
    if vis is None:
        if com is None:
            raise ValueError("encode needs a visibility table or an architecture")
        vis = compute_visibility(system, com)
    vd, choice, loc_bits, data_bits, inter_bits = build_dictionary(system, component_order)
    lifter = _Lifter(system, vd, loc_bits, data_bits)
    p0, p0p = vd.atom("p0"), vd.atom(primed("p0"))

    p_enabled = {s: lifter.joint(s) for s in system.alphabet}
    c_dead = vd.conj(~p for p in p_enabled.values())

    frame_all = vd.conj(lifter.frame(i) for i in range(len(system.components)))
    enc = GameEncoding(system, vis, vd, lifter, choice, inter_bits,
                       vd.false, vd.false, c_dead, vd.false, p_enabled)
    bit_p = {s: vd.atom(primed(v)) for s, v in inter_bits.items()}
    no_choice_p = vd.conj(~vd.atom(primed(v)) for v in choice)
    no_bits_p = vd.conj(~b for b in bit_p.values())

    t_ctrl = vd.false
    t_env = vd.false
    for s in system.alphabet:
        t = p0 & ~p0p & p_enabled[s] & enc.enc(s, prime=True) & bit_p[s]
        for other in system.alphabet:
            if other == s:
                continue
            if vis(other, s):
                t = t & p_enabled[other].iff(bit_p[other])
            else:
                t = t & ~bit_p[other]
        t_ctrl = t_ctrl | (t & frame_all)
        t_env = t_env | (~p0 & p0p & enc.enc(s) & no_choice_p & no_bits_p & lifter.move(s))

    zero = {v: False for v in choice + list(inter_bits.values())}
    c0 = Configuration(
        tuple(c.initial_location for c in system.components),
        tuple(c.initial_values for c in system.components),
    )
    init = p0 & vd.cube(zero) & lifter.configuration(c0)
    enc = replace(enc, t_ctrl=t_ctrl, t_env=t_env, init=init)
    for pair in system.sort_pairs(system.closed_priorities):
        enc = apply_priority(enc, pair)
    return enc


def apply_priority(enc, pair):
    """Restrict control moves by ``low < high``.

    Moves choosing ``low`` while ``high`` is recorded as enabled are removed;
    in the remaining moves where both bits are set, the ``low`` bit is
    cleared so later analyses treat ``low`` as disabled there.
    """
    low, high = pair
    if low == high:
        raise ValueError("a priority needs two distinct interactions")
    lo, hi = enc.bit(low, prime=True), enc.bit(high, prime=True)
    both = lo & hi
    t = enc.t_ctrl & both.implies(~enc.enc(low, prime=True))
    t12 = t & both
    t = t - both
    fixed = t12.exists([primed(enc.inter_bits[low])]) & ~lo
    return replace(enc, t_ctrl=t | fixed, applied=enc.applied + (pair,), _reach=None)


def reachable_states(enc):
    """Least fixpoint of the forward image from ``init``."""
    reach = enc.init
    frontier = enc.init
    while not frontier.is_false:
        new = enc.image(frontier, enc.t_ctrl) | enc.image(frontier, enc.t_env)
        frontier = new - reach
        reach = reach | frontier
    return reach


def risk_predicate(system, enc):
    """Risk configurations at control turns."""
    return enc.lifter.risk() & enc.p0


def deadlock_predicate(enc):
    return enc.c_dead & enc.p0


def bad_states(enc):
    return (risk_predicate(enc.system, enc) | deadlock_predicate(enc)) & enc.reach


def export_dot(enc, states=None):
    """Graphviz text of the reachable game; intended for small systems."""
    reach = enc.reach if states is None else states
    nodes = sorted(enc.states(reach), key=repr)
    ids = {n: f"n{k}" for k, n in enumerate(nodes)}
    system = enc.system

    def label(n):
        if n[0] == "ctrl":
            return n[1].format(system)
        return f"{n[1].format(system)}\\n{n[2]} {{{','.join(sorted(n[3], key=system.index.get))}}}"

    lines = ["digraph game {"]
    for n in nodes:
        shape = "ellipse" if n[0] == "ctrl" else "box"
        lines.append(f'  {ids[n]} [shape={shape}, label="{label(n)}"];')
    for kind, t in (("ctrl", enc.t_ctrl), ("env", enc.t_env)):
        for src, dst in sorted(enc.transitions(t & reach), key=repr):
            if src in ids and dst in ids:
                lines.append(f'  {ids[src]} -> {ids[dst]} [label="{kind}"];')
    lines.append("}")
    return "\n".join(lines)


def symbolic_safety(system, component_order=None):
    """Global-semantics safety check by BDD reachability.

    Builds the plain transition relation (enabledness with priority
    suppression, no game structure) and returns ``(safe, detail)``.
    """
    names = [c.name for c in system.components]
    order = list(component_order) if component_order else names
    varnames, loc_bits, data_bits = [], {}, {}
    for name in order:
        i = system.comp_index[name]
        comp = system.components[i]
        loc_bits[i] = [f"y{i}_{b}" for b in range(_nbits(len(comp.locations)))]
        data_bits[i] = [f"v{i}_{k}" for k in range(len(comp.var_names))]
        varnames += loc_bits[i] + data_bits[i]
    if not varnames:
        varnames = ["_unit"]
    vd = VarDictionary(varnames)
    lifter = _Lifter(system, vd, loc_bits, data_bits)
    higher = {s: [h for l, h in system.closed_priorities if l == s] for s in system.alphabet}
    rels = []
    for s in system.alphabet:
        en = lifter.joint(s)
        for h in higher[s]:
            en = en - lifter.joint(h)
        rels.append(en & lifter.move(s))
    c0 = Configuration(
        tuple(c.initial_location for c in system.components),
        tuple(c.initial_values for c in system.components),
    )
    unprimed = list(vd.names)
    reach = frontier = lifter.configuration(c0)
    while not frontier.is_false:
        new = vd.false
        for r in rels:
            new = new | vd.and_exists(frontier, r, unprimed).swap_primed()
        frontier = new - reach
        reach = reach | frontier
    dead = vd.conj(~lifter.joint(s) for s in system.alphabet) & reach
    if not dead.is_false:
        return False, "reachable deadlock configuration"
    if not (lifter.risk() & reach).is_false:
        return False, "reachable risk configuration"
    return True, "safe"

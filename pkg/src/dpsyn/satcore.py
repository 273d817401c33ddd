"""Small DPLL solver with assumptions and unsatisfiable-core extraction.

Literals are nonzero ints in DIMACS style.  Branching is deterministic:
lowest-index unassigned variable, value False first.
"""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Cnf:
    num_vars: int
    clauses: list = field(default_factory=list)
    assumptions: list = field(default_factory=list)

    def add(self, *lits):
        if not lits:
            raise ValueError("clauses must be nonempty")
        for lit in lits:
            if lit == 0 or abs(lit) > self.num_vars:
                raise ValueError(f"literal {lit} out of range")
        self.clauses.append(list(lits))

    def new_var(self):
        self.num_vars += 1
        return self.num_vars

    def to_dimacs(self):
        lines = [f"p cnf {self.num_vars} {len(self.clauses)}"]
        if self.assumptions:
            lines.insert(0, "c assumptions " + " ".join(map(str, self.assumptions)))
        lines += [" ".join(map(str, c)) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"


@dataclass
class Sat:
    model: dict  # var -> bool, total over 1..num_vars

    def value(self, lit):
        return self.model[abs(lit)] == (lit > 0)


@dataclass
class Unsat:
    core: list  # subset of the assumptions


class _Search:
    def __init__(self, num_vars, clauses):
        self.n = num_vars
        self.val = [None] * (num_vars + 1)
        self.clauses = []
        self.watch = {}
        self.trail = []
        self.trail_lim = []
        self.flipped = []
        self.qhead = 0
        self.units = []
        self.empty = False
        for c in clauses:
            lits = list(dict.fromkeys(c))
            if any(-l in lits for l in lits):
                continue  # tautology
            if not lits:
                self.empty = True
            elif len(lits) == 1:
                self.units.append(lits[0])
            else:
                idx = len(self.clauses)
                self.clauses.append(lits)
                self.watch.setdefault(lits[0], []).append(idx)
                self.watch.setdefault(lits[1], []).append(idx)

    def value(self, lit):
        v = self.val[abs(lit)]
        return None if v is None else v == (lit > 0)

    def enqueue(self, lit):
        v = self.value(lit)
        if v is not None:
            return v
        self.val[abs(lit)] = lit > 0
        self.trail.append(lit)
        return True

    def propagate(self):
        """Unit propagation; returns False on conflict."""
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            false_lit = -lit
            watching = self.watch.get(false_lit, [])
            keep = []
            i = 0
            conflict = False
            while i < len(watching):
                idx = watching[i]
                i += 1
                c = self.clauses[idx]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                other = c[0]
                if self.value(other) is True:
                    keep.append(idx)
                    continue
                for k in range(2, len(c)):
                    if self.value(c[k]) is not False:
                        c[1], c[k] = c[k], c[1]
                        self.watch.setdefault(c[1], []).append(idx)
                        break
                else:
                    keep.append(idx)
                    if self.value(other) is False:
                        conflict = True
                        keep.extend(watching[i:])
                        break
                    self.enqueue(other)
            self.watch[false_lit] = keep
            if conflict:
                return False
        return True

    def new_level(self, lit, flipped=False):
        self.trail_lim.append(len(self.trail))
        self.flipped.append(flipped)
        self.enqueue(lit)

    def undo_to(self, level):
        while len(self.trail_lim) > level:
            start = self.trail_lim.pop()
            self.flipped.pop()
            for lit in self.trail[start:]:
                self.val[abs(lit)] = None
            del self.trail[start:]
        self.qhead = min(self.qhead, len(self.trail))

    def run(self, assumptions):
        """Returns ("sat", model) or ("unsat", core-prefix or None for clause-level)."""
        if self.empty:
            return "unsat", []
        for u in self.units:
            if not self.enqueue(u):
                return "unsat", []
        if not self.propagate():
            return "unsat", []
        base = 0
        for k, a in enumerate(assumptions):
            v = self.value(a)
            if v is False:
                return "unsat", list(assumptions[: k + 1])
            if v is True:
                continue
            self.new_level(a)
            base += 1
            if not self.propagate():
                return "unsat", list(assumptions[: k + 1])
        nxt = 1
        while True:
            while nxt <= self.n and self.val[nxt] is not None:
                nxt += 1
            if nxt > self.n:
                return "sat", {v: bool(self.val[v]) for v in range(1, self.n + 1)}
            self.new_level(-nxt)
            while not self.propagate():
                # chronological backtracking to the latest unflipped decision
                level = len(self.trail_lim)
                while level > base and self.flipped[level - 1]:
                    level -= 1
                if level <= base:
                    return "unsat", list(assumptions)
                start = self.trail_lim[level - 1]
                lit = self.trail[start]
                self.undo_to(level - 1)
                self.new_level(-lit, flipped=True)
            nxt = 1


def _run(num_vars, clauses, assumptions):
    return _Search(num_vars, clauses).run(assumptions)


def solve(cnf, minimize=True):
    """Solve ``cnf`` under its assumptions.

    Returns Sat with a total model, or Unsat with a subset of the
    assumptions that is unsatisfiable together with the clauses.  The core
    is shrunk by a drop-one pass when ``minimize`` is set.
    """
    status, payload = _run(cnf.num_vars, cnf.clauses, cnf.assumptions)
    if status == "sat":
        return Sat(payload)
    core = payload
    if minimize and core:
        k = 0
        while k < len(core):
            trial = core[:k] + core[k + 1:]
            if _run(cnf.num_vars, cnf.clauses, trial)[0] == "unsat":
                core = trial
            else:
                k += 1
    return Unsat(core)


def check_model(cnf, model):
    """True iff ``model`` satisfies all clauses and assumptions."""
    def val(lit):
        return model[abs(lit)] == (lit > 0)

    return all(any(val(l) for l in c) for c in cnf.clauses) and all(val(a) for a in cnf.assumptions)

"""Boolean expressions used for transition guards and risk predicates.

Grammar::

    expr := "true" | "false" | atom | "!" expr | expr "&" expr
          | expr "|" expr | "(" expr ")"

``!`` binds tighter than ``&``, which binds tighter than ``|``.  Atoms are
plain identifiers in guards (local variable names) and ``Comp@loc`` or
``Comp.var`` in risk predicates.

Expressions are nested tuples so they stay hashable and cheap to compare:
``("const", bool)``, ``("atom", name)``, ``("not", e)``, ``("and", l, r)``,
``("or", l, r)``.
"""
from __future__ import annotations

import re

TRUE = ("const", True)
FALSE = ("const", False)

_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*(?:[@.][A-Za-z_][A-Za-z0-9_]*)?)|(.))")


class ExprSyntaxError(ValueError):
    pass


def _tokenize(text):
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        ident, sym = m.groups()
        if ident is not None:
            tokens.append(("id", ident))
        elif sym in "!&|()":
            tokens.append((sym, sym))
        else:
            raise ExprSyntaxError(f"unexpected character {sym!r} at {m.start(2)} in {text!r}")
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def take(self, kind):
        if self.peek() != kind:
            found = self.peek() or "end of input"
            raise ExprSyntaxError(f"expected {kind!r}, found {found!r} in {self.text!r}")
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse(self):
        if not self.tokens:
            raise ExprSyntaxError("empty expression")
        e = self.disj()
        if self.pos != len(self.tokens):
            raise ExprSyntaxError(f"trailing input after position {self.pos} in {self.text!r}")
        return e

    def disj(self):
        e = self.conj()
        while self.peek() == "|":
            self.take("|")
            e = ("or", e, self.conj())
        return e

    def conj(self):
        e = self.unary()
        while self.peek() == "&":
            self.take("&")
            e = ("and", e, self.unary())
        return e

    def unary(self):
        kind = self.peek()
        if kind == "!":
            self.take("!")
            return ("not", self.unary())
        if kind == "(":
            self.take("(")
            e = self.disj()
            self.take(")")
            return e
        _, name = self.take("id")
        if name == "true":
            return TRUE
        if name == "false":
            return FALSE
        return ("atom", name)


def parse_expr(text):
    """Parse ``text`` into an expression tuple; raises ExprSyntaxError."""
    if not isinstance(text, str):
        raise ExprSyntaxError(f"expression must be a string, got {type(text).__name__}")
    return _Parser(text).parse()


def atoms(expr):
    """Set of atom names occurring in ``expr``."""
    out = set()
    stack = [expr]
    while stack:
        e = stack.pop()
        if e[0] == "atom":
            out.add(e[1])
        elif e[0] != "const":
            stack.extend(e[1:])
    return out


def evaluate(expr, lookup):
    """Evaluate ``expr`` with ``lookup(atom) -> bool``."""
    op = expr[0]
    if op == "const":
        return expr[1]
    if op == "atom":
        return lookup(expr[1])
    if op == "not":
        return not evaluate(expr[1], lookup)
    if op == "and":
        return evaluate(expr[1], lookup) and evaluate(expr[2], lookup)
    return evaluate(expr[1], lookup) or evaluate(expr[2], lookup)


def fold(expr, atom, const, neg, conj, disj):
    """Structural fold; used to lift expressions into other algebras (BDDs)."""
    op = expr[0]
    if op == "const":
        return const(expr[1])
    if op == "atom":
        return atom(expr[1])
    if op == "not":
        return neg(fold(expr[1], atom, const, neg, conj, disj))
    left = fold(expr[1], atom, const, neg, conj, disj)
    right = fold(expr[2], atom, const, neg, conj, disj)
    return conj(left, right) if op == "and" else disj(left, right)


def to_str(expr):
    op = expr[0]
    if op == "const":
        return "true" if expr[1] else "false"
    if op == "atom":
        return expr[1]
    if op == "not":
        inner = to_str(expr[1])
        return f"!{inner}" if expr[1][0] in ("atom", "const", "not") else f"!({inner})"
    sym = " & " if op == "and" else " | "
    return f"({to_str(expr[1])}{sym}{to_str(expr[2])})"

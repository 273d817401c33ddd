import itertools

import pytest
from hypothesis import given, strategies as st

from dpsyn.stateset import DictionaryMismatch, VarDictionary


@pytest.fixture
def vd():
    return VarDictionary(["x", "y", "z"])


def test_basic_identities(vd):
    x, y = vd.atom("x"), vd.atom("y")
    assert (x & ~x) == vd.false
    assert x.iff(x) == vd.true
    assert (vd.false | y) == y
    assert x.implies(x | y).is_true


def test_truthiness_is_refused(vd):
    with pytest.raises(TypeError):
        bool(vd.atom("x"))


def test_mixing_dictionaries_fails(vd):
    other = VarDictionary(["x"])
    with pytest.raises(DictionaryMismatch):
        vd.atom("x") & other.atom("x")


def test_exists_examples(vd):
    x, y = vd.atom("x"), vd.atom("y")
    assert (x & y).exists(["x"]) == y
    assert (x & ~x).exists(["x"]) == vd.false
    assert "x" not in (x | y).exists(["x"]).support


def test_swap_primed(vd):
    x = vd.atom("x")
    assert x.swap_primed() == vd.atom("x'")
    s = x & ~vd.atom("z")
    assert s.swap_primed().swap_primed() == s
    assert vd.true.swap_primed() == vd.true
    with pytest.raises(ValueError):
        (x & vd.atom("y'")).swap_primed()


def test_enumerate_examples(vd):
    x, y = vd.atom("x"), vd.atom("y")
    assert (x | y).enumerate(["x", "y"]) == [
        {"x": False, "y": True},
        {"x": True, "y": False},
        {"x": True, "y": True},
    ]
    assert vd.false.enumerate(["x"]) == []
    assert vd.true.enumerate([]) == [{}]
    assert (x | y).count(["x", "y"]) == 3
    assert (x & y).dump(["x", "y"]) == "x=1 y=1"


# random formulas compared against truth tables
VARS = ["x", "y", "z", "x'"]
formulas = st.recursive(
    st.one_of(st.sampled_from(VARS).map(lambda v: ("atom", v)), st.booleans().map(lambda b: ("const", b))),
    lambda sub: st.one_of(
        sub.map(lambda f: ("not", f)),
        st.tuples(st.sampled_from(["and", "or", "implies", "iff"]), sub, sub),
    ),
    max_leaves=7,
)


def build(vd, f):
    op = f[0]
    if op == "atom":
        return vd.atom(f[1])
    if op == "const":
        return vd.constant(f[1])
    if op == "not":
        return ~build(vd, f[1])
    a, b = build(vd, f[1]), build(vd, f[2])
    return {"and": a & b, "or": a | b, "implies": a.implies(b), "iff": a.iff(b)}[op]


def truth(f, env):
    op = f[0]
    if op == "atom":
        return env[f[1]]
    if op == "const":
        return f[1]
    if op == "not":
        return not truth(f[1], env)
    a, b = truth(f[1], env), truth(f[2], env)
    return {"and": a and b, "or": a or b, "implies": (not a) or b, "iff": a == b}[op]


def table(f):
    return {
        bits for bits in itertools.product([False, True], repeat=len(VARS))
        if truth(f, dict(zip(VARS, bits)))
    }


def models(s):
    return {tuple(a[v] for v in VARS) for a in s.enumerate(VARS)}


_VD = VarDictionary(["x", "y", "z"])


@given(formulas)
def test_matches_truth_table(f):
    assert models(build(_VD, f)) == table(f)


@given(formulas, formulas)
def test_semantic_equality(f, g):
    assert (build(_VD, f) == build(_VD, g)) == (table(f) == table(g))


@given(formulas, formulas, st.sets(st.sampled_from(VARS)))
def test_exists_laws(f, g, qs):
    a, b = build(_VD, f), build(_VD, g)
    assert (a | b).exists(qs) == a.exists(qs) | b.exists(qs)
    assert a.implies(a.exists(qs)).is_true
    assert not (a.exists(qs).support & qs)


unprimed_formulas = formulas.filter(lambda f: "x'" not in repr(f))


@given(unprimed_formulas, unprimed_formulas)
def test_swap_commutes_with_operations(f, g):
    a, b = build(_VD, f), build(_VD, g)
    assert (a & b).swap_primed() == a.swap_primed() & b.swap_primed()
    assert (~a).swap_primed() == ~a.swap_primed()
    assert a.swap_primed().swap_primed() == a

import pytest

from dpsyn.attractor import (
    analysis_region,
    check_feasible,
    esc_predicate,
    nested_risk_attractor,
    risk_attractor,
)
from dpsyn.bench import gen_philosophers, gen_random
from dpsyn.explicit import Configuration
from dpsyn.game import bad_states, encode
from dpsyn.model import CommArchitecture, compute_visibility
from oracles import attractor_pair


def cfg(*locs):
    return Configuration(tuple(locs), ((),) * len(locs))


II, IU, UI, UU = cfg("idle", "idle"), cfg("idle", "used"), cfg("used", "idle"), cfg("used", "used")


@pytest.fixture
def fig1_enc(fig1):
    return encode(fig1[0], com=fig1[1])


def test_plain_attractor_of_risk_state(fig1_enc):
    enc = fig1_enc
    attr = enc.states(risk_attractor(bad_states(enc), enc))
    assert attr == {
        ("ctrl", UU),
        ("env", IU, "a", frozenset({"a", "d"})),
        ("env", UI, "c", frozenset({"c"})),
    }
    assert risk_attractor(enc.vd.false, enc).is_false


def test_nested_attractor_and_boundary(fig1_enc):
    enc = fig1_enc
    result = nested_risk_attractor(enc)
    assert enc.states(result.nested) == {
        ("ctrl", UU),
        ("ctrl", UI),
        ("env", II, "a", frozenset({"a", "c"})),
        ("env", IU, "a", frozenset({"a", "d"})),
        ("env", UI, "c", frozenset({"c"})),
    }
    assert enc.transitions(result.boundary) == {
        (("ctrl", II), ("env", II, "a", frozenset({"a", "c"}))),
        (("ctrl", IU), ("env", IU, "a", frozenset({"a", "d"}))),
    }
    assert result.plain.implies(result.nested).is_true
    assert check_feasible(enc, result)


def test_esc_examples(fig1_enc):
    enc = fig1_enc
    esc = esc_predicate(enc)
    moves = enc.transitions(enc.t_ctrl_reach & esc)
    assert (("ctrl", UI), ("env", UI, "c", frozenset({"c"}))) in moves
    assert (("ctrl", II), ("env", II, "a", frozenset({"a", "c"}))) not in moves


def test_single_interaction_moves_all_escape_free():
    system, com = gen_random(0, max_interactions=1)
    enc = encode(system, com=com)
    assert enc.t_ctrl.implies(esc_predicate(enc)).is_true


def test_philosophers_feasibility():
    for direction, feasible in (("ccw", True), ("cw", False), ("none", False)):
        system, com = gen_philosophers(5, direction)
        enc = encode(system, com=com)
        assert check_feasible(enc, nested_risk_attractor(enc)) is feasible


@pytest.mark.parametrize("seed", range(60))
def test_attractor_properties(seed):
    system, com = gen_random(seed)
    enc = encode(system, com=com)
    sym, exp = attractor_pair(system, com, enc)
    assert sym == exp

    bad = bad_states(enc)
    region = analysis_region(enc, bad)
    small = bad & ~enc.init
    assert risk_attractor(small, enc).implies(risk_attractor(bad, enc)).is_true

    exact = nested_risk_attractor(enc)
    over = nested_risk_attractor(enc, over_approx=True)
    assert risk_attractor(bad & region, enc, region).implies(exact.nested).is_true
    assert exact.nested.implies(over.nested).is_true

    # boundary moves leave from outside into the nested set, each with a visible escape
    t_f = exact.boundary
    assert (t_f.exists(enc.primed) & exact.nested).is_false
    assert t_f.implies(exact.nested.swap_primed()).is_true
    assert (t_f & esc_predicate(enc)).is_false
    controls = len([n for n in enc.states(enc.reach) if n[0] == "ctrl"])
    assert exact.iterations <= controls + 1


@pytest.mark.parametrize("seed", range(30))
def test_full_architecture_needs_no_nesting(seed):
    system, _ = gen_random(seed)
    full = CommArchitecture.full(system)
    enc = encode(system, compute_visibility(system, full))
    bad = bad_states(enc)
    region = analysis_region(enc, bad)
    assert nested_risk_attractor(enc).nested == risk_attractor(bad & region, enc, region)

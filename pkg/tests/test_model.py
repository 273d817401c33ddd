import copy
import json

import pytest
from hypothesis import given, strategies as st

from dpsyn.bench import fig1_doc, gen_random
from dpsyn.model import (
    KEEP,
    CommArchitecture,
    CycleError,
    ParseError,
    check_deployable,
    close_priorities,
    compute_visibility,
    dump_system,
    format_pairs,
    parse_pairs,
    parse_system,
    system_from_dict,
)


def test_fig1_document_shape(fig1):
    system, com = fig1
    assert len(system.components) == 2
    assert system.alphabet == ("a", "b", "c", "d")
    assert system.priorities == frozenset()
    assert com.pairs == {("C1", "C1"), ("C2", "C2"), ("C2", "C1")}


def _doc_with(mutate):
    doc = copy.deepcopy(fig1_doc())
    mutate(doc)
    return doc


def test_malformed_guard_is_a_syntax_error():
    doc = _doc_with(lambda d: d["components"][0].update(variables={"x": False}))
    doc["components"][0]["transitions"][0]["guard"] = "x &"
    with pytest.raises(ParseError) as err:
        system_from_dict(doc)
    assert err.value.kind == "syntax"


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d["components"][0]["transitions"][0].update({"to": "nowhere"}),
        lambda d: d["components"][0]["transitions"][0].update({"guard": "ghost"}),
        lambda d: d.update(communication=[["C1", "C9"]]),
        lambda d: d.update(risk="C3@used"),
        lambda d: d.update(risk="C1@broken"),
        lambda d: d["components"][0].update(initial="elsewhere"),
    ],
)
def test_unknown_references(mutate):
    with pytest.raises(ParseError) as err:
        system_from_dict(_doc_with(mutate))
    assert err.value.kind == "reference"


def test_update_values_are_checked():
    def mutate(d):
        d["components"][0]["variables"] = {"x": False}
        d["components"][0]["transitions"][0]["update"] = {"x": "maybe"}

    with pytest.raises(ParseError) as err:
        system_from_dict(_doc_with(mutate))
    assert err.value.kind == "update"


def test_omitted_update_keeps_value():
    def mutate(d):
        d["components"][0]["variables"] = {"x": True, "y": False}
        d["components"][0]["transitions"][0]["update"] = {"y": "any"}

    system, _ = system_from_dict(_doc_with(mutate))
    t = system.components[0].transitions[0]
    assert dict(t.update) == {"x": KEEP, "y": frozenset((False, True))}


def test_priority_on_unknown_interaction():
    with pytest.raises(ParseError) as err:
        system_from_dict(_doc_with(lambda d: d.update(priorities=[["a", "zz"]])))
    assert err.value.kind == "priority"


def test_both_orders_rejected_at_load():
    with pytest.raises(CycleError):
        system_from_dict(_doc_with(lambda d: d.update(priorities=[["a", "b"], ["b", "a"]])))


def test_shared_label_is_one_joint_interaction():
    doc = {
        "components": [
            {"name": "P", "locations": ["s"], "transitions": [{"from": "s", "to": "s", "label": "m"}]},
            {"name": "Q", "locations": ["t"], "transitions": [{"from": "t", "to": "t", "label": "m"}]},
        ]
    }
    system, _ = system_from_dict(doc)
    assert system.alphabet == ("m",)
    assert system.participants["m"] == (0, 1)
    assert system.components[0].alphabet & system.components[1].alphabet == {"m"}


def test_invalid_json():
    with pytest.raises(ParseError):
        parse_system("{not json")


def test_document_round_trip(fig1):
    system, com = fig1
    again, com2 = parse_system(dump_system(system, com))
    assert again == system and com2 == com


def test_close_priorities_examples():
    assert close_priorities({("a", "b"), ("b", "c")}) == {("a", "b"), ("b", "c"), ("a", "c")}
    assert close_priorities({("a", "d"), ("c", "b")}) == {("a", "d"), ("c", "b")}
    with pytest.raises(CycleError) as err:
        close_priorities({("a", "b"), ("b", "a")})
    assert err.value.cycle == ("a", "b", "a")


def test_cycle_witness_is_a_real_cycle():
    pairs = {("a", "b"), ("b", "c"), ("c", "d"), ("d", "b")}
    with pytest.raises(CycleError) as err:
        close_priorities(pairs)
    cyc = err.value.cycle
    assert cyc[0] == cyc[-1]
    assert all((x, y) in pairs for x, y in zip(cyc, cyc[1:]))


@given(st.sets(st.tuples(st.sampled_from("abcde"), st.sampled_from("abcde")), max_size=8))
def test_closure_idempotent(pairs):
    try:
        closed = close_priorities(pairs)
    except CycleError:
        return
    assert close_priorities(closed) == closed
    assert all(x != y for x, y in closed)


def test_fig1_deployability(fig1, fig1_with):
    assert check_deployable(*fig1) == []
    violations = check_deployable(*fig1_with(("a", "d"), ("c", "b")))
    assert [(v.rule, v.pair) for v in violations] == [("priority-transmission", ("C1", "C2"))]
    system, com = fig1
    missing = check_deployable(system, com.without(("C1", "C1")))
    assert [(v.rule, v.pair) for v in missing] == [("self-transmission", ("C1", "C1"))]


def test_fig1_visibility(fig1):
    vis = compute_visibility(*fig1)
    assert vis("c", "a") is True
    assert vis("b", "c") is False
    assert vis("a", "b") is True
    assert vis.visible_to("a") == ["b", "c", "d"]


@pytest.mark.parametrize("seed", range(40))
def test_architecture_properties(seed):
    system, com = gen_random(seed)
    assert check_deployable(system, CommArchitecture.full(system)) == []
    vis = compute_visibility(system, com)
    assert all(vis(s, s) for s in system.alphabet)
    for pair in sorted(com.pairs):
        smaller = compute_visibility(system, com.without(pair))
        assert all(vis(t, s) or not smaller(t, s) for t in system.alphabet for s in system.alphabet)


def test_pair_files():
    assert parse_pairs("a < c\n# note\n\nb<d\n") == {("a", "c"), ("b", "d")}
    assert parse_pairs('[["a", "c"]]') == {("a", "c")}
    with pytest.raises(ParseError):
        parse_pairs("a c")
    assert parse_pairs(format_pairs({("a", "c"), ("a", "d")})) == {("a", "c"), ("a", "d")}


def test_mandatory_architecture_is_deployable(fig1):
    system, _ = fig1
    system = system.with_priorities({("a", "d"), ("c", "b")})
    assert check_deployable(system, CommArchitecture.mandatory(system, system.priorities)) == []
    assert json.loads(json.dumps(sorted(CommArchitecture.mandatory(system).pairs)))

import itertools

import pytest

from dpsyn.bench import gen_fig1, gen_random
from dpsyn.explicit import (
    Configuration,
    StateLimitExceeded,
    dist_enabled,
    enabled,
    explore,
    initial,
    is_deadlock,
    joint_participation,
    simulate_distributed,
    step,
    verify_solution,
)
from dpsyn.model import CommArchitecture, system_from_dict
from oracles import all_configurations


def cfg(*locs):
    return Configuration(tuple(locs), ((),) * len(locs))


def test_enabled_examples(fig1, fig1_with):
    system, _ = fig1
    assert enabled(system, cfg("idle", "idle")) == {"a", "c"}
    constrained, _ = fig1_with(("a", "d"))
    assert enabled(constrained, cfg("idle", "used")) == {"d"}


def test_stuck_participant_disables_everything():
    doc = {
        "components": [
            {"name": "P", "locations": ["s", "t"], "transitions": [{"from": "s", "to": "t", "label": "m"}]},
            {"name": "Q", "locations": ["u"], "transitions": [{"from": "u", "to": "u", "label": "m"}]},
        ]
    }
    system, _ = system_from_dict(doc)
    stuck = Configuration(("t", "u"), ((), ()))
    assert enabled(system, stuck) == frozenset()
    assert is_deadlock(system, stuck)


def test_step_examples(fig1):
    system, _ = fig1
    assert step(system, cfg("idle", "idle"), "a") == {cfg("used", "idle")}
    with pytest.raises(ValueError):
        step(system, cfg("idle", "idle"), "b")


def test_nondeterministic_update_and_branching():
    doc = {
        "components": [{
            "name": "P", "locations": ["s", "t", "u"], "variables": {"x": False},
            "transitions": [
                {"from": "s", "to": "t", "label": "m", "update": {"x": "any"}},
                {"from": "s", "to": "u", "label": "m"},
            ],
        }]
    }
    system, _ = system_from_dict(doc)
    succ = step(system, initial(system), "m")
    assert succ == {
        Configuration(("t",), ((False,),)),
        Configuration(("t",), ((True,),)),
        Configuration(("u",), ((False,),)),
    }


def test_explore_examples(fig1, fig1_with):
    system, _ = fig1
    result = explore(system)
    assert not result.safe
    run = result.counterexample
    assert run.configurations[-1] == cfg("used", "used")
    assert run.replays(system)
    assert run.format(system).splitlines()[0] == "init -> (idle,idle)"
    assert explore(fig1_with(("a", "d"), ("c", "b"))[0]).safe
    assert explore(fig1_with(("a", "c"), ("a", "d"))[0]).safe


def test_state_limit_is_a_hard_error(fig1):
    with pytest.raises(StateLimitExceeded):
        explore(fig1[0], max_states=2)


def test_verify_solution_conditions(fig1):
    system, com = fig1
    assert verify_solution(system, com, {("a", "c"), ("a", "d")}) is None
    assert verify_solution(system, com, {("a", "d"), ("c", "b")}).condition == 3
    assert verify_solution(system, com, {("a", "d"), ("d", "a")}).condition == 1
    assert verify_solution(system, CommArchitecture.full(system), {("a", "d"), ("d", "a")}).condition == 1
    empty = verify_solution(system, com, set())
    assert empty.condition == 2
    assert empty.counterexample.replays(system)


def test_verify_symbolic_fallback(fig1):
    system, com = fig1
    assert verify_solution(system, com, {("a", "c"), ("a", "d")}, max_states=1) is None
    assert verify_solution(system, com, set(), max_states=1).condition == 2
    with pytest.raises(StateLimitExceeded):
        verify_solution(system, com, set(), max_states=1, symbolic_fallback=False)


def test_simulation_examples(fig1):
    system, com = fig1
    safe = system.with_priorities({("a", "c"), ("a", "d")})
    for seed in range(3):
        sim = simulate_distributed(safe, com, seed, 10_000)
        assert sim.verdict == "no violation observed"
        assert len(sim.run.steps) == 10_000
    hits = [simulate_distributed(system, com, seed, 50) for seed in range(20)]
    assert any(h.verdict == "risk" for h in hits)
    assert all(h.run.replays(system) for h in hits)
    empty = simulate_distributed(system, com, 0, 0)
    assert empty.run.steps == [] and empty.verdict == "no violation observed"


def test_simulation_is_seeded(fig1):
    a = simulate_distributed(*fig1, seed=7, max_steps=30)
    b = simulate_distributed(*fig1, seed=7, max_steps=30)
    assert a.run == b.run


def test_single_component_dist_enabled_matches():
    system, com = gen_random(3, max_components=1)
    for c in all_configurations(system):
        assert dist_enabled(system, com, c) == enabled(system, c)


@pytest.mark.parametrize("seed", range(60))
def test_distributed_enabledness_and_suppression(seed):
    system, com = gen_random(seed)
    reach = explore(system).reachable
    for c in reach:
        en = enabled(system, c)
        assert dist_enabled(system, com, c) == en
        if not en:
            assert not dist_enabled(system, com, c)
    # adding a priority only removes enabled interactions; deadlocks unchanged
    alphabet = system.alphabet
    for low, high in itertools.permutations(alphabet, 2):
        try:
            stronger = system.with_priorities(set(system.closed_priorities) | {(low, high)})
            stronger.closed_priorities
        except Exception:
            continue
        for c in all_configurations(system):
            assert enabled(stronger, c) <= enabled(system, c)
            assert is_deadlock(stronger, c) == is_deadlock(system, c)
        assert explore(stronger).reachable <= reach
        break


@pytest.mark.parametrize("seed", range(40))
def test_counterexamples_replay(seed):
    system, _ = gen_random(seed)
    result = explore(system)
    if result.counterexample is not None:
        assert result.counterexample.replays(system)
        last = result.counterexample.configurations[-1]
        assert last in result.deadlocks or last in result.risks
    assert joint_participation(system, initial(system)) is not None


def test_fig1_gen_matches_fixture(fig1):
    assert gen_fig1() == fig1

from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orsetlab.errors import DeliveryContractError, LookupFailure, ScenarioError
from orsetlab.sim import (
    NEXT,
    Check,
    Deliver,
    Merge,
    Op,
    Scenario,
    Simulator,
    SyncAll,
    measure_space,
    random_scenario,
    run,
    validate_causal_log,
)


def ops(*spec):
    return [Op(r, k, e) for r, k, e in spec]


class TestRunExamples:
    def test_single_replica(self):
        rep = run(Scenario("or-set", 1, [Op(0, "add", "a"), Check("converged")]))
        assert rep.passed and rep.final_elements == [["a"]]

    @pytest.mark.parametrize("design", ["or-set", "opt-or-set"])
    def test_concurrent_add_remove_add_wins(self, design):
        sc = Scenario(design, 2, ops((0, "add", "e"), (1, "remove", "e")) + [SyncAll(), Check("oracle")])
        rep = run(sc)
        assert rep.passed and rep.final_elements == [["e"], ["e"]]

    def test_cset_loses_the_add(self):
        sc = Scenario("c-set", 2, ops((0, "add", "e"), (1, "remove", "e")) + [SyncAll(), Check("oracle")])
        rep = run(sc)
        assert rep.final_elements == [[], []] and not rep.passed

    def test_one_check_entry_per_check_event_plus_final(self):
        sc = Scenario("or-set", 2, [Op(0, "add", "a"), Check("converged"), SyncAll(), Check("converged")])
        rep = run(sc)
        assert [(c.index, c.check) for c in rep.checks] == [
            (1, "converged"), (3, "converged"), (4, "final-converged")
        ]
        assert not rep.checks[0].passed and rep.checks[1].passed

    def test_implicit_drain_before_final_check(self):
        rep = run(Scenario("opt-or-set", 3, [Op(0, "add", "a")]))
        assert rep.final_elements == [["a"]] * 3 and rep.passed


class TestDelivery:
    def test_explicit_message_ids(self):
        sc = Scenario("or-set", 2, [Op(0, "add", "a"), Deliver(1, 0), Check("converged")])
        assert run(sc).passed

    def test_unknown_message(self):
        with pytest.raises(LookupFailure, match="event 1"):
            run(Scenario("or-set", 2, [Op(0, "add", "a"), Deliver(1, 5)]))

    def test_wrong_target(self):
        with pytest.raises(Exception, match="event 1: message 0 is addressed to replica 1"):
            run(Scenario("or-set", 3, [Op(0, "add", "a"), Deliver(2, 0)]))

    def test_causal_violation_named(self):
        # message 2 (remove at 1) depends on message 0 (add at 0) at replica 2
        events = [Op(0, "add", "a"), Deliver(1, 0), Op(1, "remove", "a"), Deliver(2, 3)]
        with pytest.raises(DeliveryContractError, match="event 3"):
            run(Scenario("opt-or-set", 3, events))

    def test_any_order_allows_it(self):
        events = [Op(0, "add", "a"), Deliver(1, 0), Op(1, "remove", "a"), Deliver(2, 3), SyncAll(),
                  Check("oracle"), Check("converged")]
        rep = run(Scenario("or-set", 3, events, delivery="any-order"))
        assert rep.passed and rep.final_elements == [[], [], []]
        assert validate_causal_log(rep)  # the remove overtook its add at replica 2

    def test_next_deliverable_skips_when_empty(self):
        rep = run(Scenario("or-set", 2, [Deliver(0, NEXT)]))
        assert rep.stats["skipped"] == 1


class TestScenarioFormat:
    def test_round_trip(self):
        sc = random_scenario(3, "or-set", duplicates=True)
        again = Scenario.loads(sc.dumps())
        assert again == sc
        assert json.loads(sc.dumps())["faults"] == {"duplicates": True}

    def test_parse_error_position(self):
        with pytest.raises(ScenarioError, match=r"x.json:2:\d+"):
            Scenario.loads('{"design": "or-set",\n  "replicas": }', "x.json")

    @pytest.mark.parametrize(
        "patch, message",
        [
            ({"design": "lww"}, "unknown design"),
            ({"replicas": 0}, "replicas"),
            ({"delivery": "any-order", "design": "opt-or-set"}, "requires causal"),
            ({"design": "c-set", "faults": {"duplicates": True}}, "at most once"),
            ({"events": [{"type": "op", "replica": 4, "kind": "add", "element": "a"}]}, "event 0"),
            ({"events": [{"type": "warp"}]}, "event 0: unknown event type"),
            ({"events": [{"type": "op", "replica": 0, "kind": "add"}]}, "missing field 'element'"),
            ({"design": "c-set", "events": [{"type": "merge", "from": 0, "to": 1}]}, "has no merge"),
            ({"events": [{"type": "check", "check": "vibes"}]}, "unknown check"),
        ],
    )
    def test_validation(self, patch, message):
        obj = {"design": "or-set", "replicas": 2, "events": []}
        obj.update(patch)
        with pytest.raises(ScenarioError, match=message):
            Scenario.from_dict(obj)


class TestDeterminism:
    @pytest.mark.parametrize("design", ["or-set", "opt-or-set", "cart", "c-set"])
    def test_same_seed_same_bytes(self, design):
        delivery = "causal" if design == "opt-or-set" else "any-order"
        sc = random_scenario(11, design, delivery=delivery)
        assert run(sc).to_json() == run(sc).to_json()

    def test_fork_matches_straight_run(self):
        sc = random_scenario(5, "or-set", delivery="any-order", duplicates=True)
        straight = run(sc).to_json()
        sim = Simulator(sc)
        half = len(sc.events) // 2
        for i, ev in enumerate(sc.events[:half]):
            sim.step(i, ev)
        twin = sim.fork()
        for s in (sim, twin):
            for i, ev in enumerate(sc.events[half:], half):
                s.step(i, ev)
        assert sim.finish(len(sc.events)).to_json() == straight
        assert twin.finish(len(sc.events)).to_json() == straight


@settings(max_examples=60)
@given(st.integers(0, 10**6), st.sampled_from(["or-set", "opt-or-set"]), st.booleans())
def test_random_causal_runs_conform(seed, design, duplicates):
    rep = run(random_scenario(seed, design, duplicates=duplicates))
    assert rep.passed, rep.failures()
    assert validate_causal_log(rep) == []


@settings(max_examples=60)
@given(st.integers(0, 10**6), st.booleans())
def test_random_any_order_orset_conforms(seed, duplicates):
    assert run(random_scenario(seed, "or-set", delivery="any-order", duplicates=duplicates)).passed


@settings(max_examples=30)
@given(st.integers(0, 10**6), st.sampled_from(["cart", "c-set"]))
def test_legacy_designs_converge(seed, design):
    rep = run(random_scenario(seed, design))
    assert all(c.passed for c in rep.checks if c.check in ("converged", "final-converged"))


@pytest.mark.parametrize("design", ["or-set", "opt-or-set"])
def test_duplicates_change_nothing(design):
    for seed in range(20):
        plain = run(random_scenario(seed, design))
        dup = run(random_scenario(seed, design, duplicates=True))
        assert dup.stats["duplicates"] > 0
        assert dup.final_payloads == plain.final_payloads


class TestSpace:
    def test_zero_cycles_is_empty(self):
        for design in ("or-set", "opt-or-set"):
            samples = measure_space(design, 3, 0)
            assert all(s.e_size == s.t_size == s.elements == 0 for s in samples)

    def test_opt_is_bounded(self):
        samples = measure_space("opt-or-set", 3, 100)
        assert max(s.e_size for s in samples) <= 3
        assert {s.vector_len for s in samples} == {3}

    def test_orset_grows(self):
        samples = measure_space("or-set", 3, 50)
        totals = [s.e_size + s.t_size for s in samples if s.replica == 0]
        assert totals == [3 * k for k in range(51)]

    def test_needs_add_wins_design(self):
        with pytest.raises(Exception, match="space measurement"):
            measure_space("cart", 3, 1)


def test_merges_between_effect_deliveries_for_opt():
    """Effects and whole-state merges interleave freely under causal delivery."""
    events = [
        Op(0, "add", "a"), Merge(0, 1), Deliver(1, 0), Op(1, "remove", "a"),
        Op(0, "add", "a"), Merge(1, 2), Deliver(2, 1), Deliver(2, 3), SyncAll(),
        Check("oracle"), Check("converged"),
    ]
    rep = run(Scenario("opt-or-set", 3, events))
    assert rep.passed and rep.final_elements == [["a"]] * 3

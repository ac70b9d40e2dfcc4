from __future__ import annotations

import itertools

import pytest

from orsetlab.causal import Dot, VersionVector
from orsetlab.errors import InvariantViolation
from orsetlab.orset import (
    AddEffect,
    ORSet,
    RemoveEffect,
    add_effect,
    add_prepare,
    contains,
    elements,
    or_compare,
    or_merge,
    remove_effect,
    remove_prepare,
)

d1, d2, d3 = Dot(1, 0), Dot(2, 0), Dot(1, 1)


def S(E=(), T=()):
    return ORSet(set(E), set(T))


class TestQueries:
    def test_contains(self):
        assert contains(S({("a", d1)}), "a")
        assert not contains(S((), {("a", d1)}), "a")
        assert contains(S({("a", d1), ("a", d2)}), "a")

    def test_elements(self):
        assert elements(S({("a", d1), ("b", d2)})) == {"a", "b"}
        assert elements(S()) == set()
        assert elements(S({("a", d1), ("a", d2)})) == {"a"}


class TestAdd:
    def test_prepare_fresh_and_pure(self):
        s = S({("b", d3)})
        snapshot = s.copy()
        v = VersionVector.zeros(2)
        e1 = add_prepare(s, "a", lambda: v.increment(0))
        e2 = add_prepare(s, "a", lambda: v.increment(0))
        assert e1.element == "a" and e1.dot != e2.dot
        assert s == snapshot

    def test_effect(self):
        assert add_effect(S(), AddEffect("a", d1)) == S({("a", d1)})

    def test_tombstone_shields(self):
        assert add_effect(S((), {("a", d1)}), AddEffect("a", d1)) == S((), {("a", d1)})

    def test_idempotent(self):
        eff = AddEffect("a", d1)
        once = add_effect(S(), eff)
        assert add_effect(once, eff) == once


class TestRemove:
    def test_prepare_collects_pairs(self):
        s = S({("a", d1), ("a", d2), ("b", d3)})
        assert remove_prepare(s, "a").pairs == {("a", d1), ("a", d2)}
        assert remove_prepare(S(), "a").pairs == set()
        assert remove_prepare(S({("b", d3)}), "a").pairs == set()

    def test_effect_moves_to_tombstones(self):
        assert remove_effect(S({("a", d1)}), RemoveEffect(frozenset({("a", d1)}))) == S((), {("a", d1)})

    def test_concurrent_readd_survives(self):
        out = remove_effect(S({("a", d2)}), RemoveEffect(frozenset({("a", d1)})))
        assert out == S({("a", d2)}, {("a", d1)})

    def test_remove_before_add(self):
        s = remove_effect(S(), RemoveEffect(frozenset({("a", d1)})))
        s = add_effect(s, AddEffect("a", d1))
        assert not contains(s, "a")

    def test_mixed_elements_rejected(self):
        with pytest.raises(ValueError):
            RemoveEffect(frozenset({("a", d1), ("b", d2)}))


class TestCompareMerge:
    def test_compare_examples(self):
        assert or_compare(S(), S({("a", d1)}, {("b", d2)}))
        assert or_compare(S({("a", d1)}), S((), {("a", d1)}))
        assert not or_compare(S((), {("a", d1)}), S({("a", d1)}))

    def test_merge_examples(self):
        assert or_merge(S({("a", d1)}), S((), {("a", d1)})) == S((), {("a", d1)})
        assert or_merge(S({("a", d1)}), S()) == S({("a", d1)})
        a = S({("a", d1)}, {("b", d2)})
        assert or_merge(a, a) == a

    def test_lattice_exhaustive(self):
        """Every valid state over 2 elements and 3 dots.

        A dot names one add, so its element is fixed across replicas; each
        labelling of the dots is a separate universe of states.
        """
        dots = [Dot(1, 0), Dot(2, 0), Dot(1, 1)]
        for labels in itertools.product("ab", repeat=len(dots)):
            states = []
            for where in itertools.product((None, "E", "T"), repeat=len(dots)):
                E = {(e, d) for e, d, w in zip(labels, dots, where) if w == "E"}
                T = {(e, d) for e, d, w in zip(labels, dots, where) if w == "T"}
                states.append(S(E, T))
            for a in states:
                assert or_merge(a, a) == a
                for b in states:
                    ab = or_merge(a, b)
                    ab.check_invariants()
                    assert ab == or_merge(b, a)
                    assert or_compare(a, ab) and or_compare(b, ab)
                    # compare is exactly the order merge induces
                    assert or_compare(a, b) == (ab == b)
                    for c in states[::2]:
                        assert or_merge(ab, c) == or_merge(a, or_merge(b, c))

    def test_effects_commute_exhaustive(self):
        """Any ordering of up to 4 effects from a fixed pool gives one state."""
        pool = [
            AddEffect("a", d1),
            AddEffect("a", d2),
            AddEffect("b", d3),
            RemoveEffect(frozenset({("a", d1)})),
            RemoveEffect(frozenset({("a", d1), ("a", d2)})),
            RemoveEffect(frozenset({("b", d3)})),
            RemoveEffect(frozenset()),
        ]
        for n in range(1, 5):
            for combo in itertools.combinations_with_replacement(pool, n):
                results = set()
                for order in set(itertools.permutations(combo)):
                    s = S()
                    for eff in order:
                        s.apply(eff)
                    s.check_invariants()
                    results.add(repr(s.payload()))
                assert len(results) == 1, combo


def test_invariants_detect_corruption():
    with pytest.raises(InvariantViolation):
        S({("a", d1)}, {("a", d1)}).check_invariants()
    with pytest.raises(InvariantViolation):
        S({("a", d1), ("b", d1)}).check_invariants()


def test_payload_sorted():
    s = S({("b", d2), ("a", d1)}, {("c", d3)})
    assert s.payload() == {"E": [["a", 1, 0], ["b", 2, 0]], "T": [["c", 1, 1]]}

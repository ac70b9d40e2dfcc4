"""Observed-Remove Set with tombstones.

The payload is a pair of sets of ``(element, dot)`` pairs: live entries
``E`` and tombstones ``T``. Every add creates a fresh pair; a remove
moves the pairs observed at its source from ``E`` to ``T``. Effects are
idempotent and commute, so downstream delivery may duplicate and
reorder them.

Tombstones keep the whole pair. A real implementation could keep only
a mark bit and drop any value attached to the element.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from operator import itemgetter
from typing import Callable

from .causal import Dot
from .errors import InvariantViolation

Pair = tuple[str, Dot]


@dataclass(frozen=True)
class AddEffect:
    element: str
    dot: Dot


@dataclass(frozen=True)
class RemoveEffect:
    pairs: frozenset[Pair]

    def __post_init__(self):
        if len({e for e, _ in self.pairs}) > 1:
            raise ValueError("remove effect pairs must share one element")


@dataclass
class ORSet:
    entries: set[Pair] = field(default_factory=set)
    tombstones: set[Pair] = field(default_factory=set)

    def contains(self, e: str) -> bool:
        return any(x == e for x, _ in self.entries)

    def elements(self) -> frozenset[str]:
        return frozenset(map(itemgetter(0), self.entries))

    def add_prepare(self, e: str, unique: Callable[[], Dot]) -> AddEffect:
        return AddEffect(e, unique())

    def add_effect(self, eff: AddEffect) -> None:
        pair = (eff.element, eff.dot)
        if pair not in self.tombstones:
            self.entries.add(pair)

    def remove_prepare(self, e: str) -> RemoveEffect:
        return RemoveEffect(frozenset(p for p in self.entries if p[0] == e))

    def remove_effect(self, eff: RemoveEffect) -> None:
        self.entries -= eff.pairs
        self.tombstones |= eff.pairs

    def apply(self, eff: AddEffect | RemoveEffect) -> None:
        if isinstance(eff, AddEffect):
            self.add_effect(eff)
        else:
            self.remove_effect(eff)

    def compare(self, other: ORSet) -> bool:
        """``self <= other`` in the payload order."""
        return (
            (self.entries | self.tombstones) <= (other.entries | other.tombstones)
            and self.tombstones <= other.tombstones
        )

    def merge(self, other: ORSet) -> ORSet:
        return ORSet(
            (self.entries - other.tombstones) | (other.entries - self.tombstones),
            self.tombstones | other.tombstones,
        )

    def merge_in(self, other: ORSet) -> None:
        merged = self.merge(other)
        self.entries, self.tombstones = merged.entries, merged.tombstones

    def copy(self) -> ORSet:
        return ORSet(set(self.entries), set(self.tombstones))

    def check_invariants(self) -> None:
        overlap = self.entries & self.tombstones
        if overlap:
            raise InvariantViolation(f"pairs both live and tombstoned: {sorted(overlap)}")
        pairs = self.entries | self.tombstones
        if len(set(map(itemgetter(1), pairs))) != len(pairs):
            seen: dict[Dot, str] = {}
            for e, d in sorted(pairs):
                if seen.setdefault(d, e) != e:
                    raise InvariantViolation(f"dot {d} tags two elements")

    def payload(self) -> dict:
        return {
            "E": sorted([e, d.counter, d.replica] for e, d in self.entries),
            "T": sorted([e, d.counter, d.replica] for e, d in self.tombstones),
        }


# Function spellings matching the operation names used in reports and tests.

def contains(s: ORSet, e: str) -> bool:
    return s.contains(e)


def elements(s: ORSet) -> frozenset[str]:
    return s.elements()


def add_prepare(s: ORSet, e: str, unique: Callable[[], Dot]) -> AddEffect:
    return s.add_prepare(e, unique)


def add_effect(s: ORSet, eff: AddEffect) -> ORSet:
    out = s.copy()
    out.add_effect(eff)
    return out


def remove_prepare(s: ORSet, e: str) -> RemoveEffect:
    return s.remove_prepare(e)


def remove_effect(s: ORSet, eff: RemoveEffect) -> ORSet:
    out = s.copy()
    out.remove_effect(eff)
    return out


def or_compare(a: ORSet, b: ORSet) -> bool:
    return a.compare(b)


def or_merge(a: ORSet, b: ORSet) -> ORSet:
    return a.merge(b)

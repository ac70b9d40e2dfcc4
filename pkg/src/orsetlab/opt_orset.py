"""Optimized Observed-Remove Set: no tombstones, coalesced adds.

The payload is a set ``E`` of ``(element, dot)`` triples plus a version
vector ``v`` summarizing every dot this replica has received. A dot
that is covered by ``v`` but absent from ``E`` has been removed, so no
tombstone is needed. Only the latest add per ``(element, source
replica)`` is kept; it subsumes the earlier ones.

Effects require causal delivery. Duplicated add effects are filtered by
the ``c > v[r]`` guard; an add that skips ahead of ``v[r] + 1`` or a
remove naming an unsummarized dot raises :class:`DeliveryContractError`.
"""

from __future__ import annotations

from dataclasses import dataclass
from operator import itemgetter

from .causal import Dot, ReplicaId, VersionVector
from .errors import DeliveryContractError, InvariantViolation

Triple = tuple[str, Dot]


@dataclass(frozen=True)
class OptAddEffect:
    element: str
    dot: Dot


@dataclass(frozen=True)
class OptRemoveEffect:
    triples: frozenset[Triple]

    def __post_init__(self):
        if len({e for e, _ in self.triples}) > 1:
            raise ValueError("remove effect triples must share one element")


@dataclass
class OptORSet:
    entries: set[Triple]
    vector: VersionVector

    @classmethod
    def empty(cls, n: int) -> OptORSet:
        return cls(set(), VersionVector.zeros(n))

    def contains(self, e: str) -> bool:
        return any(x == e for x, _ in self.entries)

    def elements(self) -> frozenset[str]:
        return frozenset(map(itemgetter(0), self.entries))

    def add_prepare(self, e: str, replica: ReplicaId) -> OptAddEffect:
        # Source applies the returned effect right away, which bumps v[replica].
        return OptAddEffect(e, Dot(self.vector[replica] + 1, replica))

    def add_effect(self, eff: OptAddEffect) -> None:
        e, (c, r) = eff.element, eff.dot
        current = self.vector[r]
        if c <= current:
            return
        if c > current + 1:
            raise DeliveryContractError(
                f"add {e}{eff.dot} delivered before dot ({current + 1},{r})"
            )
        older = {t for t in self.entries if t[0] == e and t[1].replica == r and t[1].counter < c}
        self.vector.set(r, c)
        self.entries -= older
        self.entries.add((e, eff.dot))

    def remove_prepare(self, e: str) -> OptRemoveEffect:
        return OptRemoveEffect(frozenset(t for t in self.entries if t[0] == e))

    def remove_effect(self, eff: OptRemoveEffect) -> None:
        missing = [t for t in eff.triples if not self.vector.contains(t[1])]
        if missing:
            raise DeliveryContractError(
                f"remove delivered before the adds of {sorted(missing)}"
            )
        self.entries -= eff.triples

    def apply(self, eff: OptAddEffect | OptRemoveEffect) -> None:
        if isinstance(eff, OptAddEffect):
            self.add_effect(eff)
        else:
            self.remove_effect(eff)

    def removed_dots(self) -> set[Dot]:
        """Dots summarized by the vector but absent from ``E``."""
        live = {d for _, d in self.entries}
        return {
            Dot(c, i)
            for i, top in enumerate(self.vector)
            for c in range(1, top + 1)
            if Dot(c, i) not in live
        }

    def compare(self, other: OptORSet) -> bool:
        """``self <= other``: vectors ordered and every removal here is a removal there."""
        return self.vector.leq(other.vector) and self.removed_dots() <= other.removed_dots()

    def merge(self, other: OptORSet) -> OptORSet:
        v, bv = self.vector, other.vector
        both = self.entries & other.entries
        only_here = {t for t in self.entries - other.entries if t[1].counter > bv[t[1].replica]}
        only_there = {t for t in other.entries - self.entries if t[1].counter > v[t[1].replica]}
        union = both | only_here | only_there
        latest: dict[tuple[str, ReplicaId], int] = {}
        for e, (c, i) in union:
            if c > latest.get((e, i), 0):
                latest[(e, i)] = c
        kept = {t for t in union if t[1].counter == latest[(t[0], t[1].replica)]}
        return OptORSet(kept, v.merge(bv))

    def merge_in(self, other: OptORSet) -> None:
        merged = self.merge(other)
        self.entries, self.vector = merged.entries, merged.vector

    def copy(self) -> OptORSet:
        return OptORSet(set(self.entries), self.vector.copy())

    def check_invariants(self) -> None:
        v = self.vector.as_tuple()
        n = len(v)
        entries = self.entries
        size = len(entries)
        if (
            all(0 <= d.replica < n and d.counter <= v[d.replica] for _, d in entries)
            and len({d for _, d in entries}) == size
            and len({(e, d.replica) for e, d in entries}) == size
        ):
            if size > len(self.elements()) * n:
                raise InvariantViolation("|E| exceeds |elements| * n")
            return
        # Slow path, only to name the offending triple.
        per_source: set[tuple[str, ReplicaId]] = set()
        dots: set[Dot] = set()
        for e, d in sorted(self.entries):
            if not self.vector.contains(d):
                raise InvariantViolation(f"triple {e}{d} not summarized by {self.vector}")
            if d in dots:
                raise InvariantViolation(f"dot {d} appears twice")
            dots.add(d)
            if (e, d.replica) in per_source:
                raise InvariantViolation(f"two triples for {e!r} from replica {d.replica}")
            per_source.add((e, d.replica))
        if len(self.entries) > len(self.elements()) * len(self.vector):
            raise InvariantViolation("|E| exceeds |elements| * n")

    def payload(self) -> dict:
        return {
            "E": sorted([e, d.counter, d.replica] for e, d in self.entries),
            "v": list(self.vector),
        }


def opt_add_prepare(s: OptORSet, e: str, replica: ReplicaId) -> OptAddEffect:
    return s.add_prepare(e, replica)


def opt_add_effect(s: OptORSet, eff: OptAddEffect) -> OptORSet:
    out = s.copy()
    out.add_effect(eff)
    return out


def opt_remove_prepare(s: OptORSet, e: str) -> OptRemoveEffect:
    return s.remove_prepare(e)


def opt_remove_effect(s: OptORSet, eff: OptRemoveEffect) -> OptORSet:
    out = s.copy()
    out.remove_effect(eff)
    return out


def opt_compare(a: OptORSet, b: OptORSet) -> bool:
    return a.compare(b)


def opt_merge(a: OptORSet, b: OptORSet) -> OptORSet:
    return a.merge(b)

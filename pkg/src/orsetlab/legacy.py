"""Two replicated-set designs that converge but break set semantics.

``RegisterCart`` is a multi-value register holding whole sets, in the
style of a Dynamo shopping cart: concurrent writes survive as siblings
and a read returns their union, so a remove can be undone by a
concurrent write that still contained the element.

``CSet`` counts adds and removes per element and reports the element
present while the count is positive. Concurrent removes can drive the
count negative, after which a later add no longer makes it visible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .causal import ADD, REMOVE, ReplicaId, VersionVector
from .errors import InvariantViolation


def _dominates(a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    """``b`` is strictly before ``a``."""
    return a != b and all(x >= y for x, y in zip(a, b))


@dataclass(frozen=True)
class Version:
    items: frozenset[str]
    clock: tuple[int, ...]


@dataclass
class RegisterCart:
    n: int
    siblings: set[Version] = field(default_factory=set)

    def read(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for v in self.siblings:
            out |= v.items
        return out

    elements = read

    def context(self) -> VersionVector:
        """Join of all sibling clocks: the causal context of a read."""
        ctx = VersionVector.zeros(self.n)
        for v in self.siblings:
            ctx.merge_in(VersionVector(v.clock))
        return ctx

    def write(self, items: frozenset[str], context: VersionVector) -> Version:
        """Assign ``items`` under an already-incremented ``context``."""
        version = Version(frozenset(items), context.as_tuple())
        self.absorb(version)
        return version

    def prepare(self, replica: ReplicaId, kind: str, element: str) -> Version:
        current = self.read()
        items = current | {element} if kind == ADD else current - {element}
        ctx = self.context()
        ctx.increment(replica)
        return Version(frozenset(items), ctx.as_tuple())

    def absorb(self, version: Version) -> None:
        if any(_dominates(s.clock, version.clock) or s == version for s in self.siblings):
            return
        self.siblings = {s for s in self.siblings if not _dominates(version.clock, s.clock)}
        self.siblings.add(version)

    apply = absorb

    def merge(self, other: RegisterCart) -> RegisterCart:
        out = self.copy()
        for v in other.siblings:
            out.absorb(v)
        return out

    def merge_in(self, other: RegisterCart) -> None:
        for v in other.siblings:
            self.absorb(v)

    def copy(self) -> RegisterCart:
        return RegisterCart(self.n, set(self.siblings))

    def check_invariants(self) -> None:
        for a in self.siblings:
            for b in self.siblings:
                if _dominates(a.clock, b.clock):
                    raise InvariantViolation(f"sibling {b} dominated by {a}")

    def payload(self) -> dict:
        return {
            "siblings": sorted(
                [list(v.clock), sorted(v.items)] for v in self.siblings
            )
        }


def cart_read(s: RegisterCart) -> frozenset[str]:
    return s.read()


def cart_write(s: RegisterCart, items: frozenset[str], context: VersionVector) -> RegisterCart:
    out = s.copy()
    out.write(items, context)
    return out


def cart_merge(a: RegisterCart, b: RegisterCart) -> RegisterCart:
    return a.merge(b)


@dataclass(frozen=True)
class CountDelta:
    element: str
    delta: int


@dataclass
class CSet:
    counts: dict[str, int] = field(default_factory=dict)

    def contains(self, e: str) -> bool:
        return self.counts.get(e, 0) > 0

    def elements(self) -> frozenset[str]:
        return frozenset(e for e, c in self.counts.items() if c > 0)

    def prepare(self, kind: str, element: str) -> CountDelta:
        return CountDelta(element, 1 if kind == ADD else -1)

    def apply(self, d: CountDelta) -> None:
        self.counts[d.element] = self.counts.get(d.element, 0) + d.delta

    def copy(self) -> CSet:
        return CSet(dict(self.counts))

    def check_invariants(self) -> None:
        pass

    def payload(self) -> dict:
        return {"counts": sorted([e, c] for e, c in self.counts.items())}


def cset_add(s: CSet, e: str) -> CountDelta:
    return s.prepare(ADD, e)


def cset_remove(s: CSet, e: str) -> CountDelta:
    return s.prepare(REMOVE, e)


def cset_contains(s: CSet, e: str) -> bool:
    return s.contains(e)


def cset_deliver(s: CSet, d: CountDelta) -> CSet:
    out = s.copy()
    out.apply(d)
    return out

"""Dots, version vectors and happens-before bookkeeping.

A :class:`Dot` ``(counter, replica)`` is a globally unique update
identifier. A :class:`VersionVector` summarizes, per replica ``j``, the
contiguous run of dots ``(1, j) .. (v[j], j)`` that have been observed.
:class:`History` records update events with the set of events each one
observed at its source and answers happens-before queries.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple

from .errors import ConfigurationError, InvalidReplicaError, LookupFailure

ReplicaId = int


class Dot(NamedTuple):
    counter: int
    replica: ReplicaId

    def __str__(self) -> str:
        return f"({self.counter},{self.replica})"


class VersionVector:
    """Fixed-length vector of per-replica counters.

    Entries only grow. ``increment`` mutates in place; ``merge`` returns
    a new vector and ``merge_in`` is its in-place variant.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Iterable[int]):
        self._entries = list(entries)
        if self._entries and min(self._entries) < 0:
            raise ConfigurationError(f"negative vector entry in {self._entries}")

    @classmethod
    def zeros(cls, n: int) -> VersionVector:
        if n < 1:
            raise ConfigurationError(f"replica count must be positive, got {n}")
        return cls([0] * n)

    def __len__(self) -> int:
        return len(self._entries)

    def __getitem__(self, r: ReplicaId) -> int:
        self._check_replica(r)
        return self._entries[r]

    def __iter__(self) -> Iterator[int]:
        return iter(self._entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VersionVector):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self):
        return hash(tuple(self._entries))

    def __repr__(self) -> str:
        return f"VersionVector({self._entries})"

    def _check_replica(self, r: ReplicaId) -> None:
        if not (type(r) is int and 0 <= r < len(self._entries)):
            raise InvalidReplicaError(
                f"replica {r!r} out of range for vector of length {len(self._entries)}"
            )

    def _check_length(self, other: VersionVector) -> None:
        if len(self._entries) != len(other._entries):
            raise ConfigurationError(
                f"vector length mismatch: {len(self)} vs {len(other)}"
            )

    def copy(self) -> VersionVector:
        out = VersionVector.__new__(VersionVector)
        out._entries = self._entries.copy()
        return out

    def as_tuple(self) -> tuple[int, ...]:
        return tuple(self._entries)

    def increment(self, r: ReplicaId) -> Dot:
        """Generate the next dot of replica ``r`` and record it."""
        self._check_replica(r)
        self._entries[r] += 1
        return Dot(self._entries[r], r)

    def contains(self, d: Dot) -> bool:
        self._check_replica(d.replica)
        return d.counter <= self._entries[d.replica]

    def merge(self, other: VersionVector) -> VersionVector:
        self._check_length(other)
        out = VersionVector.__new__(VersionVector)
        out._entries = list(map(max, self._entries, other._entries))
        return out

    def merge_in(self, other: VersionVector) -> None:
        self._check_length(other)
        self._entries = list(map(max, self._entries, other._entries))

    def leq(self, other: VersionVector) -> bool:
        self._check_length(other)
        return all(map(operator.le, self._entries, other._entries))

    def set(self, r: ReplicaId, value: int) -> None:
        """Raise entry ``r`` to ``value``; entries never shrink."""
        self._check_replica(r)
        if value < self._entries[r]:
            raise ConfigurationError(
                f"entry {r} would shrink from {self._entries[r]} to {value}"
            )
        self._entries[r] = value


# Function spellings of the vector operations, for callers that prefer them.

def vv_increment(v: VersionVector, r: ReplicaId) -> Dot:
    return v.increment(r)


def vv_contains(v: VersionVector, d: Dot) -> bool:
    return v.contains(d)


def vv_merge(a: VersionVector, b: VersionVector) -> VersionVector:
    return a.merge(b)


def vv_leq(a: VersionVector, b: VersionVector) -> bool:
    return a.leq(b)


ADD = "add"
REMOVE = "remove"
KINDS = (ADD, REMOVE)


@dataclass(frozen=True)
class UpdateEvent:
    """One update as issued at its source replica.

    ``observed`` holds the ids of every event whose effect had been
    applied at the source before the prepare ran. When that set is
    causally closed it is stored as a ``frontier`` vector instead: event
    ``(k, j)`` was observed iff ``k <= frontier[j]``. ``dot`` is the
    design-level identifier of an add, when the design has one.
    """

    id: Dot
    replica: ReplicaId
    kind: str
    element: str
    observed_ids: frozenset[Dot] | None = None
    dot: Dot | None = None
    frontier: tuple[int, ...] | None = None

    @property
    def observed(self) -> frozenset[Dot]:
        if self.observed_ids is not None:
            return self.observed_ids
        if self.frontier is None:
            return frozenset()
        return frozenset(
            Dot(k, j) for j, top in enumerate(self.frontier) for k in range(1, top + 1)
        )

    def observes(self, eid: Dot) -> bool:
        if self.observed_ids is not None:
            return eid in self.observed_ids
        if self.frontier is None:
            return False
        return eid.counter <= self.frontier[eid.replica]


@dataclass
class History:
    """Append-only record of update events.

    Event ids are dots in their own id space: the ``k``-th update issued
    at replica ``r`` has id ``(k, r)``, whether it is an add or a remove.
    Happens-before is the transitive closure of program order and the
    observation edges.
    """

    replicas: int
    events: dict[Dot, UpdateEvent] = field(default_factory=dict)
    _issued: list[int] = field(init=False, repr=False)
    _ancestors: dict[Dot, frozenset[Dot]] = field(
        init=False, repr=False, default_factory=dict
    )

    def __post_init__(self):
        if self.replicas < 1:
            raise ConfigurationError(f"replica count must be positive, got {self.replicas}")
        self._issued = [0] * self.replicas
        for ev in list(self.events.values()):
            self._issued[ev.replica] = max(self._issued[ev.replica], ev.id.counter)

    def copy(self) -> History:
        out = History.__new__(History)
        out.replicas = self.replicas
        out.events = dict(self.events)
        out._issued = list(self._issued)
        out._ancestors = dict(self._ancestors)
        return out

    def next_id(self, replica: ReplicaId) -> Dot:
        if not 0 <= replica < self.replicas:
            raise InvalidReplicaError(f"replica {replica} out of range")
        return Dot(self._issued[replica] + 1, replica)

    def record(
        self,
        replica: ReplicaId,
        kind: str,
        element: str,
        observed: Iterable[Dot] = (),
        dot: Dot | None = None,
        frontier: Iterable[int] | None = None,
    ) -> UpdateEvent:
        """Append a new event issued at ``replica`` and return it.

        Pass either the explicit ``observed`` ids or, for a causally
        closed observation, its ``frontier`` vector.
        """
        if kind not in KINDS:
            raise ConfigurationError(f"unknown update kind {kind!r}")
        eid = self.next_id(replica)
        if frontier is not None:
            frontier = tuple(frontier)
            if len(frontier) != self.replicas:
                raise ConfigurationError(f"frontier {frontier} has wrong length")
            beyond = [j for j, top in enumerate(frontier) if top > self._issued[j]]
            if beyond:
                raise LookupFailure(f"frontier {frontier} names events not in history")
            ev = UpdateEvent(eid, replica, kind, element, None, dot, frontier)
        else:
            observed = frozenset(observed)
            unknown = observed - self.events.keys()
            if unknown:
                raise LookupFailure(f"observed events not in history: {sorted(unknown)}")
            ev = UpdateEvent(eid, replica, kind, element, observed, dot)
        self.events[eid] = ev
        self._issued[replica] = eid.counter
        return ev

    def __contains__(self, eid: Dot) -> bool:
        return eid in self.events

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[UpdateEvent]:
        # Issue order is not globally recorded; (replica, counter) order is stable.
        return iter(sorted(self.events.values(), key=lambda e: (e.id.replica, e.id.counter)))

    def get(self, eid: Dot) -> UpdateEvent:
        try:
            return self.events[eid]
        except KeyError:
            raise LookupFailure(f"unknown event id {eid}") from None

    def ancestors(self, eid: Dot) -> frozenset[Dot]:
        """All events that happened-before ``eid``."""
        cached = self._ancestors.get(eid)
        if cached is not None:
            return cached
        # Iterative post-order so deep program orders do not hit the recursion limit.
        stack = [eid]
        while stack:
            cur = stack[-1]
            if cur in self._ancestors:
                stack.pop()
                continue
            preds = self._direct_predecessors(cur)
            pending = [p for p in preds if p not in self._ancestors]
            if pending:
                stack.extend(pending)
                continue
            acc = set(preds)
            for p in preds:
                acc |= self._ancestors[p]
            self._ancestors[cur] = frozenset(acc)
            stack.pop()
        return self._ancestors[eid]

    def _direct_predecessors(self, eid: Dot) -> set[Dot]:
        ev = self.get(eid)
        preds = set(ev.observed)
        prev = Dot(eid.counter - 1, eid.replica)
        # A restricted history may have a gap in program order.
        if prev in self.events:
            preds.add(prev)
        return preds

    def hb_before(self, a: Dot, b: Dot) -> bool:
        self.get(a)
        return a in self.ancestors(b)

    def concurrent(self, a: Dot, b: Dot) -> bool:
        return a != b and not self.hb_before(a, b) and not self.hb_before(b, a)

    def restrict(self, ids: Iterable[Dot]) -> History:
        """Sub-history over ``ids``; observation sets are trimmed to match."""
        keep = {i for i in ids if i in self.events}
        sub = History(self.replicas)
        for i in sorted(keep, key=lambda d: (d.replica, d.counter)):
            ev = self.events[i]
            sub.events[i] = UpdateEvent(
                ev.id, ev.replica, ev.kind, ev.element, ev.observed & keep, ev.dot
            )
        sub.__post_init__()
        return sub

    def is_causally_closed(self, ids: Iterable[Dot]) -> bool:
        ids = set(ids)
        return all(self.ancestors(i) <= ids for i in ids)

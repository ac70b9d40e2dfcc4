"""Sequential set semantics, the permutation-equivalence checker and the add-wins oracle.

The checker answers: if every sequential ordering of a batch of updates
ends in the same abstract state, did the replicated execution end there
too? Batches containing both ``add(e)`` and ``remove(e)`` have no
agreed sequential outcome and are reported as not applicable; those
are judged by :func:`add_wins_oracle` instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import AbstractSet, Iterable, NamedTuple

from .causal import ADD, REMOVE, Dot, History
from .errors import EnumerationLimitError

DEFAULT_PERMUTATION_BOUND = 8


class Update(NamedTuple):
    kind: str
    element: str

    def __str__(self) -> str:
        return f"{self.kind}({self.element})"


def add(e: str) -> Update:
    return Update(ADD, e)


def remove(e: str) -> Update:
    return Update(REMOVE, e)


@dataclass(frozen=True)
class Verdict:
    applicable: bool
    expected: frozenset[str] | None = None
    conforms: bool | None = None


def seq_apply(s: AbstractSet[str], u: Update) -> frozenset[str]:
    if u.kind == ADD:
        return frozenset(s) | {u.element}
    if u.kind == REMOVE:
        return frozenset(s) - {u.element}
    raise ValueError(f"unknown update kind {u.kind!r}")


def fold(updates: Iterable[Update], initial: AbstractSet[str] = frozenset()) -> frozenset[str]:
    s = frozenset(initial)
    for u in updates:
        s = seq_apply(s, u)
    return s


def permutation_equivalence_check(
    updates: Iterable[Update],
    observed: AbstractSet[str],
    initial: AbstractSet[str] = frozenset(),
    bound: int = DEFAULT_PERMUTATION_BOUND,
) -> Verdict:
    """Run every total order of ``updates`` from ``initial`` and compare outcomes.

    Duplicate updates are enumerated once per distinct ordering. Raises
    :class:`EnumerationLimitError` when ``len(updates) > bound``.
    """
    updates = list(updates)
    if len(updates) > bound:
        raise EnumerationLimitError(
            f"{len(updates)} updates exceed the permutation bound {bound} "
            f"({math.factorial(len(updates))} orderings)"
        )
    expected = _common_outcome(tuple(sorted(updates)), frozenset(initial))
    if expected is None:
        return Verdict(applicable=False)
    return Verdict(True, expected, frozenset(observed) == expected)


@lru_cache(maxsize=4096)
def _common_outcome(updates: tuple[Update, ...], initial: frozenset[str]) -> frozenset[str] | None:
    # The set of orderings does not depend on input order, so callers pass a sorted batch.
    outcomes = set()
    for order in set(permutations(updates)):
        outcomes.add(fold(order, initial))
        if len(outcomes) > 1:
            return None
    return outcomes.pop() if outcomes else initial


def has_conflict(updates: Iterable[Update]) -> bool:
    """True when some element is both added and removed."""
    added, removed = set(), set()
    for u in updates:
        (added if u.kind == ADD else removed).add(u.element)
    return bool(added & removed)


def add_wins_oracle(h: History, within: AbstractSet[Dot] | None = None) -> frozenset[str]:
    """Abstract state the add-wins set must expose after applying ``h``.

    An add survives unless some remove of the same element observed it
    at its source. Under causal delivery the observed set of an event is
    exactly its happens-before past. ``within`` restricts the history to
    the events a particular replica has applied.
    """
    events = h.events.values() if within is None else [h.events[i] for i in within]
    removes: dict[str, list] = {}
    for ev in events:
        if ev.kind == REMOVE:
            removes.setdefault(ev.element, []).append(ev)
    out = set()
    for ev in events:
        if ev.kind != ADD or ev.element in out:
            continue
        if not any(r.observes(ev.id) for r in removes.get(ev.element, ())):
            out.add(ev.element)
    return frozenset(out)


def hb_add_wins_oracle(h: History) -> frozenset[str]:
    """Variant of :func:`add_wins_oracle` that cancels along transitive happens-before.

    Agrees with :func:`add_wins_oracle` on causally delivered histories.
    """
    removes = [ev for ev in h.events.values() if ev.kind == REMOVE]
    out = set()
    for ev in h.events.values():
        if ev.kind != ADD or ev.element in out:
            continue
        if not any(r.element == ev.element and h.hb_before(ev.id, r.id) for r in removes):
            out.add(ev.element)
    return frozenset(out)


def oracle_applicable_note(updates: Iterable[Update]) -> str:
    """Say which resolution rule decides the outcome of ``updates``."""
    updates = list(updates)
    if not updates:
        return "empty history, S = {}"
    if has_conflict(updates):
        clashing = sorted(
            {u.element for u in updates if u.kind == ADD}
            & {u.element for u in updates if u.kind == REMOVE}
        )
        return (
            f"add-wins row of the concurrent resolution table for {', '.join(clashing)}: "
            "permutations disagree, a concurrent add keeps the element "
            "(error-mark, remove-wins and LWW rows are not implemented)"
        )
    return "no conflict: every sequential permutation agrees"

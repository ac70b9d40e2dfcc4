"""Exhaustive schedule enumeration and the conformance suite built on it.

A *program* assigns a short list of updates to each replica. For every
program, :func:`enumerate_schedules` yields one scenario per maximal
interleaving of its steps (issue an update, deliver a message, merge
two replicas), counted up to commutation of independent steps: two
steps commute when they touch disjoint replicas and neither enables
the other. Each class is represented by its lexicographically least
word, which is what the depth-first search below emits.

Programs are taken up to renaming of replicas and of elements.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

from .causal import ADD, KINDS, REMOVE
from .errors import EnumerationLimitError
from .sim import (
    MERGEABLE,
    Check,
    Deliver,
    Merge,
    Op,
    RunReport,
    Scenario,
    Simulator,
    SyncAll,
    run,
)

MAX_OPS = 5
MAX_REPLICAS = 3
DEFAULT_ELEMENTS = ("a", "b")

Program = tuple[tuple[tuple[str, str], ...], ...]
Letter = tuple


def check_bounds(ops_bound: int, replicas: int) -> None:
    if not 1 <= replicas <= MAX_REPLICAS:
        raise EnumerationLimitError(f"replicas must be in 1..{MAX_REPLICAS}, got {replicas}")
    if not 1 <= ops_bound <= MAX_OPS:
        raise EnumerationLimitError(f"ops bound must be in 1..{MAX_OPS}, got {ops_bound}")


def _canonical(program: Program, elements: Sequence[str]) -> Program:
    best = None
    for perm in itertools.permutations(elements):
        rename = dict(zip(elements, perm))
        renamed = [tuple((k, rename[e]) for k, e in lane) for lane in program]
        for order in itertools.permutations(renamed):
            if best is None or order < best:
                best = order
    return best


def programs(ops_bound: int, replicas: int, elements: Sequence[str] = DEFAULT_ELEMENTS) -> list[Program]:
    """Canonical programs with 1..ops_bound updates over ``replicas`` lanes."""
    check_bounds(ops_bound, replicas)
    updates = [(k, e) for k in KINDS for e in elements]
    out = []
    for total in range(1, ops_bound + 1):
        for lengths in itertools.product(range(total + 1), repeat=replicas):
            if sum(lengths) != total:
                continue
            lanes = [itertools.product(updates, repeat=n) for n in lengths]
            for combo in itertools.product(*[list(l) for l in lanes]):
                prog = tuple(tuple(lane) for lane in combo)
                if _canonical(prog, elements) == prog:
                    out.append(prog)
    return out


def _touches(letter: Letter) -> tuple[int, ...]:
    if letter[0] == "op":
        return (letter[1],)
    if letter[0] == "dlv":
        return (letter[3],)
    return (letter[1], letter[2])


def dependent(a: Letter, b: Letter) -> bool:
    if set(_touches(a)) & set(_touches(b)):
        return True
    for x, y in ((a, b), (b, a)):
        if x[0] == "dlv" and y[0] == "op" and x[1:3] == y[1:3]:
            return True
    return False


@dataclass
class _Model:
    """Event-level abstraction of a run: which update ids each replica has applied."""

    program: Program
    causal: bool
    mergeable: bool
    issued: list[int] = field(default_factory=list)
    applied: list[frozenset] = field(default_factory=list)
    deps: dict = field(default_factory=dict)
    delivered: set = field(default_factory=set)

    def __post_init__(self):
        n = len(self.program)
        self.issued = [0] * n
        self.applied = [frozenset()] * n

    def enabled(self) -> list[Letter]:
        n = len(self.program)
        out = []
        for r in range(n):
            if self.issued[r] < len(self.program[r]):
                out.append(("op", r, self.issued[r]))
        for (r, k), deps in self.deps.items():
            for t in range(n):
                if t == r or (r, k, t) in self.delivered or (r, k) in self.applied[t]:
                    continue
                if self.causal and not deps <= self.applied[t]:
                    continue
                out.append(("dlv", r, k, t))
        if self.mergeable:
            for j in range(n):
                for i in range(n):
                    if i != j and not self.applied[j] <= self.applied[i]:
                        out.append(("mrg", j, i))
        return sorted(out)

    def apply(self, letter: Letter):
        """Apply ``letter`` and return an undo record."""
        if letter[0] == "op":
            _, r, k = letter
            self.deps[(r, k)] = self.applied[r]
            self.issued[r] += 1
            old = self.applied[r]
            self.applied[r] = old | {(r, k)}
            return ("op", r, k, old)
        if letter[0] == "dlv":
            _, r, k, t = letter
            self.delivered.add((r, k, t))
            old = self.applied[t]
            self.applied[t] = old | {(r, k)}
            return ("dlv", r, k, t, old)
        _, j, i = letter
        old = self.applied[i]
        self.applied[i] = old | self.applied[j]
        return ("mrg", i, old)

    def undo(self, rec) -> None:
        if rec[0] == "op":
            _, r, k, old = rec
            del self.deps[(r, k)]
            self.issued[r] -= 1
            self.applied[r] = old
        elif rec[0] == "dlv":
            _, r, k, t, old = rec
            self.delivered.discard((r, k, t))
            self.applied[t] = old
        else:
            _, i, old = rec
            self.applied[i] = old


def traces(program: Program, causal: bool = True, mergeable: bool = True) -> Iterator[list[Letter]]:
    """Lexicographic normal forms of all maximal step sequences of ``program``."""
    model = _Model(program, causal, mergeable)
    word: list[Letter] = []

    def in_normal_form(a: Letter) -> bool:
        for b in reversed(word):
            if dependent(a, b):
                return True
            if a < b:
                return False
        return True

    def dfs():
        options = model.enabled()
        if not options:
            yield list(word)
            return
        for a in options:
            if not in_normal_form(a):
                continue
            rec = model.apply(a)
            word.append(a)
            yield from dfs()
            word.pop()
            model.undo(rec)

    yield from dfs()


def to_scenario(
    program: Program, word: Sequence[Letter], design: str, delivery: str, seed: int = 0
) -> Scenario:
    n = len(program)
    ids: dict[tuple[int, int, int], int] = {}
    next_id = 0
    events = []
    for letter in word:
        if letter[0] == "op":
            _, r, k = letter
            kind, element = program[r][k]
            events.append(Op(r, kind, element))
            for t in range(n):
                if t != r:
                    ids[(r, k, t)] = next_id
                    next_id += 1
        elif letter[0] == "dlv":
            _, r, k, t = letter
            events.append(Deliver(t, ids[(r, k, t)]))
        else:
            events.append(Merge(letter[1], letter[2]))
    events += [SyncAll(), Check("oracle"), Check("permutation"), Check("converged")]
    return Scenario(design, n, events, seed, delivery)


_CLOSING = (SyncAll(), Check("oracle"), Check("permutation"), Check("converged"))


def walk_traces(
    program: Program,
    design: str,
    delivery: str,
    visit: Callable[[list[Letter], RunReport], None],
    seed: int = 0,
) -> None:
    """Run every trace of ``program``, sharing simulator state across common prefixes.

    Calls ``visit(word, report)`` with the same pairs as running
    ``to_scenario(program, word, ...)`` for each word of :func:`traces`,
    but each prefix is executed once and forked where the search branches.
    """
    n = len(program)
    causal = delivery == "causal"
    model = _Model(program, causal, design in MERGEABLE)
    word: list[Letter] = []
    ids: dict[tuple[int, int, int], int] = {}
    shell = Scenario(design, n, [], seed, delivery)
    ops = [[Op(r, kind, element) for kind, element in lane] for r, lane in enumerate(program)]

    def in_normal_form(a: Letter) -> bool:
        for b in reversed(word):
            if dependent(a, b):
                return True
            if a < b:
                return False
        return True

    def step(sim: Simulator, a: Letter) -> None:
        if a[0] == "op":
            _, r, k = a
            first = sim._next_message
            for j, t in enumerate(t for t in range(n) if t != r):
                ids[(r, k, t)] = first + j
            ev = ops[r][k]
            sim.op(ev.replica, ev.kind, ev.element)
        elif a[0] == "dlv":
            _, r, k, t = a
            sim.deliver(t, ids[(r, k, t)])
        else:
            sim.merge(a[1], a[2])

    def dfs(sim: Simulator) -> None:
        enabled = model.enabled()
        if not enabled:
            base = len(word)
            for j, ev in enumerate(_CLOSING):
                sim.step(base + j, ev)
            visit(list(word), sim.finish(base + len(_CLOSING)))
            return
        # Non-maximal prefixes whose extensions are all out of normal form are dead ends.
        options = [a for a in enabled if in_normal_form(a)]
        last = len(options) - 1
        for pos, a in enumerate(options):
            child = sim if pos == last else sim.fork()
            rec = model.apply(a)
            step(child, a)
            word.append(a)
            dfs(child)
            word.pop()
            model.undo(rec)

    dfs(Simulator(shell))


def execute_traces(
    program: Program, design: str, delivery: str, seed: int = 0
) -> Iterator[tuple[list[Letter], RunReport]]:
    """Generator form of :func:`walk_traces`."""
    out: list[tuple[list[Letter], RunReport]] = []
    walk_traces(program, design, delivery, lambda w, r: out.append((w, r)), seed)
    yield from out


def enumerate_schedules(
    design: str,
    ops_bound: int,
    replicas: int,
    delivery: str = "causal",
    elements: Sequence[str] = DEFAULT_ELEMENTS,
) -> Iterator[Scenario]:
    """Every canonical program with every interleaving class, in a fixed order."""
    check_bounds(ops_bound, replicas)
    mergeable = design in MERGEABLE
    for prog in programs(ops_bound, replicas, elements):
        for word in traces(prog, delivery == "causal", mergeable):
            yield to_scenario(prog, word, design, delivery)


def count_schedules(design: str, ops_bound: int, replicas: int, delivery: str = "causal",
                    elements: Sequence[str] = DEFAULT_ELEMENTS) -> int:
    check_bounds(ops_bound, replicas)
    mergeable = design in MERGEABLE
    return sum(
        1
        for prog in programs(ops_bound, replicas, elements)
        for _ in traces(prog, delivery == "causal", mergeable)
    )


# --------------------------------------------------------------------------
# Suite

@dataclass
class SuiteResult:
    design: str
    delivery: str
    ops_bound: int
    replicas: int
    schedules: int = 0
    passed: int = 0
    failed: int = 0
    permutation_applicable: int = 0
    permutation_violations: int = 0
    oracle_failures: int = 0
    convergence_failures: int = 0
    first_failure: Scenario | None = field(default=None, repr=False)

    def row(self) -> dict:
        return {
            "design": self.design,
            "delivery": self.delivery,
            "ops_bound": self.ops_bound,
            "replicas": self.replicas,
            "schedules": self.schedules,
            "passed": self.passed,
            "failed": self.failed,
            "oracle_failures": self.oracle_failures,
            "convergence_failures": self.convergence_failures,
            "permutation_applicable": self.permutation_applicable,
            "permutation_violations": self.permutation_violations,
        }


def tally(result: SuiteResult, scenario: Scenario, report: RunReport) -> None:
    result.schedules += 1
    if report.passed:
        result.passed += 1
    else:
        result.failed += 1
        if result.first_failure is None:
            result.first_failure = scenario
    for c in report.checks:
        if c.check == "permutation" and c.applicable:
            result.permutation_applicable += 1
            result.permutation_violations += not c.passed
        elif c.check == "oracle":
            result.oracle_failures += not c.passed
        elif c.check in ("converged", "final-converged"):
            result.convergence_failures += not c.passed


def delivery_modes(design: str) -> tuple[str, ...]:
    """Delivery disciplines a design is exercised under."""
    return ("causal",) if design == "opt-or-set" else ("causal", "any-order")


def run_suite(design: str, ops_bound: int, replicas: int, delivery: str = "causal",
              elements: Sequence[str] = DEFAULT_ELEMENTS) -> SuiteResult:
    check_bounds(ops_bound, replicas)
    result = SuiteResult(design, delivery, ops_bound, replicas)
    for prog in programs(ops_bound, replicas, elements):
        def visit(word, report, prog=prog):
            # The scenario is only materialized when it is worth keeping.
            sc = to_scenario(prog, word, design, delivery) if not report.passed else None
            tally(result, sc, report)

        walk_traces(prog, design, delivery, visit)
    return result


__all__ = [
    "ADD",
    "REMOVE",
    "SuiteResult",
    "check_bounds",
    "count_schedules",
    "delivery_modes",
    "enumerate_schedules",
    "execute_traces",
    "walk_traces",
    "programs",
    "run_suite",
    "traces",
]

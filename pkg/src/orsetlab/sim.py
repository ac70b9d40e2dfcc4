"""Deterministic replica-network simulator.

A :class:`Scenario` is a fixed replica count, a design, a delivery
discipline and an ordered list of events. Running it executes every
update as a prepare/effect pair: the prepare runs at the source, the
effect is applied there at once and queued as one message per other
replica. Messages are applied downstream by ``deliver`` events, and
designs with a state merge can also exchange whole payloads.

Everything is driven by a seeded :class:`random.Random`, and every
random choice is made over id-sorted candidates, so a run is a pure
function of its scenario.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, NamedTuple, Union

from .causal import ADD, KINDS, REMOVE, Dot, History, VersionVector
from .errors import (
    ConfigurationError,
    DeliveryContractError,
    EnumerationLimitError,
    LookupFailure,
    OrsetLabError,
    ScenarioError,
)
from .legacy import CSet, RegisterCart
from .opt_orset import OptORSet
from .orset import ORSet
from .semantics import Update, add_wins_oracle, permutation_equivalence_check

DESIGNS = ("or-set", "opt-or-set", "cart", "c-set")
MERGEABLE = frozenset({"or-set", "opt-or-set", "cart"})
DELIVERIES = ("causal", "any-order")
CHECKS = ("oracle", "permutation", "converged")
NEXT = "next-deliverable"


# --------------------------------------------------------------------------
# Scenario model

@dataclass(frozen=True)
class Op:
    replica: int
    kind: str
    element: str


@dataclass(frozen=True)
class Deliver:
    replica: int
    message: Union[int, str] = NEXT


@dataclass(frozen=True)
class Merge:
    source: int
    target: int


@dataclass(frozen=True)
class SyncAll:
    pass


@dataclass(frozen=True)
class Check:
    check: str


ScenarioEvent = Union[Op, Deliver, Merge, SyncAll, Check]


def event_to_dict(ev: ScenarioEvent) -> dict:
    if isinstance(ev, Op):
        return {"type": "op", "replica": ev.replica, "kind": ev.kind, "element": ev.element}
    if isinstance(ev, Deliver):
        return {"type": "deliver", "message": ev.message, "replica": ev.replica}
    if isinstance(ev, Merge):
        return {"type": "merge", "from": ev.source, "to": ev.target}
    if isinstance(ev, SyncAll):
        return {"type": "sync-all"}
    return {"type": "check", "check": ev.check}


def _require(obj: dict, key: str, index: int | None, kind=None):
    if key not in obj:
        raise ScenarioError(f"missing field {key!r}", index)
    value = obj[key]
    if kind is not None and (not isinstance(value, kind) or isinstance(value, bool)):
        raise ScenarioError(f"field {key!r} has wrong type: {value!r}", index)
    return value


def event_from_dict(obj: Any, index: int) -> ScenarioEvent:
    if not isinstance(obj, dict):
        raise ScenarioError("event must be an object", index)
    kind = _require(obj, "type", index, str)
    if kind == "op":
        return Op(
            _require(obj, "replica", index, int),
            _require(obj, "kind", index, str),
            _require(obj, "element", index, str),
        )
    if kind == "deliver":
        message = obj.get("message", NEXT)
        if not (isinstance(message, int) and not isinstance(message, bool)) and message != NEXT:
            raise ScenarioError(f"message must be an id or {NEXT!r}, got {message!r}", index)
        return Deliver(_require(obj, "replica", index, int), message)
    if kind == "merge":
        return Merge(_require(obj, "from", index, int), _require(obj, "to", index, int))
    if kind == "sync-all":
        return SyncAll()
    if kind == "check":
        return Check(_require(obj, "check", index, str))
    raise ScenarioError(f"unknown event type {kind!r}", index)


@dataclass
class Scenario:
    design: str
    replicas: int
    events: list[ScenarioEvent] = field(default_factory=list)
    seed: int = 0
    delivery: str = "causal"
    duplicates: bool = False

    def validate(self) -> None:
        if self.design not in DESIGNS:
            raise ScenarioError(f"unknown design {self.design!r}; expected one of {DESIGNS}")
        if not isinstance(self.replicas, int) or self.replicas < 1:
            raise ScenarioError(f"replicas must be a positive integer, got {self.replicas!r}")
        if self.delivery not in DELIVERIES:
            raise ScenarioError(f"unknown delivery {self.delivery!r}")
        if self.design == "opt-or-set" and self.delivery != "causal":
            raise ScenarioError("opt-or-set requires causal delivery")
        if self.design == "c-set" and self.duplicates:
            raise ScenarioError("c-set effects must be delivered at most once")
        n = self.replicas
        for i, ev in enumerate(self.events):
            if isinstance(ev, Op):
                if not 0 <= ev.replica < n:
                    raise ScenarioError(f"replica {ev.replica} out of range", i)
                if ev.kind not in KINDS:
                    raise ScenarioError(f"unknown update kind {ev.kind!r}", i)
            elif isinstance(ev, Deliver):
                if not 0 <= ev.replica < n:
                    raise ScenarioError(f"replica {ev.replica} out of range", i)
                if isinstance(ev.message, int) and ev.message < 0:
                    raise ScenarioError(f"negative message id {ev.message}", i)
            elif isinstance(ev, Merge):
                if self.design not in MERGEABLE:
                    raise ScenarioError(f"design {self.design} has no merge", i)
                if not (0 <= ev.source < n and 0 <= ev.target < n):
                    raise ScenarioError("merge replica out of range", i)
                if ev.source == ev.target:
                    raise ScenarioError("merge source and target are the same replica", i)
            elif isinstance(ev, Check):
                if ev.check not in CHECKS:
                    raise ScenarioError(f"unknown check {ev.check!r}", i)

    def to_dict(self) -> dict:
        return {
            "design": self.design,
            "replicas": self.replicas,
            "seed": self.seed,
            "delivery": self.delivery,
            "faults": {"duplicates": self.duplicates},
            "events": [event_to_dict(e) for e in self.events],
        }

    @classmethod
    def from_dict(cls, obj: Any) -> Scenario:
        if not isinstance(obj, dict):
            raise ScenarioError("scenario must be a JSON object")
        faults = obj.get("faults", {})
        if not isinstance(faults, dict):
            raise ScenarioError("faults must be an object")
        events = _require(obj, "events", None, list)
        sc = cls(
            design=_require(obj, "design", None, str),
            replicas=_require(obj, "replicas", None, int),
            events=[event_from_dict(e, i) for i, e in enumerate(events)],
            seed=obj.get("seed", 0),
            delivery=obj.get("delivery", "causal"),
            duplicates=bool(faults.get("duplicates", False)),
        )
        if not isinstance(sc.seed, int) or isinstance(sc.seed, bool):
            raise ScenarioError(f"seed must be an integer, got {sc.seed!r}")
        sc.validate()
        return sc

    @classmethod
    def loads(cls, text: str, source: str = "<string>") -> Scenario:
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
        return cls.from_dict(obj)

    @classmethod
    def load(cls, path: str | Path) -> Scenario:
        path = Path(path)
        return cls.loads(path.read_text(), str(path))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


# --------------------------------------------------------------------------
# Design adapters: one uniform surface over the four payload types.

class _Design:
    name: str
    mergeable = True

    def initial(self, n: int):
        raise NotImplementedError

    def prepare(self, rep: _Replica, kind: str, element: str):
        """Return ``(effect, dot)``; ``dot`` is the add's identifier or None."""
        raise NotImplementedError

    def apply(self, state, effect) -> None:
        state.apply(effect)

    def merge_in(self, state, other) -> None:
        state.merge_in(other)

    def sizes(self, state) -> tuple[int, int, int]:
        raise NotImplementedError


class _ORSetDesign(_Design):
    name = "or-set"

    def initial(self, n):
        return ORSet()

    def prepare(self, rep, kind, element):
        if kind == ADD:
            eff = rep.state.add_prepare(element, lambda: rep.tags.increment(rep.index))
            return eff, eff.dot
        return rep.state.remove_prepare(element), None

    def sizes(self, state):
        return len(state.entries), len(state.tombstones), 0


class _OptORSetDesign(_Design):
    name = "opt-or-set"

    def initial(self, n):
        return OptORSet.empty(n)

    def prepare(self, rep, kind, element):
        if kind == ADD:
            eff = rep.state.add_prepare(element, rep.index)
            return eff, eff.dot
        return rep.state.remove_prepare(element), None

    def sizes(self, state):
        return len(state.entries), 0, len(state.vector)


class _CartDesign(_Design):
    name = "cart"

    def initial(self, n):
        return RegisterCart(n)

    def prepare(self, rep, kind, element):
        return rep.state.prepare(rep.index, kind, element), None

    def sizes(self, state):
        return len(state.siblings), 0, state.n


class _CSetDesign(_Design):
    name = "c-set"
    mergeable = False

    def initial(self, n):
        return CSet()

    def prepare(self, rep, kind, element):
        return rep.state.prepare(kind, element), None

    def merge_in(self, state, other):
        raise ConfigurationError("c-set has no merge")

    def sizes(self, state):
        return len(state.counts), 0, 0


_ADAPTERS = {d.name: d for d in (_ORSetDesign(), _OptORSetDesign(), _CartDesign(), _CSetDesign())}


def design_adapter(name: str) -> _Design:
    try:
        return _ADAPTERS[name]
    except KeyError:
        raise ConfigurationError(f"unknown design {name!r}") from None


# --------------------------------------------------------------------------
# Run state

@dataclass
class _Replica:
    index: int
    state: Any
    applied: set[Dot]
    seen: VersionVector
    tags: VersionVector
    duplicates: list[_Message] = field(default_factory=list)


class _Message(NamedTuple):
    id: int
    event: Dot
    source: int
    target: int
    effect: Any
    deps: VersionVector


@dataclass(frozen=True)
class CheckResult:
    index: int
    check: str
    passed: bool
    applicable: bool = True
    detail: str = ""


@dataclass(frozen=True)
class Sample:
    round: int
    replica: int
    e_size: int
    t_size: int
    vector_len: int
    elements: int


@dataclass
class RunReport:
    design: str
    replicas: int
    seed: int
    delivery: str
    duplicates: bool
    checks: list[CheckResult] = field(default_factory=list)
    samples: list[Sample] = field(default_factory=list)
    checkpoints: list[list[list[str]]] = field(default_factory=list)
    final_elements: list[list[str]] = field(default_factory=list)
    final_payloads: list[dict] = field(default_factory=list)
    stats: dict[str, int] = field(default_factory=dict)
    history: History | None = field(default=None, repr=False, compare=False)
    log: list[tuple] = field(default_factory=list, repr=False, compare=False)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "design": self.design,
            "replicas": self.replicas,
            "seed": self.seed,
            "delivery": self.delivery,
            "duplicates": self.duplicates,
            "checks": [asdict(c) for c in self.checks],
            "samples": [asdict(s) for s in self.samples],
            "checkpoints": self.checkpoints,
            "final_elements": self.final_elements,
            "final_payloads": self.final_payloads,
            "stats": self.stats,
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


class Simulator:
    """Executes one scenario; single use.

    Steps can also be driven one at a time through :meth:`step` and
    closed with :meth:`finish`; :meth:`fork` copies a partially executed
    run so that schedules sharing a prefix need not replay it.
    """

    def __init__(self, scenario: Scenario, check_invariants: bool = True):
        scenario.validate()
        self.sc = scenario
        self.design = design_adapter(scenario.design)
        self.causal = scenario.delivery == "causal"
        self._rng: random.Random | None = None
        self.check_invariants = check_invariants
        n = scenario.replicas
        self.history = History(n)
        self.replicas = [
            _Replica(r, self.design.initial(n), set(), VersionVector.zeros(n), VersionVector.zeros(n))
            for r in range(n)
        ]
        self.in_flight: dict[int, _Message] = {}
        self._next_message = 0
        # Quiescent points: (events applied everywhere, replica 0 elements there).
        self._boundaries: list[tuple[frozenset[Dot], frozenset[str]]] = [(frozenset(), frozenset())]
        self._syncs = 0
        self.log: list[tuple] = []
        self.report = RunReport(
            scenario.design, n, scenario.seed, scenario.delivery, scenario.duplicates,
            stats={"ops": 0, "messages": 0, "deliveries": 0, "redundant": 0,
                   "duplicates": 0, "merges": 0, "skipped": 0},
            history=self.history, log=self.log,
        )
        self._sample()

    def fork(self) -> Simulator:
        other = Simulator.__new__(Simulator)
        other.sc = self.sc
        other.design = self.design
        other.causal = self.causal
        other.check_invariants = self.check_invariants
        other._rng = None
        if self._rng is not None:
            other._rng = random.Random()
            other._rng.setstate(self._rng.getstate())
        other.history = self.history.copy()
        other.replicas = [
            _Replica(r.index, r.state.copy(), set(r.applied), r.seen.copy(), r.tags.copy(),
                     list(r.duplicates))
            for r in self.replicas
        ]
        other.in_flight = dict(self.in_flight)
        other._next_message = self._next_message
        other._boundaries = list(self._boundaries)
        other._syncs = self._syncs
        other.log = list(self.log)
        rep = self.report
        other.report = RunReport(
            rep.design, rep.replicas, rep.seed, rep.delivery, rep.duplicates,
            list(rep.checks), list(rep.samples), list(rep.checkpoints),
            list(rep.final_elements), list(rep.final_payloads), dict(rep.stats),
            history=other.history, log=other.log,
        )
        return other

    @property
    def rng(self) -> random.Random:
        # Seeding is comparatively slow and many runs never draw.
        if self._rng is None:
            self._rng = random.Random(self.sc.seed)
        return self._rng

    # -- primitive steps ----------------------------------------------------

    def _validate_replica(self, rep: _Replica) -> None:
        if self.check_invariants:
            rep.state.check_invariants()

    def op(self, r: int, kind: str, element: str) -> None:
        rep = self.replicas[r]
        self._flush_duplicates(rep)
        deps = rep.seen.copy()
        effect, dot = self.design.prepare(rep, kind, element)
        if self.causal:
            ev = self.history.record(r, kind, element, dot=dot, frontier=deps.as_tuple())
        else:
            ev = self.history.record(r, kind, element, rep.applied, dot)
        self.design.apply(rep.state, effect)
        rep.applied.add(ev.id)
        rep.seen.set(r, ev.id.counter)
        self._validate_replica(rep)
        self.report.stats["ops"] += 1
        self.log.append(("op", r, ev.id))
        for t in range(self.sc.replicas):
            if t != r:
                msg = _Message(self._next_message, ev.id, r, t, effect, deps)
                self.in_flight[msg.id] = msg
                self._next_message += 1
                self.report.stats["messages"] += 1

    def deliverable(self, msg: _Message) -> bool:
        if not self.causal:
            return True
        return msg.deps.leq(self.replicas[msg.target].seen)

    def _apply_message(self, msg: _Message, duplicate: bool = False) -> None:
        rep = self.replicas[msg.target]
        if msg.event in rep.applied and not duplicate:
            self.report.stats["redundant"] += 1
        self.design.apply(rep.state, msg.effect)
        rep.applied.add(msg.event)
        if rep.seen[msg.event.replica] < msg.event.counter:
            rep.seen.set(msg.event.replica, msg.event.counter)
        self._validate_replica(rep)
        self.log.append(("dup" if duplicate else "deliver", msg.event, msg.target))

    def deliver(self, target: int, message: int | str = NEXT) -> bool:
        """Deliver one message at ``target``; returns False if nothing was deliverable."""
        if message == NEXT:
            pool = sorted(
                (m for m in self.in_flight.values() if m.target == target and self.deliverable(m)),
                key=lambda m: m.id,
            )
            if not pool:
                self.report.stats["skipped"] += 1
                return False
            msg = self.rng.choice(pool)
        else:
            msg = self.in_flight.get(message)
            if msg is None:
                raise LookupFailure(f"message {message} is not in flight")
            if msg.target != target:
                raise ConfigurationError(
                    f"message {message} is addressed to replica {msg.target}, not {target}"
                )
            if not self.deliverable(msg):
                raise DeliveryContractError(
                    f"message {message} ({msg.event}) is not causally deliverable at replica {target}"
                )
        del self.in_flight[msg.id]
        self._apply_message(msg)
        self.report.stats["deliveries"] += 1
        if self.sc.duplicates:
            self.replicas[target].duplicates.append(msg)
        return True

    def _flush_duplicates(self, rep: _Replica) -> None:
        pending, rep.duplicates = rep.duplicates, []
        for msg in pending:
            self._apply_message(msg, duplicate=True)
            self.report.stats["duplicates"] += 1

    def merge(self, source: int, target: int, validate: bool = True) -> None:
        if not self.design.mergeable:
            raise ConfigurationError(f"design {self.sc.design} has no merge")
        src, dst = self.replicas[source], self.replicas[target]
        self.design.merge_in(dst.state, src.state)
        dst.applied |= src.applied
        dst.seen.merge_in(src.seen)
        if validate:
            self._validate_replica(dst)
        self.report.stats["merges"] += 1
        self.log.append(("merge", source, target))

    def sync_all(self) -> None:
        for rep in self.replicas:
            self._flush_duplicates(rep)
        if self.causal:
            while self.in_flight:
                msg = next(
                    (m for _, m in sorted(self.in_flight.items()) if self.deliverable(m)), None
                )
                if msg is None:
                    raise DeliveryContractError("in-flight messages can never become deliverable")
                self.deliver(msg.target, msg.id)
        else:
            order = sorted(self.in_flight)
            if len(order) > 1:
                self.rng.shuffle(order)
            for mid in order:
                self.deliver(self.in_flight[mid].target, mid)
        for rep in self.replicas:
            self._flush_duplicates(rep)
        if self.design.mergeable:
            n = self.sc.replicas
            for i in range(n):
                for j in range(n):
                    if i != j:
                        self.merge(j, i, validate=False)
                self._validate_replica(self.replicas[i])
        self._syncs += 1
        if len(self.history) > len(self._boundaries[-1][0]):
            self._boundaries.append((frozenset(self.history.events), self.elements(0)))
        self._sample()
        self.report.checkpoints.append([sorted(self.elements(r)) for r in range(self.sc.replicas)])

    # -- observation ----------------------------------------------------------

    def elements(self, r: int) -> frozenset[str]:
        return self.replicas[r].state.elements()

    def _sample(self) -> None:
        for rep in self.replicas:
            e, t, v = self.design.sizes(rep.state)
            self.report.samples.append(Sample(self._syncs, rep.index, e, t, v, len(rep.state.elements())))

    def check(self, index: int, kind: str) -> CheckResult:
        if kind == "oracle":
            result = self._check_oracle(index)
        elif kind == "converged":
            result = self._check_converged(index, kind)
        elif kind == "permutation":
            result = self._check_permutation(index)
        else:
            raise ConfigurationError(f"unknown check {kind!r}")
        self.report.checks.append(result)
        return result

    def _check_oracle(self, index: int) -> CheckResult:
        bad = []
        for rep in self.replicas:
            expected = add_wins_oracle(self.history, rep.applied)
            got = rep.state.elements()
            if got != expected:
                bad.append(f"replica {rep.index}: {_fmt(got)} != add-wins {_fmt(expected)}")
        return CheckResult(index, "oracle", not bad, True, "; ".join(bad))

    def _check_converged(self, index: int, label: str) -> CheckResult:
        views = [self.elements(r) for r in range(self.sc.replicas)]
        ok = all(v == views[0] for v in views)
        detail = "" if ok else " vs ".join(_fmt(v) for v in views)
        return CheckResult(index, label, ok, True, detail)

    def _check_permutation(self, index: int) -> CheckResult:
        """Judge the updates of the current epoch against their sequential permutations.

        An epoch is the batch of updates between two quiescent points, all of
        which happen after every update of earlier epochs. A check placed
        right after a ``sync-all`` judges the epoch that sync closed.
        """
        start_ids, start_state = self._boundaries[-1]
        if len(self.history) == len(start_ids) and len(self._boundaries) > 1:
            start_ids, start_state = self._boundaries[-2]
        epoch = [ev for ev in self.history if ev.id not in start_ids]
        updates = [Update(ev.kind, ev.element) for ev in epoch]
        ids = {ev.id for ev in epoch}
        complete = [rep for rep in self.replicas if ids <= rep.applied]
        if not complete:
            return CheckResult(index, "permutation", True, False, "no replica has applied every update")
        first = complete[0]
        try:
            verdict = permutation_equivalence_check(updates, first.state.elements(), start_state)
        except EnumerationLimitError as exc:
            return CheckResult(index, "permutation", True, False, str(exc))
        if not verdict.applicable:
            return CheckResult(index, "permutation", True, False, "sequential permutations disagree")
        bad = [
            f"replica {rep.index}: {_fmt(got)} != permutation result {_fmt(verdict.expected)}"
            for rep in complete
            if (got := rep.state.elements()) != verdict.expected
        ]
        return CheckResult(index, "permutation", not bad, True, "; ".join(bad))

    # -- driver -----------------------------------------------------------------

    def step(self, index: int, ev: ScenarioEvent) -> None:
        kind = type(ev)
        if kind is Op:
            self.op(ev.replica, ev.kind, ev.element)
        elif kind is Deliver:
            self.deliver(ev.replica, ev.message)
        elif kind is Merge:
            self.merge(ev.source, ev.target)
        elif kind is SyncAll:
            self.sync_all()
        elif kind is Check:
            self.check(index, ev.check)
        else:
            raise ScenarioError(f"unknown event {ev!r}", index)

    def execute(self) -> RunReport:
        for i, ev in enumerate(self.sc.events):
            try:
                self.step(i, ev)
            except OrsetLabError as exc:
                if getattr(exc, "index", None) is None:
                    exc.index = i
                    exc.args = (f"event {i}: {exc.args[0] if exc.args else exc}",)
                raise
        return self.finish(len(self.sc.events))

    def finish(self, index: int) -> RunReport:
        """Drain anything in flight, run the final convergence check and seal the report."""
        if self.in_flight or any(rep.duplicates for rep in self.replicas):
            self.sync_all()
        self.report.checks.append(self._check_converged(index, "final-converged"))
        self.report.final_elements = [sorted(self.elements(r)) for r in range(self.sc.replicas)]
        self.report.final_payloads = [rep.state.payload() for rep in self.replicas]
        return self.report


def _fmt(s: Iterable[str]) -> str:
    return "{" + ", ".join(sorted(s)) + "}"


def run(scenario: Scenario, check_invariants: bool = True) -> RunReport:
    return Simulator(scenario, check_invariants).execute()


def validate_causal_log(report: RunReport) -> list[str]:
    """Replay a run's log and list every delivery that preceded one of its causes.

    Works from the recorded history's happens-before relation, not from the
    dependency vectors the simulator used to schedule.
    """
    h = report.history
    applied: list[set[Dot]] = [set() for _ in range(report.replicas)]
    problems = []
    for entry in report.log:
        if entry[0] == "op":
            _, r, eid = entry
            missing = h.ancestors(eid) - applied[r] - {eid}
            if missing:
                problems.append(f"{eid} issued at {r} without {sorted(missing)}")
            applied[r].add(eid)
        elif entry[0] in ("deliver", "dup"):
            _, eid, t = entry
            missing = h.ancestors(eid) - applied[t]
            if missing:
                problems.append(f"{eid} delivered at {t} before {sorted(missing)}")
            applied[t].add(eid)
        elif entry[0] == "merge":
            _, s, t = entry
            applied[t] |= applied[s]
    return problems


# --------------------------------------------------------------------------
# Scenario generators

def random_scenario(
    seed: int,
    design: str = "or-set",
    replicas: int = 3,
    updates: int = 30,
    elements: Iterable[str] = ("a", "b", "c"),
    delivery: str = "causal",
    duplicates: bool = False,
    merges: bool = True,
    checkpoint_every: int = 10,
) -> Scenario:
    """Seeded random workload with a quiescent checkpoint every ``checkpoint_every`` updates."""
    rng = random.Random(seed)
    elements = list(elements)
    can_merge = merges and design in MERGEABLE and replicas > 1
    events: list[ScenarioEvent] = []
    issued = 0
    while issued < updates:
        roll = rng.random()
        if roll < 0.4:
            events.append(Op(rng.randrange(replicas), rng.choice(KINDS), rng.choice(elements)))
            issued += 1
            if checkpoint_every and issued % checkpoint_every == 0:
                events += [SyncAll(), Check("oracle"), Check("converged")]
        elif roll < 0.85 or not can_merge:
            events.append(Deliver(rng.randrange(replicas)))
        else:
            src, dst = rng.sample(range(replicas), 2)
            events.append(Merge(src, dst))
    events += [SyncAll(), Check("oracle"), Check("converged")]
    return Scenario(design, replicas, events, seed, delivery, duplicates)


def space_scenario(
    design: str, replicas: int = 3, cycles: int = 1000, elements: Iterable[str] = ("e",), seed: int = 0
) -> Scenario:
    """Each round every replica removes then re-adds an element; rounds end with a full sync."""
    elements = list(elements)
    events: list[ScenarioEvent] = []
    for rnd in range(cycles):
        for r in range(replicas):
            e = elements[(r + rnd) % len(elements)]
            events += [Op(r, REMOVE, e), Op(r, ADD, e)]
        events.append(SyncAll())
    return Scenario(design, replicas, events, seed, "causal")


def measure_space(
    design: str, replicas: int = 3, cycles: int = 1000, elements: Iterable[str] = ("e",), seed: int = 0
) -> list[Sample]:
    """Payload size per replica at the start and after every round."""
    if design not in ("or-set", "opt-or-set"):
        raise ConfigurationError(f"space measurement needs or-set or opt-or-set, got {design!r}")
    return run(space_scenario(design, replicas, cycles, elements, seed)).samples

"""Bundled fixtures and the built-in suites the command line runs.

The anomaly gate replays the frozen fixtures under each design. The two
known-bad designs must record at least one permutation violation on
their own fixture, and the add-wins designs must pass every fixture.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .explore import SuiteResult, run_suite
from .sim import RunReport, Scenario, run

FIXTURES = (
    "addwins-basic",
    "cart-anomaly",
    "cset-anomaly",
    "orset-vs-opt-equivalence",
)
KNOWN_BAD = {"cart": "cart-anomaly", "c-set": "cset-anomaly"}
CORRECT = ("or-set", "opt-or-set")

# or-set tolerates any delivery order, and its any-order schedules include
# every causal one, so the exhaustive suite runs each design once.
SUITE_DELIVERY = {"or-set": "any-order", "opt-or-set": "causal", "cart": "causal", "c-set": "causal"}


def fixture_text(name: str) -> str:
    return resources.files("orsetlab").joinpath("fixtures").joinpath(f"{name}.json").read_text()


def load_scenario(ref: str | Path) -> Scenario:
    """Load a scenario file, or a bundled fixture when ``ref`` names one."""
    path = Path(ref)
    if not path.exists() and str(ref) in FIXTURES:
        return Scenario.loads(fixture_text(str(ref)), f"<fixture {ref}>")
    return Scenario.load(path)


def with_design(sc: Scenario, design: str) -> Scenario:
    return Scenario(design, sc.replicas, list(sc.events), sc.seed, sc.delivery, sc.duplicates)


@dataclass
class GateRow:
    fixture: str
    design: str
    expect_violation: bool
    oracle_failures: int
    permutation_violations: int
    convergence_failures: int

    @property
    def ok(self) -> bool:
        if self.expect_violation:
            return self.permutation_violations > 0
        return not (self.oracle_failures or self.permutation_violations or self.convergence_failures)

    def row(self) -> dict:
        return {
            "fixture": self.fixture,
            "design": self.design,
            "expect": "violation" if self.expect_violation else "pass",
            "oracle_failures": self.oracle_failures,
            "permutation_violations": self.permutation_violations,
            "convergence_failures": self.convergence_failures,
            "ok": self.ok,
        }


def _gate_row(fixture: str, design: str, report: RunReport, expect: bool) -> GateRow:
    checks = report.checks
    return GateRow(
        fixture,
        design,
        expect,
        sum(1 for c in checks if c.check == "oracle" and not c.passed),
        sum(1 for c in checks if c.check == "permutation" and c.applicable and not c.passed),
        sum(1 for c in checks if c.check in ("converged", "final-converged") and not c.passed),
    )


def anomaly_gate() -> list[GateRow]:
    rows = []
    for design, fixture in KNOWN_BAD.items():
        sc = load_scenario(fixture)
        rows.append(_gate_row(fixture, design, run(sc), True))
    for fixture in FIXTURES:
        base = load_scenario(fixture)
        for design in CORRECT:
            sc = with_design(base, design)
            rows.append(_gate_row(fixture, design, run(sc), False))
    return rows


def exhaustive(design: str, ops_bound: int, replicas: int) -> SuiteResult:
    return run_suite(design, ops_bound, replicas, SUITE_DELIVERY[design])


__all__ = [
    "CORRECT",
    "FIXTURES",
    "KNOWN_BAD",
    "SUITE_DELIVERY",
    "GateRow",
    "anomaly_gate",
    "exhaustive",
    "fixture_text",
    "load_scenario",
    "with_design",
]

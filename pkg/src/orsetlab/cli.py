"""Command-line front end.

Subcommands::

    orsetlab run --scenario cset-anomaly [--design opt-or-set]
    orsetlab suite [--ops-bound 4 --replicas 2] [--design c-set]
    orsetlab space --design opt-or-set --cycles 1000 [--format csv]
    orsetlab enumerate --design or-set --ops-bound 2 --replicas 2

Exit status: 0 success, 1 a check failed, 2 usage or configuration
error, 3 a payload invariant was violated.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Sequence

from .errors import ConfigurationError, InvariantViolation, OrsetLabError
from .explore import check_bounds, count_schedules, enumerate_schedules
from .sim import DELIVERIES, DESIGNS, RunReport, measure_space, run
from .suite import (
    CORRECT,
    KNOWN_BAD,
    SUITE_DELIVERY,
    anomaly_gate,
    exhaustive,
    load_scenario,
    with_design,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_INVARIANT = 3

SPACE_DESIGNS = ("or-set", "opt-or-set")


def _csv(rows: Sequence[Sequence], header: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt_set(items) -> str:
    return "{" + ", ".join(items) + "}"


# -- run ---------------------------------------------------------------------

def render_run(report: RunReport, fmt: str) -> str:
    if fmt == "csv":
        rows = [
            [c.index, c.check, "pass" if c.passed else "FAIL", int(c.applicable), c.detail]
            for c in report.checks
        ]
        return _csv(rows, ["index", "check", "verdict", "applicable", "detail"])
    lines = [
        f"design={report.design} replicas={report.replicas} "
        f"delivery={report.delivery} seed={report.seed} duplicates={str(report.duplicates).lower()}"
    ]
    for c in report.checks:
        if not c.applicable:
            verdict = "n/a "
        else:
            verdict = "pass" if c.passed else "FAIL"
        line = f"  [{c.index:>3}] {c.check:<16} {verdict}"
        if c.detail:
            line += f"  {c.detail}"
        lines.append(line)
    lines.append("final elements:")
    for r, items in enumerate(report.final_elements):
        lines.append(f"  replica {r}: {_fmt_set(items)}")
    failed = report.failures()
    if failed:
        names = ", ".join(f"{c.check}@{c.index}" for c in failed)
        lines.append(f"verdict: FAIL ({names})")
    else:
        lines.append("verdict: pass")
    return "\n".join(lines) + "\n"


def cmd_run(args) -> tuple[int, str]:
    if not args.scenario:
        raise ConfigurationError("run needs --scenario PATH or a bundled fixture name")
    sc = load_scenario(args.scenario)
    if args.design:
        sc = with_design(sc, args.design)
    if args.seed is not None:
        sc.seed = args.seed
    sc.validate()
    report = run(sc)
    if args.report:
        with open(args.report, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report.to_json() + "\n")
    return (EXIT_OK if report.passed else EXIT_CHECK_FAILED), render_run(report, args.format or "text")


# -- suite -------------------------------------------------------------------

SUITE_HEADER = [
    "suite", "design", "delivery", "fixture", "ops_bound", "replicas", "schedules",
    "passed", "failed", "oracle_failures", "convergence_failures",
    "permutation_applicable", "permutation_violations", "expect", "ok",
]


def cmd_suite(args) -> tuple[int, str]:
    check_bounds(args.ops_bound, args.replicas)
    designs = [args.design] if args.design else list(CORRECT)
    rows = []
    ok = True
    failure_samples = []
    if not args.design:
        for g in anomaly_gate():
            ok &= g.ok
            rows.append([
                "anomaly-gate", g.design, "causal", g.fixture, "", "", 1,
                int(not g.expect_violation or g.ok), int(g.expect_violation and g.ok),
                g.oracle_failures, g.convergence_failures, "", g.permutation_violations,
                "violation" if g.expect_violation else "pass", g.ok,
            ])
    for design in designs:
        res = exhaustive(design, args.ops_bound, args.replicas)
        known_bad = design in KNOWN_BAD
        # Known-bad designs are run to show the suite catches them.
        good = res.failed > 0 if known_bad else res.failed == 0
        ok &= good
        rows.append([
            "exhaustive", design, res.delivery, "", res.ops_bound, res.replicas, res.schedules,
            res.passed, res.failed, res.oracle_failures, res.convergence_failures,
            res.permutation_applicable, res.permutation_violations,
            "failures" if known_bad else "pass", good,
        ])
        if res.first_failure is not None:
            failure_samples.append((design, res.first_failure))
    status = EXIT_OK if ok else EXIT_CHECK_FAILED
    if args.format == "csv":
        return status, _csv([[str(x).lower() if isinstance(x, bool) else x for x in r] for r in rows],
                            SUITE_HEADER)
    lines = []
    for r in rows:
        d = dict(zip(SUITE_HEADER, r))
        where = f"fixture={d['fixture']}" if d["suite"] == "anomaly-gate" else (
            f"B={d['ops_bound']} R={d['replicas']} schedules={d['schedules']}"
        )
        lines.append(
            f"{d['suite']:<13} {d['design']:<11} {d['delivery']:<10} {where:<38} "
            f"failed={d['failed']} oracle={d['oracle_failures']} "
            f"converge={d['convergence_failures']} "
            f"perm_violations={d['permutation_violations']} expect={d['expect']} "
            f"{'ok' if d['ok'] else 'NOT OK'}"
        )
    for design, sc in failure_samples:
        lines.append(f"first failing schedule for {design}: "
                     f"{json.dumps(sc.to_dict(), sort_keys=True, separators=(',', ':'))}")
    lines.append("verdict: " + ("ok" if ok else "FAIL"))
    return status, "\n".join(lines) + "\n"


# -- space -------------------------------------------------------------------

def cmd_space(args) -> tuple[int, str]:
    design = args.design or "opt-or-set"
    if design not in SPACE_DESIGNS:
        raise ConfigurationError(f"space needs --design or-set or opt-or-set, got {design!r}")
    if args.cycles < 0:
        raise ConfigurationError(f"--cycles must be non-negative, got {args.cycles}")
    elements = [e for e in args.elements.split(",") if e]
    if not elements:
        raise ConfigurationError("--elements must name at least one element")
    samples = measure_space(design, args.replicas, args.cycles, elements, args.seed or 0)
    third = "T_size" if design == "or-set" else "vector_len"
    if (args.format or "csv") == "csv":
        rows = [
            [s.round, s.replica, s.e_size, s.t_size if design == "or-set" else s.vector_len, s.elements]
            for s in samples
        ]
        return EXIT_OK, _csv(rows, ["round", "replica", "E_size", third, "elements_count"])
    last = max(s.round for s in samples)
    final = [s for s in samples if s.round == last]
    lines = [
        f"design={design} replicas={args.replicas} cycles={args.cycles} elements={len(elements)}",
        f"max E_size: {max(s.e_size for s in samples)}",
    ]
    if design == "or-set":
        lines.append(f"final E_size+T_size per replica: {[s.e_size + s.t_size for s in final]}")
    else:
        lines.append(f"vector_len: {sorted({s.vector_len for s in samples})}")
    return EXIT_OK, "\n".join(lines) + "\n"


# -- enumerate ---------------------------------------------------------------

def cmd_enumerate(args) -> tuple[int, str]:
    design = args.design or "or-set"
    delivery = args.delivery or SUITE_DELIVERY[design]
    if args.format == "csv":
        n = count_schedules(design, args.ops_bound, args.replicas, delivery)
        return EXIT_OK, _csv([[design, delivery, args.ops_bound, args.replicas, n]],
                             ["design", "delivery", "ops_bound", "replicas", "schedules"])
    out = [
        json.dumps(sc.to_dict(), sort_keys=True, separators=(",", ":"))
        for sc in enumerate_schedules(design, args.ops_bound, args.replicas, delivery)
    ]
    return EXIT_OK, "".join(line + "\n" for line in out)


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="orsetlab", description="Run replicated-set scenarios, suites and space experiments."
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt_default_note: str):
        sp.add_argument("--design", choices=DESIGNS, help="design to run (overrides the scenario's)")
        sp.add_argument("--seed", type=int, default=None, help="seed override")
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--format", choices=("text", "csv"), default=None,
                        help=f"output format ({fmt_default_note})")

    sp = sub.add_parser("run", help="run one scenario file or bundled fixture")
    common(sp, "default text")
    sp.add_argument("--scenario", help="scenario JSON path or bundled fixture name")
    sp.add_argument("--report", help="also write the full JSON report here")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("suite", help="anomaly gate plus exhaustive conformance")
    common(sp, "default text")
    sp.add_argument("--ops-bound", type=int, default=4)
    sp.add_argument("--replicas", type=int, default=2)
    sp.set_defaults(func=cmd_suite)

    sp = sub.add_parser("space", help="payload size over repeated add/remove cycles")
    common(sp, "default csv")
    sp.add_argument("--replicas", type=int, default=3)
    sp.add_argument("--cycles", type=int, default=1000)
    sp.add_argument("--elements", default="e", help="comma-separated element universe")
    sp.set_defaults(func=cmd_space)

    sp = sub.add_parser("enumerate", help="list the exhaustive schedules as JSON lines")
    common(sp, "text lists scenarios, csv prints the count")
    sp.add_argument("--ops-bound", type=int, default=2)
    sp.add_argument("--replicas", type=int, default=2)
    sp.add_argument("--delivery", choices=DELIVERIES, default=None)
    sp.set_defaults(func=cmd_enumerate)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        status, text = args.func(args)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OrsetLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    raise SystemExit(main())

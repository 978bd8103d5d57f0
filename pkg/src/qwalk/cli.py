"""qwalk command line: print walk states, verify correction tables, derive tables.

Exit codes: 0 pass, 1 verification failure, 2 usage or data error.
"""
from __future__ import annotations

import argparse
import sys
from collections import Counter
from fractions import Fraction
from pathlib import Path

import numpy as np

from .fixtures import compare_step
from .hilbert import format_ket
from .protocol import (
    PASS_THRESHOLD,
    ProtocolConfig,
    best_fidelity_without_controller,
    summarize,
    verify_table,
)
from .report import RunReport, render
from .tables import (
    RowStatus,
    TableFormatError,
    derive_table,
    diff_tables,
    load_published_table,
    load_table,
    save_table,
)
from .walks import Protocol, Topology, build_walk_program, run_walk

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

PROBABILITY_CLAIMS = {
    (Protocol.UNCONTROLLED, Topology.LINE): Fraction(1, 16),
    (Protocol.UNCONTROLLED, Topology.TWO_VERTEX): Fraction(1, 16),
    (Protocol.UNCONTROLLED, Topology.CYCLE4): Fraction(1, 16),
    (Protocol.CONTROLLED, Topology.LINE): Fraction(1, 256),
    (Protocol.CONTROLLED, Topology.TWO_VERTEX): Fraction(1, 64),
    (Protocol.CONTROLLED, Topology.CYCLE4): Fraction(1, 64),
}


def _amplitudes(text: str) -> tuple[float, float]:
    try:
        a0, a1 = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    if abs(a0 * a0 + a1 * a1 - 1) > 1e-10:
        raise argparse.ArgumentTypeError(f"amplitudes {text} are not normalized")
    return a0, a1


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def _as_fraction(p: float) -> str:
    f = Fraction(p).limit_denominator(4096)
    return str(f) if abs(float(f) - p) < 1e-12 else f"{p:.12g}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qwalk", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--protocol", choices=[p.value for p in Protocol], required=True)
    common.add_argument("--topology", choices=[t.value for t in Topology], required=True)
    common.add_argument("--format", choices=("text", "machine"), default="text")
    common.add_argument("--output", type=Path, help="write the report (or table, for derive) here")
    sub = parser.add_subparsers(dest="command", required=True)

    st = sub.add_parser("state", parents=[common], help="print the walk state after a number of steps")
    st.add_argument("--upto", type=int, help="number of walk steps (default: all)")

    ve = sub.add_parser("verify", parents=[common], help="check the published correction table")
    ve.add_argument("--trials", type=_positive, default=100, help="random targets per row")
    ve.add_argument("--seed", type=int, default=0)
    ve.add_argument("--alice", type=_amplitudes, help="extra fixed target a0,a1")
    ve.add_argument("--bob", type=_amplitudes, help="extra fixed target b0,b1")
    ve.add_argument("--workers", type=_positive, default=1)

    de = sub.add_parser("derive", parents=[common], help="derive a correction table by search and diff it")
    de.add_argument("--seed", type=int, default=1234)
    de.add_argument("--alice", type=_amplitudes, default=(1.0, 0.0))
    de.add_argument("--bob", type=_amplitudes, default=(1.0, 0.0))
    de.add_argument("--against", type=Path, help="diff against this table file instead of the published one")
    return parser


def _config_echo(args) -> dict:
    skip = {"command", "format", "output"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip or v is None:
            continue
        out[k] = ",".join(f"{x:g}" for x in v) if isinstance(v, tuple) else (str(v) if isinstance(v, Path) else v)
    return out


def cmd_state(args) -> tuple[RunReport, int]:
    protocol, topology = Protocol(args.protocol), Topology(args.topology)
    program = build_walk_program(protocol, topology)
    n = len(program.steps)
    upto = n if args.upto is None else args.upto
    if not 0 <= upto <= n:
        raise UsageError(f"--upto must be between 0 and {n}")
    report = RunReport("state", _config_echo(args))
    state = run_walk(program, upto)
    terms = report.section("terms", ["ket", "amplitude"])
    for idx, amp in sorted(state.items()):
        terms.add(format_ket(state.layout, idx), float(amp.real) if amp.imag == 0 else str(amp))
    steps = report.section("steps", ["step", "terms", "min_abs_amplitude", "max_abs_amplitude", "published"])
    for k in range(upto + 1):
        s = run_walk(program, k)
        mags = [abs(a) for _, a in s.items()]
        diff = compare_step(protocol, topology, k) if k else None
        steps.add(k, len(mags), min(mags), max(mags),
                  "-" if diff is None else ("match" if diff.matches else "differs"))
        if diff is not None and not diff.matches:
            report.notes.append(diff.summary())
    return report, EXIT_OK


def _probability_section(report: RunReport, key, probs: dict) -> bool:
    claim = PROBABILITY_CLAIMS[key]
    sec = report.section("probability", ["computed", "outcomes", "published_claim", "agrees"])
    agree = True
    for value, count in sorted(Counter(round(p, 12) for p in probs.values()).items()):
        ok = abs(value - float(claim)) <= 1e-10
        agree &= ok
        sec.add(_as_fraction(value), count, str(claim), ok)
    report.notes.append(
        "joint success probability: computed "
        + ", ".join(f"{_as_fraction(v)} ({c} outcomes)" for v, c in
                    sorted(Counter(round(p, 12) for p in probs.values()).items()))
        + f"; published claim {claim}"
        + ("" if agree else " (disagrees)")
    )
    return agree


def cmd_verify(args) -> tuple[RunReport, int]:
    protocol, topology = Protocol(args.protocol), Topology(args.topology)
    table = load_published_table(protocol, topology)
    if (args.alice is None) != (args.bob is None):
        raise UsageError("--alice and --bob must be given together")
    fixed = [(args.alice, args.bob)] if args.alice is not None else []
    cfg = ProtocolConfig(protocol, topology)
    results = verify_table(cfg, table, args.trials, np.random.default_rng(args.seed), args.workers, fixed)
    summary = summarize(results)

    report = RunReport("verify", _config_echo(args))
    rows = report.section("rows", ["outcome", "a3", "b3", "probability", "min_fidelity", "pass"])
    failing = []
    for outcome, (fmin, prob, (a3, b3)) in sorted(summary.items(), key=lambda kv: kv[0].sort_key()):
        ok = fmin >= PASS_THRESHOLD
        rows.add(str(outcome), a3, b3, prob, fmin, ok)
        if not ok:
            failing.append((outcome, fmin))

    derived = derive_table(protocol, topology) if failing else None
    fails = report.section("failures", ["outcome", "published", "oracle", "min_fidelity"])
    for outcome, fmin in failing:
        fails.add(str(outcome), " ".join(table.rows[outcome]), " ".join(derived.rows[outcome]), fmin)

    _probability_section(report, (protocol, topology), {o: v[1] for o, v in summary.items()})
    if protocol is Protocol.CONTROLLED:
        first = min(summary, key=lambda o: o.sort_key())
        gate_cfg = cfg.with_targets(*(fixed[0] if fixed else ((0.6, 0.8), (0.8, 0.6))))
        best = best_fidelity_without_controller(gate_cfg, first)
        report.notes.append(f"best fidelity for {first} without the controller's result: {best:.12g}")

    report.notes.append(f"{len(summary) - len(failing)}/{len(summary)} rows pass")
    report.verdict = "pass" if not failing else "fail"
    return report, EXIT_OK if not failing else EXIT_FAIL


def cmd_derive(args) -> tuple[RunReport, int]:
    protocol, topology = Protocol(args.protocol), Topology(args.topology)
    derived = derive_table(protocol, topology, seed=args.seed, alice=args.alice, bob=args.bob)

    out_path = args.output or Path(f"{protocol.value}_{topology.value}.derived.tbl")
    save_table(derived, out_path)
    if args.against is not None:
        other = load_table(args.against, (protocol, topology))
    else:
        other = load_published_table(protocol, topology)
    diff = diff_tables(other, derived)

    echo = _config_echo(args)
    echo["table_written"] = str(out_path)
    report = RunReport("derive", echo)
    counts = report.section("diff_counts", ["status", "rows"])
    for status, n in diff.counts.items():
        counts.add(status.value, n)
    exc = report.section("exceptions", ["outcome", "status", "listed", "derived", "note"])
    for r in diff.exceptions():
        exc.add(str(r.outcome), r.status.value, " ".join(r.listed) if r.listed else None,
                " ".join(r.derived) if r.derived else None, r.note)
    flagged = [r for r in diff.flagged() if r.status is RowStatus.MATCH]
    if flagged:
        report.notes.append(f"{len(flagged)} matching rows carry transcription notes (see table file comments)")
    bad = diff.counts[RowStatus.LISTED_INVALID]
    report.verdict = "pass" if bad == 0 else "fail"
    return report, EXIT_OK if bad == 0 else EXIT_FAIL


class UsageError(ValueError):
    pass


COMMANDS = {"state": cmd_state, "verify": cmd_verify, "derive": cmd_derive}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        report, code = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"qwalk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TableFormatError, OSError, ValueError) as exc:
        print(f"qwalk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(report, args.format)
    if args.output is not None and args.command != "derive":
        args.output.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

"""Acceptance checks. Each test records one PASS/FAIL line, printed at the end of the run."""
from __future__ import annotations

import math
import time

import numpy as np
import pytest

from conftest import SMALL, random_state, record_criterion
from qwalk.fixtures import compare_step
from qwalk.hilbert import StateVector, layout_for
from qwalk.measurement import ImpossibleOutcome, build_coin_basis, build_controller_basis, measure_project
from qwalk.operators import ConditionalShiftSpec, ShiftKind, apply_conditional_shift, apply_hadamard
from qwalk.protocol import (
    PASS_THRESHOLD,
    ProtocolConfig,
    all_outcomes,
    outcome_probabilities,
    random_target,
    success_probability,
    summarize,
    verify_table,
)
from qwalk.tables import (
    AmbiguousCorrection,
    RowStatus,
    derive_correction,
    derive_table,
    diff_tables,
    load_published_table,
    relabel_cycle,
)
from qwalk.walks import Protocol, Topology, apply_step, build_layout, build_walk_program, walk_states

U, C = Protocol.UNCONTROLLED, Protocol.CONTROLLED
CONFIGS = [(p, t) for p in Protocol for t in Topology]
FIXTURE_TOL = 1e-12
FIDELITY_FLOOR = PASS_THRESHOLD  # 1 - 1e-10
PROB_TOL = 1e-10
AGREEMENT_FLOOR = 0.95
PROPERTY_CASES = 1000


def _name(protocol, topology):
    return f"{protocol.value}/{topology.value}"


def test_criterion_1_state_fixtures():
    start = time.perf_counter()
    must_match = [(U, Topology.LINE, 4, 0.25), (U, Topology.TWO_VERTEX, 4, 0.25), (U, Topology.CYCLE4, 4, 0.25),
                  (C, Topology.TWO_VERTEX, 6, 0.125)]
    problems = []
    for protocol, topology, step, amp in must_match:
        state = walk_states(build_walk_program(protocol, topology))[step]
        if any(abs(abs(a) - amp) > FIXTURE_TOL for _, a in state.items()):
            problems.append(f"{_name(protocol, topology)} amplitudes")
        diff = compare_step(protocol, topology, step)
        if not diff.matches:
            problems.append(diff.summary())
    reported = []
    for topology in (Topology.LINE, Topology.CYCLE4):
        diff = compare_step(C, topology, 6)
        reported.append(f"{_name(C, topology)} psi6 " + ("matches" if diff.matches else "differs"))
        if not diff.matches:
            print(diff.summary())
    elapsed = time.perf_counter() - start
    if elapsed >= 1.0:
        problems.append(f"runtime {elapsed:.2f}s")
    ok = not problems
    record_criterion(1, ok, f"psi4 x3 and controlled k2 psi6 match published terms; {', '.join(reported)}; "
                            f"{elapsed:.2f}s" + ("" if ok else f"; problems: {problems}"))
    assert ok, problems


def test_criterion_2_table_verification():
    start = time.perf_counter()
    failures = []
    total = 0
    for protocol, topology in CONFIGS:
        cfg = ProtocolConfig(protocol, topology)
        table = load_published_table(protocol, topology)
        summary = summarize(verify_table(cfg, table, trials=100, rng=np.random.default_rng(2024)))
        total += len(summary)
        for outcome, (fmin, _, corr) in sorted(summary.items(), key=lambda kv: kv[0].sort_key()):
            if fmin < FIDELITY_FLOOR:
                oracle = derive_correction(cfg, outcome)
                failures.append(f"{_name(protocol, topology)} {outcome}: listed {corr}, min fidelity {fmin:.4f}, "
                                f"oracle {sorted(oracle)}")
    elapsed = time.perf_counter() - start
    for f in failures:
        print("  " + f)
    ok = not failures and elapsed < 10
    record_criterion(2, ok, f"{total - len(failures)}/{total} published rows reach fidelity >= 1-1e-10 "
                            f"over 100 targets; {len(failures)} failing rows itemized; {elapsed:.2f}s")
    assert ok, "\n".join(failures)


def test_criterion_3_probabilities():
    claims = {U: 1 / 16, C: 1 / 64}
    problems = []
    line_value = None
    for protocol, topology in CONFIGS:
        cfg = ProtocolConfig(protocol, topology, (0.6, 0.8), (0.8, -0.6))
        values = [success_probability(cfg, o, check_pairs=3, seed=5) for o in all_outcomes(protocol, topology)]
        if protocol is C and topology is Topology.LINE:
            line_value = sorted(set(round(v, 12) for v in values))
            continue
        off = [v for v in values if abs(v - claims[protocol]) > PROB_TOL]
        if off:
            problems.append(f"{_name(protocol, topology)}: {len(off)}/{len(values)} outcomes differ from "
                            f"{claims[protocol]:g} (values {sorted(set(round(v, 12) for v in off))})")
    for p in problems:
        print("  " + p)
    ok = not problems
    record_criterion(3, ok, f"controlled/line computed {line_value} vs published 1/256 = {1 / 256}; "
                            + ("all other claims hold" if ok else "; ".join(problems)))
    assert ok, problems


def test_criterion_4_completeness():
    sums = {}
    rng = np.random.default_rng(8)
    for protocol, topology in CONFIGS:
        cfg = ProtocolConfig(protocol, topology, random_target(rng), random_target(rng))
        sums[_name(protocol, topology)] = sum(outcome_probabilities(cfg).values())
    ok = all(abs(s - 1) <= PROB_TOL for s in sums.values())
    record_criterion(4, ok, "outcome probabilities sum to 1: " + ", ".join(f"{k}={v:.12f}" for k, v in sums.items()))
    assert ok, sums


def test_criterion_5_oracle_uniqueness():
    parts, problems, exceptions = [], [], []
    for protocol, topology in CONFIGS:
        try:
            derived = derive_table(protocol, topology)
        except AmbiguousCorrection as exc:
            problems.append(str(exc))
            continue
        diff = diff_tables(load_published_table(protocol, topology), derived)
        match = diff.counts[RowStatus.MATCH]
        rate = match / len(diff.rows)
        parts.append(f"{_name(protocol, topology)} {match}/{len(diff.rows)}")
        if rate < AGREEMENT_FLOOR:
            problems.append(f"{_name(protocol, topology)} agreement {rate:.3f}")
        for r in diff.exceptions():
            exceptions.append(f"{_name(protocol, topology)} {r.outcome}: listed {r.listed}, derived {r.derived}")
    for e in exceptions:
        print("  " + e)
    ok = not problems
    record_criterion(5, ok, "exactly one Pauli class per outcome; published agreement " + ", ".join(parts)
                            + f"; {len(exceptions)} exceptions itemized")
    assert ok, problems


def test_criterion_6_two_vertex_cycle_consistency():
    differing = {}
    for protocol in Protocol:
        k2 = relabel_cycle(derive_table(protocol, Topology.TWO_VERTEX), protocol)
        c4 = derive_table(protocol, Topology.CYCLE4)
        keys = set(k2.rows) | set(c4.rows)
        differing[protocol.value] = sum(k2.rows.get(o) != c4.rows.get(o) for o in keys)
    ok = all(n == 0 for n in differing.values())
    record_criterion(6, ok, f"derived k2 vs c4 tables under alpha_i <-> talpha_i, differing rows: {differing}")
    assert ok, differing


def _close(x: StateVector, y: StateVector, atol=1e-12) -> bool:
    keys = set(x.amplitudes) | set(y.amplitudes)
    return all(abs(x[k] - y[k]) <= atol for k in keys)


def _random_protocol_state(rng, protocol, topology, terms=6):
    layout = build_layout(protocol, topology)
    amps = {}
    for _ in range(terms):
        idx = []
        for reg in layout.registers:
            vals = list(reg.values())
            if reg.kind.value == "line":
                vals = vals[1:-1]  # keep one step of headroom
            idx.append(int(rng.choice(vals)))
        amps[tuple(idx)] = complex(rng.normal(), rng.normal())
    return StateVector(layout, amps).normalized()


def test_criterion_7_property_suites():
    rng = np.random.default_rng(77)
    start = time.perf_counter()
    counts = dict.fromkeys(("involution", "shift_inverse", "step_norm", "walk_terms", "idempotence"), 0)
    bad = []
    shifts = [ConditionalShiftSpec("P", "c", ShiftKind.LINE), ConditionalShiftSpec("Q", "d", ShiftKind.CYCLE4),
              ConditionalShiftSpec("R", "c", ShiftKind.TWO_VERTEX)]
    for i in range(PROPERTY_CASES):
        x = random_state(rng, SMALL, terms=int(rng.integers(1, 8)), interior=True)
        coin = "c" if i % 2 else "d"
        if not _close(apply_hadamard(apply_hadamard(x, coin), coin), x):
            bad.append(("involution", i))
        counts["involution"] += 1
        spec = shifts[i % 3]
        y = apply_conditional_shift(x, spec)
        if not _close(apply_conditional_shift(y, spec, inverse=True), x) or abs(y.norm() - 1) > 1e-12:
            bad.append(("shift_inverse", i))
        counts["shift_inverse"] += 1

        protocol, topology = CONFIGS[i % len(CONFIGS)]
        prog = build_walk_program(protocol, topology)
        z = _random_protocol_state(rng, protocol, topology)
        step = prog.steps[i % len(prog.steps)]
        if abs(apply_step(z, step).norm() - 1) > 1e-12:
            bad.append(("step_norm", i))
        counts["step_norm"] += 1

        which = "A2" if i % 2 else "B2"
        theta = rng.uniform(0, 2 * math.pi)
        basis = build_coin_basis(which, (math.cos(theta), math.sin(theta))) if i % 5 else build_controller_basis()
        if i % 5 == 0 and protocol is U:
            z = _random_protocol_state(rng, C, topology)
        offset = int(rng.integers(len(basis.labels)))
        for j in range(len(basis.labels)):
            label = basis.labels[(offset + j) % len(basis.labels)]
            try:
                first = measure_project(z, basis, label)
            except ImpossibleOutcome:
                continue
            again = measure_project(first.post_state, basis, label)
            if abs(again.probability - 1) > 1e-12 or not _close(again.post_state, first.post_state):
                bad.append(("idempotence", i))
            counts["idempotence"] += 1
            break

    for protocol, topology in CONFIGS:
        for k, s in enumerate(walk_states(build_walk_program(protocol, topology))):
            counts["walk_terms"] += 1
            if len(s) != 2 ** k or any(abs(abs(a) - 2 ** (-k / 2)) > 1e-12 for _, a in s.items()) \
                    or abs(s.norm() - 1) > 1e-12:
                bad.append(("walk_terms", (protocol.value, topology.value, k)))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 5 and all(counts[k] >= PROPERTY_CASES for k in counts if k != "walk_terms")
    record_criterion(7, ok, f"properties {counts} with {len(bad)} violations in {elapsed:.2f}s")
    assert ok, bad[:10]


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))

"""Bidirectional remote state preparation: walk, measurement cascade, correction, check.

Alice's target (a0, a1) ends up on Bob's coin B3 and Bob's target (b0, b1) on
Alice's coin A3.
"""
from __future__ import annotations

import itertools
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .hilbert import ATOL, StateVector, fidelity_up_to_phase, product_state, reduced_density_matrix
from .measurement import (
    CHARLIE_LABELS,
    ImpossibleOutcome,
    build_coin_basis,
    build_controller_basis,
    build_position_basis,
    measure_project,
)
from .operators import apply_pauli_sequence, correction_ops
from .walks import Protocol, Topology, build_walk_program, run_walk

PASS_THRESHOLD = 1 - 1e-10
PAULI_CLASSES = ("I", "X", "Z", "XZ")

Target = tuple[float, float]
Correction = tuple[str, str]


def _check_target(name: str, amps: Target) -> Target:
    a0, a1 = (float(x) for x in amps)
    if abs(a0 * a0 + a1 * a1 - 1) > ATOL:
        raise ValueError(f"{name} target {amps} is not normalized")
    return a0, a1


def random_target(rng: np.random.Generator) -> Target:
    theta = rng.uniform(0.0, 2 * math.pi)
    return math.cos(theta), math.sin(theta)


@dataclass(frozen=True)
class ProtocolConfig:
    protocol: Protocol
    topology: Topology
    alice_target: Target = (1.0, 0.0)
    bob_target: Target = (1.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "alice_target", _check_target("alice", self.alice_target))
        object.__setattr__(self, "bob_target", _check_target("bob", self.bob_target))

    def with_targets(self, alice: Target, bob: Target) -> ProtocolConfig:
        return ProtocolConfig(self.protocol, self.topology, alice, bob)


def _natural(label: str):
    return tuple(int(t) if t.isdigit() else t for t in re.split(r"(\d+)", label))


@dataclass(frozen=True)
class OutcomeTuple:
    position: str
    alice: str
    bob: str
    charlie: str | None = None

    def sort_key(self):
        return (_natural(self.position), self.alice, self.bob, self.charlie or "")

    def labels(self) -> tuple[str, ...]:
        base = (self.position, self.alice, self.bob)
        return base if self.charlie is None else base + (self.charlie,)

    def __str__(self):
        return "(" + ", ".join(self.labels()) + ")"


@dataclass(frozen=True)
class VerificationResult:
    outcome: OutcomeTuple
    joint_probability: float
    fidelity_after_correction: float
    correction_used: Correction
    alice_target: Target = field(default=(1.0, 0.0))
    bob_target: Target = field(default=(1.0, 0.0))

    @property
    def passed(self) -> bool:
        return self.fidelity_after_correction >= PASS_THRESHOLD


def all_outcomes(protocol: Protocol, topology: Topology) -> list[OutcomeTuple]:
    positions = build_position_basis(protocol, topology).labels
    charlie: Sequence[str | None] = CHARLIE_LABELS if protocol is Protocol.CONTROLLED else (None,)
    return [
        OutcomeTuple(p, a, b, c)
        for p, a, b, c in itertools.product(positions, ("beta0", "beta1"), ("gamma0", "gamma1"), charlie)
    ]


def _validate_outcome(config: ProtocolConfig, outcome: OutcomeTuple) -> None:
    controlled = config.protocol is Protocol.CONTROLLED
    if (outcome.charlie is not None) != controlled:
        raise ValueError(f"outcome {outcome} does not fit a {config.protocol.value} protocol")


@lru_cache(maxsize=None)
def _after_position(protocol: Protocol, topology: Topology, label: str):
    """Position measurement is target-independent, so it is shared across trials."""
    state = run_walk(build_walk_program(protocol, topology))
    return measure_project(state, build_position_basis(protocol, topology), label)


def measurement_cascade(config: ProtocolConfig, outcome: OutcomeTuple, upto_charlie: bool = True):
    """Returns (state, joint probability, measured factors).

    With ``upto_charlie=False`` the controller's coins are left unmeasured
    and ``outcome.charlie`` is ignored.
    """
    if upto_charlie:
        _validate_outcome(config, outcome)
    pos_basis = build_position_basis(config.protocol, config.topology)
    rec = _after_position(config.protocol, config.topology, outcome.position)
    prob = rec.probability
    factors = [(("A1", "B1"), pos_basis.vector(outcome.position).components)]
    steps = [
        (build_coin_basis("A2", config.alice_target), outcome.alice),
        (build_coin_basis("B2", config.bob_target), outcome.bob),
    ]
    if outcome.charlie is not None and upto_charlie:
        steps.append((build_controller_basis(), outcome.charlie))
    state = rec.post_state
    for basis, label in steps:
        rec = measure_project(state, basis, label)
        state, prob = rec.post_state, prob * rec.probability
        factors.append((basis.registers, basis.vector(label).components))
    return state, prob, factors


def swapped_target_state(config: ProtocolConfig, factors) -> StateVector:
    layout = build_walk_program(config.protocol, config.topology).layout
    b0, b1 = config.bob_target
    a0, a1 = config.alice_target
    return product_state(layout, list(factors) + [
        (("A3",), {(0,): b0, (1,): b1}),
        (("B3",), {(0,): a0, (1,): a1}),
    ])


def run_protocol_outcome(config: ProtocolConfig, outcome: OutcomeTuple,
                         correction: Correction) -> VerificationResult:
    """Run the full cascade for one outcome, correct, and score against the swapped target."""
    state, prob, factors = measurement_cascade(config, outcome)
    corrected = apply_pauli_sequence(state, correction_ops(correction))
    fid = fidelity_up_to_phase(swapped_target_state(config, factors), corrected)
    return VerificationResult(outcome, prob, fid, tuple(correction), config.alice_target, config.bob_target)


def success_probability(config: ProtocolConfig, outcome: OutcomeTuple, check_pairs: int = 3,
                        seed: int = 0) -> float:
    """Joint probability of the whole outcome cascade.

    The value is recomputed at ``check_pairs`` random targets; disagreement
    beyond 1e-10 raises, since the cascade should not depend on the targets.
    """
    try:
        _, prob, _ = measurement_cascade(config, outcome)
    except ImpossibleOutcome:
        prob = 0.0
    rng = np.random.default_rng(seed)
    for _ in range(check_pairs):
        other = config.with_targets(random_target(rng), random_target(rng))
        try:
            _, p2, _ = measurement_cascade(other, outcome)
        except ImpossibleOutcome:
            p2 = 0.0
        if abs(p2 - prob) > ATOL:
            raise RuntimeError(f"probability of {outcome} depends on targets: {prob} vs {p2}")
    return prob


def outcome_probabilities(config: ProtocolConfig) -> dict[OutcomeTuple, float]:
    out = {}
    for o in all_outcomes(config.protocol, config.topology):
        try:
            out[o] = measurement_cascade(config, o)[1]
        except ImpossibleOutcome:
            out[o] = 0.0
    return out


_COIN_ORDER = ("A2", "A3", "B2", "B3", "C1", "C2")
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.diag([1, -1]).astype(complex)


def pauli_matrix(text: str) -> np.ndarray:
    """2x2 matrix of a Pauli string applied left to right."""
    u = np.eye(2, dtype=complex)
    for op in correction_ops((text, "I")):
        u = (_X if op.axis == "X" else _Z) @ u
    return u


@lru_cache(maxsize=None)
def coin_tensor(protocol: Protocol, topology: Topology, position: str) -> tuple[float, np.ndarray]:
    """(probability, coin state) after the position measurement.

    The post-measurement state factorizes as (position vector) x (coin state);
    axes of the returned tensor follow A2, A3, B2, B3[, C1, C2].
    """
    rec = _after_position(protocol, topology, position)
    vec = build_position_basis(protocol, topology).vector(position).components
    layout = rec.post_state.layout
    coins = [layout.index_of(r) for r in _COIN_ORDER if r in layout.ids]
    p0, p1 = layout.index_of("A1"), layout.index_of("B1")
    t = np.zeros((2,) * len(coins), dtype=complex)
    for idx, amp in rec.post_state.items():
        t[tuple(idx[c] for c in coins)] += np.conj(vec[(idx[p0], idx[p1])]) * amp
    return rec.probability, t


def _coin_vectors(label: str, targets: np.ndarray) -> np.ndarray:
    """Row n: the chosen coin basis vector for target n (targets shape (N, 2))."""
    c0, c1 = targets[:, 0], targets[:, 1]
    return np.stack([c0, c1], axis=1) if label.endswith("0") else np.stack([c1, -c0], axis=1)


def batch_evaluate(protocol: Protocol, topology: Topology, outcome: OutcomeTuple, correction: Correction,
                   alice: np.ndarray, bob: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Joint probabilities and corrected fidelities for many target pairs at once.

    Same cascade as :func:`run_protocol_outcome`, vectorized over targets.
    """
    p_pos, t = coin_tensor(protocol, topology, outcome.position)
    beta = _coin_vectors(outcome.alice, alice)
    gamma = _coin_vectors(outcome.bob, bob)
    if outcome.charlie is not None:
        t = t[..., int(outcome.charlie[0]), int(outcome.charlie[1])]
    # remaining axes: A2, A3, B2, B3
    m = np.einsum("na,nb,axby->nxy", beta.conj(), gamma.conj(), t)
    weight = np.einsum("nxy,nxy->n", m, m.conj()).real
    prob = p_pos * weight
    ua, ub = pauli_matrix(correction[0]), pauli_matrix(correction[1])
    m = np.einsum("ij,njk,lk->nil", ua, m, ub)
    # target: Bob's amplitudes on A3, Alice's on B3
    overlap = np.einsum("ni,nj,nij->n", bob, alice, m)
    with np.errstate(invalid="ignore", divide="ignore"):
        fid = np.where(weight > 1e-14, np.abs(overlap) ** 2 / weight, 0.0)
    return prob, np.clip(fid, 0.0, 1.0)


def verify_table(config: ProtocolConfig, table, trials: int = 100,
                 rng: np.random.Generator | None = None, workers: int = 1,
                 fixed: Sequence[tuple[Target, Target]] = ()) -> list[VerificationResult]:
    """Check every row of ``table`` at ``trials`` random real targets.

    ``fixed`` target pairs are checked first, in addition to the random ones.
    Results come back in canonical outcome order whatever ``workers`` is.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = rng if rng is not None else np.random.default_rng(0)
    targets = [(_check_target("alice", a), _check_target("bob", b)) for a, b in fixed]
    targets += [(random_target(rng), random_target(rng)) for _ in range(trials)]
    alice = np.array([a for a, _ in targets])
    bob = np.array([b for _, b in targets])
    rows = sorted(table.rows.items(), key=lambda kv: kv[0].sort_key())
    for outcome, _ in rows:
        _validate_outcome(config, outcome)

    def check(row):
        outcome, correction = row
        prob, fid = batch_evaluate(config.protocol, config.topology, outcome, tuple(correction), alice, bob)
        return [
            VerificationResult(outcome, float(p), float(f), tuple(correction), a, b)
            for p, f, (a, b) in zip(prob, fid, targets)
        ]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(check, rows))
    else:
        chunks = [check(r) for r in rows]
    return [r for chunk in chunks for r in chunk]


def summarize(results: Iterable[VerificationResult]) -> dict[OutcomeTuple, tuple[float, float, Correction]]:
    """Per outcome: (minimum fidelity, probability, correction)."""
    out: dict[OutcomeTuple, tuple[float, float, Correction]] = {}
    for r in results:
        prev = out.get(r.outcome)
        fmin = r.fidelity_after_correction if prev is None else min(prev[0], r.fidelity_after_correction)
        out[r.outcome] = (fmin, r.joint_probability, r.correction_used)
    return out


def best_fidelity_without_controller(config: ProtocolConfig, outcome: OutcomeTuple) -> float:
    """Best achievable fidelity on (A3, B3) when Charlie's result is withheld.

    C1 and C2 are traced out after the position, A2 and B2 measurements, and
    every one of the 16 Pauli-class corrections is tried.
    """
    if config.protocol is not Protocol.CONTROLLED:
        raise ValueError("controller gating only applies to the controlled protocol")
    state, _, _ = measurement_cascade(config, outcome, upto_charlie=False)
    rho = reduced_density_matrix(state, ("A3", "B3"))
    b0, b1 = config.bob_target
    a0, a1 = config.alice_target
    target = np.kron([b0, b1], [a0, a1]).astype(complex)
    best = 0.0
    for ca, cb in itertools.product(PAULI_CLASSES, repeat=2):
        u = np.kron(pauli_matrix(ca), pauli_matrix(cb))
        best = max(best, float(np.real(target.conj() @ u @ rho @ u.conj().T @ target)))
    return best

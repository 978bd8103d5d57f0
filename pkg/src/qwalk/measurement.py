"""Projective measurement onto named vector sets over a subset of registers.

Bases may be incomplete on their register subspace (the line position bases
are); they only have to span the support of the states they measure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .hilbert import ATOL, BasisIndex, StateVector
from .walks import Protocol, Topology

Components = Mapping[tuple[int, ...], complex]


class ImpossibleOutcome(ValueError):
    """The requested outcome has (numerically) zero probability."""


class IncompleteBasis(ValueError):
    """The state has weight outside the span of the measurement basis."""


@dataclass(frozen=True)
class BasisVector:
    label: str
    components: Components
    description: str = ""

    def __post_init__(self):
        n = math.sqrt(sum(abs(c) ** 2 for c in self.components.values()))
        if abs(n - 1) > 1e-12:
            raise ValueError(f"basis vector {self.label} has norm {n}")


@dataclass(frozen=True)
class MeasurementBasis:
    registers: tuple[str, ...]
    vectors: tuple[BasisVector, ...]

    def __post_init__(self):
        labels = [v.label for v in self.vectors]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate labels in basis: {labels}")
        g = self.gram()
        if not np.allclose(g, np.eye(len(self.vectors)), atol=ATOL):
            raise ValueError("measurement basis vectors are not orthonormal")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(v.label for v in self.vectors)

    def vector(self, label: str) -> BasisVector:
        for v in self.vectors:
            if v.label == label:
                return v
        raise KeyError(f"no vector {label!r} in basis {self.labels}")

    def gram(self) -> np.ndarray:
        n = len(self.vectors)
        g = np.zeros((n, n), dtype=complex)
        for i, u in enumerate(self.vectors):
            for j, v in enumerate(self.vectors):
                g[i, j] = sum(c.conjugate() * v.components.get(k, 0) for k, c in u.components.items())
        return g


@dataclass(frozen=True)
class OutcomeRecord:
    basis_labels: tuple[str, ...]
    probability: float
    post_state: StateVector


# -- basis constructors -------------------------------------------------------

def _ket(*vals: int) -> str:
    return "|" + "".join(str(v) for v in vals) + ">"

# sign patterns over the kets (p,q), (p,q'), (p',q), (p',q')
_FOUR_SIGNS = ((1, 1, 1, 1), (1, -1, 1, -1), (1, 1, -1, -1), (1, -1, -1, 1))


def _four_term(label: str, a: tuple[int, int], b: tuple[int, int], signs) -> BasisVector:
    kets = [(a[0], b[0]), (a[0], b[1]), (a[1], b[0]), (a[1], b[1])]
    comps = {k: 0.5 * s for k, s in zip(kets, signs)}
    terms = [("-" if s < 0 else "+" if i else "") + _ket(*k) for i, (k, s) in enumerate(zip(kets, signs))]
    desc = "1/2(" + "".join(terms) + ")"
    return BasisVector(label, comps, desc)


def _two_term(label: str, k1, k2, sign: int) -> BasisVector:
    r = 1 / math.sqrt(2)
    desc = f"1/sqrt2({_ket(*k1)}{'+' if sign > 0 else '-'}{_ket(*k2)})"
    return BasisVector(label, {k1: r, k2: sign * r}, desc)


def _computational(labels: Sequence[str], kets: Sequence[tuple[int, int]]) -> tuple[BasisVector, ...]:
    return tuple(BasisVector(lab, {k: 1.0}, _ket(*k)) for lab, k in zip(labels, kets))


def _uncontrolled_line_vectors() -> tuple[BasisVector, ...]:
    vecs = [BasisVector("alpha0", {(0, 0): 1.0}, _ket(0, 0))]
    vecs.append(_two_term("alpha1", (0, 2), (0, -2), +1))
    vecs.append(_two_term("alpha2", (0, 2), (0, -2), -1))
    vecs.append(_two_term("alpha3", (2, 0), (-2, 0), +1))
    vecs.append(_two_term("alpha4", (2, 0), (-2, 0), -1))
    for i, signs in enumerate(_FOUR_SIGNS):
        vecs.append(_four_term(f"alpha{5 + i}", (2, -2), (2, -2), signs))
    return tuple(vecs)


def _controlled_line_vectors() -> tuple[BasisVector, ...]:
    blocks = [((3, -1), (3, -1)), ((3, -1), (1, -3)), ((1, -3), (3, -1)), ((1, -3), (1, -3))]
    vecs = []
    for b, (a_pair, b_pair) in enumerate(blocks):
        for i, signs in enumerate(_FOUR_SIGNS):
            vecs.append(_four_term(f"alpha{4 * b + i}", a_pair, b_pair, signs))
    return tuple(vecs)


@lru_cache(maxsize=None)
def build_position_basis(protocol: Protocol, topology: Topology) -> MeasurementBasis:
    if topology is Topology.LINE:
        vecs = _uncontrolled_line_vectors() if protocol is Protocol.UNCONTROLLED else _controlled_line_vectors()
    elif topology is Topology.TWO_VERTEX:
        vecs = _computational([f"alpha{i}" for i in range(4)], [(0, 0), (0, 1), (1, 0), (1, 1)])
    else:
        hi = 2 if protocol is Protocol.UNCONTROLLED else 3
        lo = 0 if protocol is Protocol.UNCONTROLLED else 1
        vecs = _computational([f"talpha{i}" for i in range(4)], [(hi, hi), (hi, lo), (lo, hi), (lo, lo)])
    return MeasurementBasis(("A1", "B1"), vecs)


COIN_PREFIX = {"A2": "beta", "B2": "gamma"}


def build_coin_basis(which: str, amps: tuple[float, float]) -> MeasurementBasis:
    """{c0|0> + c1|1>, c1|0> - c0|1>} on coin A2 (beta) or B2 (gamma)."""
    if which not in COIN_PREFIX:
        raise ValueError(f"coin basis is defined for A2 or B2, not {which!r}")
    c0, c1 = amps
    if abs(c0 * c0 + c1 * c1 - 1) > ATOL:
        raise ValueError(f"coin amplitudes {amps} are not normalized")
    p = COIN_PREFIX[which]
    return MeasurementBasis((which,), (
        BasisVector(f"{p}0", {(0,): c0, (1,): c1}),
        BasisVector(f"{p}1", {(0,): c1, (1,): -c0}),
    ))


CHARLIE_LABELS = ("00", "01", "10", "11")


@lru_cache(maxsize=None)
def build_controller_basis() -> MeasurementBasis:
    return MeasurementBasis(("C1", "C2"), tuple(
        BasisVector(lab, {(int(lab[0]), int(lab[1])): 1.0}, _ket(*map(int, lab))) for lab in CHARLIE_LABELS
    ))


# -- projection ---------------------------------------------------------------

def _project(state: StateVector, basis: MeasurementBasis, vec: BasisVector):
    slots = [state.layout.index_of(r) for r in basis.registers]
    overlap: dict[BasisIndex, complex] = {}
    comps = vec.components
    for idx, amp in state.items():
        c = comps.get(tuple(idx[s] for s in slots))
        if c is None:
            continue
        rest = list(idx)
        for s in slots:
            rest[s] = 0
        key = tuple(rest)
        overlap[key] = overlap.get(key, 0j) + c.conjugate() * amp
    prob = sum(abs(v) ** 2 for v in overlap.values())
    return slots, overlap, float(prob)


def measure_project(state: StateVector, basis: MeasurementBasis, chosen: str) -> OutcomeRecord:
    vec = basis.vector(chosen)
    slots, overlap, prob = _project(state, basis, vec)
    if prob < 1e-14:
        raise ImpossibleOutcome(f"outcome {chosen} on {basis.registers} has probability {prob:.3g}")
    scale = 1 / math.sqrt(prob)
    out: dict[BasisIndex, complex] = {}
    for rest, ov in overlap.items():
        for vals, c in vec.components.items():
            idx = list(rest)
            for s, v in zip(slots, vals):
                idx[s] = v
            out[tuple(idx)] = c * ov * scale
    return OutcomeRecord((chosen,), min(prob, 1.0), StateVector(state.layout, out))


def outcome_distribution(state: StateVector, basis: MeasurementBasis) -> list[tuple[str, float]]:
    dist = [(v.label, _project(state, basis, v)[2]) for v in basis.vectors]
    residual = state.norm() ** 2 - sum(p for _, p in dist)
    if residual > ATOL:
        raise IncompleteBasis(f"{residual:.3g} of the state lies outside the span of {basis.labels}")
    return dist

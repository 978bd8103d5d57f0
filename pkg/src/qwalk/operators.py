"""Coin and shift operators acting on sparse states.

Shifts are basis relabelings; Hadamard and Pauli gates act on one coin.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .hilbert import BasisIndex, RegisterKind, StateVector

_INV_SQRT2 = 1 / math.sqrt(2)


class WindowOverflow(ValueError):
    """A line shift pushed a walker outside its position window."""


class ShiftKind(enum.Enum):
    LINE = "line"
    TWO_VERTEX = "k2"
    CYCLE4 = "c4"

    @property
    def position_kind(self) -> RegisterKind:
        return RegisterKind.POSITION_LINE if self is ShiftKind.LINE else RegisterKind.POSITION_CYCLE

    @property
    def cycle_size(self) -> int | None:
        return {ShiftKind.TWO_VERTEX: 2, ShiftKind.CYCLE4: 4}.get(self)


@dataclass(frozen=True)
class ConditionalShiftSpec:
    target_position: str
    control_coin: str
    kind: ShiftKind


@dataclass(frozen=True)
class PauliOp:
    axis: str  # "X" or "Z"
    target: str

    def __post_init__(self):
        if self.axis not in ("X", "Z"):
            raise ValueError(f"unsupported Pauli axis {self.axis!r}")


def _coin_slot(state: StateVector, rid: str) -> int:
    slot = state.layout.index_of(rid)
    if not state.layout.registers[slot].is_coin:
        raise ValueError(f"register {rid} is not a coin")
    return slot


def _with(idx: BasisIndex, slot: int, value: int) -> BasisIndex:
    return idx[:slot] + (value,) + idx[slot + 1:]


def apply_hadamard(state: StateVector, coin: str) -> StateVector:
    slot = _coin_slot(state, coin)
    out: dict[BasisIndex, complex] = {}
    for idx, amp in state.items():
        a = amp * _INV_SQRT2
        zero, one = _with(idx, slot, 0), _with(idx, slot, 1)
        out[zero] = out.get(zero, 0j) + a
        out[one] = out.get(one, 0j) + (a if idx[slot] == 0 else -a)
    return StateVector(state.layout, out)


def shifted_position(kind: ShiftKind, position: int, coin: int, inverse: bool = False) -> int:
    """Where a walker at ``position`` lands under the shift for ``coin``."""
    step = 1 if coin == 0 else -1
    if inverse:
        step = -step
    if kind is ShiftKind.LINE:
        return position + step
    if kind is ShiftKind.CYCLE4:
        return (position + step) % 4
    # two-vertex graph: coin 0 stays, coin 1 swaps
    return position if coin == 0 else 1 - position


def apply_conditional_shift(state: StateVector, spec: ConditionalShiftSpec,
                            inverse: bool = False) -> StateVector:
    layout = state.layout
    pslot = layout.index_of(spec.target_position)
    preg = layout.registers[pslot]
    if preg.kind is not spec.kind.position_kind:
        raise ValueError(f"{spec.kind.name} shift cannot act on {preg.kind.value} register {preg.id}")
    if spec.kind.cycle_size is not None and preg.size != spec.kind.cycle_size:
        raise ValueError(f"{spec.kind.name} shift needs a {spec.kind.cycle_size}-vertex register")
    cslot = _coin_slot(state, spec.control_coin)
    out: dict[BasisIndex, complex] = {}
    for idx, amp in state.items():
        new = shifted_position(spec.kind, idx[pslot], idx[cslot], inverse)
        if not preg.contains(new):
            raise WindowOverflow(f"{preg.id} moved to {new}, outside window +-{preg.size}")
        out[_with(idx, pslot, new)] = amp
    return StateVector(layout, out)


def apply_pauli(state: StateVector, op: PauliOp) -> StateVector:
    slot = _coin_slot(state, op.target)
    if op.axis == "X":
        return StateVector(state.layout, {_with(k, slot, 1 - k[slot]): v for k, v in state.items()})
    return StateVector(state.layout, {k: (-v if k[slot] else v) for k, v in state.items()})


def apply_pauli_sequence(state: StateVector, seq: Iterable[PauliOp]) -> StateVector:
    """Apply Paulis in listed order, leftmost first."""
    for op in seq:
        state = apply_pauli(state, op)
    return state


def parse_pauli_string(text: str, target: str) -> list[PauliOp]:
    """``"XZX"`` -> three ops on ``target``; ``"I"`` or ``""`` -> no ops."""
    text = text.strip().upper()
    if text in ("", "I"):
        return []
    bad = set(text) - {"X", "Z"}
    if bad:
        raise ValueError(f"Pauli string {text!r} has characters outside X/Z")
    return [PauliOp(c, target) for c in text]


def pauli_class(text: str) -> str:
    """Reduce a Pauli string to its action up to phase: one of I, X, Z, XZ."""
    ops = parse_pauli_string(text, "_")
    x = sum(op.axis == "X" for op in ops) % 2
    z = sum(op.axis == "Z" for op in ops) % 2
    return {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "XZ"}[(x, z)]


def correction_ops(pair: Sequence[str], targets: Sequence[str] = ("A3", "B3")) -> list[PauliOp]:
    """Ops for an (A3 string, B3 string) correction pair."""
    ops: list[PauliOp] = []
    for text, tgt in zip(pair, targets):
        ops.extend(parse_pauli_string(text, tgt))
    return ops

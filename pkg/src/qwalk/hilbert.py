"""Composite Hilbert space bookkeeping: registers, layouts, sparse state vectors.

A state is a sparse map from a basis index (one integer per register, in
layout order) to a complex amplitude. Line positions are signed integers,
cycle positions run over ``0..n-1`` and coins are ``0``/``1``.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

BasisIndex = tuple[int, ...]

ATOL = 1e-10
NORM_ATOL = 1e-12


class LayoutMismatch(ValueError):
    """Two states over different register layouts were combined."""


class RegisterKind(enum.Enum):
    POSITION_LINE = "line"
    POSITION_CYCLE = "cycle"
    COIN = "coin"


@dataclass(frozen=True)
class RegisterDescriptor:
    id: str
    kind: RegisterKind
    size: int = 2  # half-width L for line windows, vertex count for cycles

    def __post_init__(self):
        if self.kind is RegisterKind.POSITION_LINE and self.size < 0:
            raise ValueError(f"line window for {self.id} must be >= 0")
        if self.kind is RegisterKind.POSITION_CYCLE and self.size not in (2, 4):
            raise ValueError(f"cycle size for {self.id} must be 2 or 4, got {self.size}")
        if self.kind is RegisterKind.COIN and self.size != 2:
            raise ValueError(f"coin {self.id} must have size 2")

    @classmethod
    def line(cls, id: str, window: int) -> RegisterDescriptor:
        return cls(id, RegisterKind.POSITION_LINE, window)

    @classmethod
    def cycle(cls, id: str, n: int) -> RegisterDescriptor:
        return cls(id, RegisterKind.POSITION_CYCLE, n)

    @classmethod
    def coin(cls, id: str) -> RegisterDescriptor:
        return cls(id, RegisterKind.COIN, 2)

    @property
    def is_coin(self) -> bool:
        return self.kind is RegisterKind.COIN

    @property
    def is_position(self) -> bool:
        return not self.is_coin

    @property
    def dimension(self) -> int:
        if self.kind is RegisterKind.POSITION_LINE:
            return 2 * self.size + 1
        return self.size

    def values(self) -> range:
        if self.kind is RegisterKind.POSITION_LINE:
            return range(-self.size, self.size + 1)
        return range(self.size)

    def contains(self, value: int) -> bool:
        return value in self.values()

    def offset(self, value: int) -> int:
        """Dense array offset of ``value`` within this register."""
        if self.kind is RegisterKind.POSITION_LINE:
            return value + self.size
        return value


@dataclass(frozen=True)
class RegisterLayout:
    registers: tuple[RegisterDescriptor, ...]
    _positions: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ids = [r.id for r in self.registers]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate register ids in {ids}")
        object.__setattr__(self, "_positions", {rid: i for i, rid in enumerate(ids)})

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(r.id for r in self.registers)

    @property
    def total_dimension(self) -> int:
        return math.prod(r.dimension for r in self.registers)

    def index_of(self, rid: str) -> int:
        try:
            return self._positions[rid]
        except KeyError:
            raise KeyError(f"unknown register {rid!r}; layout has {self.ids}") from None

    def register(self, rid: str) -> RegisterDescriptor:
        return self.registers[self.index_of(rid)]

    def enumerate_basis(self) -> Iterator[BasisIndex]:
        return itertools.product(*(r.values() for r in self.registers))

    def validate_index(self, idx: BasisIndex) -> None:
        if len(idx) != len(self.registers):
            raise ValueError(f"basis index {idx} has wrong length for {self.ids}")
        for reg, v in zip(self.registers, idx):
            if not reg.contains(v):
                raise ValueError(f"value {v} outside register {reg.id}")


@dataclass(frozen=True)
class StateVector:
    """Immutable sparse state. Zero amplitudes are never stored."""

    layout: RegisterLayout
    amplitudes: Mapping[BasisIndex, complex]

    def __post_init__(self):
        cleaned = {k: complex(v) for k, v in self.amplitudes.items() if abs(v) > 1e-15}
        object.__setattr__(self, "amplitudes", cleaned)

    def __len__(self) -> int:
        return len(self.amplitudes)

    def __getitem__(self, idx: BasisIndex) -> complex:
        return self.amplitudes.get(tuple(idx), 0j)

    def items(self):
        return self.amplitudes.items()

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def scaled(self, factor: complex) -> StateVector:
        return StateVector(self.layout, {k: factor * v for k, v in self.amplitudes.items()})

    def normalized(self) -> StateVector:
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return self.scaled(1 / n)

    def to_dense(self) -> np.ndarray:
        shape = [r.dimension for r in self.layout.registers]
        out = np.zeros(shape, dtype=complex)
        regs = self.layout.registers
        for idx, amp in self.amplitudes.items():
            out[tuple(r.offset(v) for r, v in zip(regs, idx))] = amp
        return out.reshape(-1)

    def sorted_terms(self) -> list[tuple[BasisIndex, complex]]:
        return sorted(self.amplitudes.items())


def layout_for(ids: Sequence[str],
               positions: Mapping[str, RegisterDescriptor] | None = None) -> RegisterLayout:
    """Assemble a layout; registers not given as positions become coins."""
    positions = dict(positions or {})
    regs = [positions[rid] if rid in positions else RegisterDescriptor.coin(rid) for rid in ids]
    return RegisterLayout(tuple(regs))


def make_initial_state(layout: RegisterLayout) -> StateVector:
    return StateVector(layout, {tuple(0 for _ in layout.registers): 1.0})


def basis_state(layout: RegisterLayout, values: Mapping[str, int] | BasisIndex) -> StateVector:
    if isinstance(values, Mapping):
        idx = tuple(values.get(rid, 0) for rid in layout.ids)
    else:
        idx = tuple(values)
    layout.validate_index(idx)
    return StateVector(layout, {idx: 1.0})


def product_state(layout: RegisterLayout,
                  factors: Iterable[tuple[Sequence[str], Mapping[tuple[int, ...], complex]]]) -> StateVector:
    """Tensor product of factor states, each given over a subset of registers.

    Every register of the layout must be covered exactly once.
    """
    slots: list[tuple[list[int], Mapping[tuple[int, ...], complex]]] = []
    covered: list[str] = []
    for rids, comps in factors:
        slots.append(([layout.index_of(r) for r in rids], comps))
        covered.extend(rids)
    if sorted(covered) != sorted(layout.ids):
        raise ValueError(f"factors cover {covered}, layout is {layout.ids}")
    amps: dict[BasisIndex, complex] = {}
    n = len(layout.registers)
    for combo in itertools.product(*(list(c.items()) for _, c in slots)):
        idx = [0] * n
        amp = 1 + 0j
        for (where, _), (vals, c) in zip(slots, combo):
            for w, v in zip(where, vals):
                idx[w] = v
            amp *= c
        key = tuple(idx)
        amps[key] = amps.get(key, 0j) + amp
    return StateVector(layout, amps)


def _check_layouts(x: StateVector, y: StateVector) -> None:
    if x.layout != y.layout:
        raise LayoutMismatch(f"{x.layout.ids} vs {y.layout.ids}")


def inner_product(x: StateVector, y: StateVector) -> complex:
    """<x|y>, conjugate-linear in ``x``."""
    _check_layouts(x, y)
    small, large = (x, y) if len(x) <= len(y) else (y, x)
    total = 0j
    for idx, a in small.items():
        b = large[idx]
        if b:
            total += a.conjugate() * b if small is x else b.conjugate() * a
    return total


def fidelity_up_to_phase(x: StateVector, y: StateVector) -> float:
    f = abs(inner_product(x, y)) ** 2
    return min(1.0, max(0.0, f))


def states_equal(x: StateVector, y: StateVector, atol: float = ATOL) -> bool:
    """Exact (phase-sensitive) amplitude comparison."""
    _check_layouts(x, y)
    keys = set(x.amplitudes) | set(y.amplitudes)
    return all(abs(x[k] - y[k]) <= atol for k in keys)


def reduced_density_matrix(state: StateVector, keep: Sequence[str]) -> np.ndarray:
    """Partial trace over every register not in ``keep`` (kept in the given order)."""
    layout = state.layout
    kept = [layout.index_of(r) for r in keep]
    rest = [i for i in range(len(layout.registers)) if i not in kept]
    dims = [layout.registers[i].dimension for i in kept]
    dim = math.prod(dims)
    # group amplitudes by environment index; rho = sum_env |v_env><v_env|
    env: dict[tuple[int, ...], np.ndarray] = {}
    for idx, amp in state.items():
        e = tuple(idx[i] for i in rest)
        flat = 0
        for i, d in zip(kept, dims):
            flat = flat * d + layout.registers[i].offset(idx[i])
        vec = env.setdefault(e, np.zeros(dim, dtype=complex))
        vec[flat] += amp
    rho = np.zeros((dim, dim), dtype=complex)
    for vec in env.values():
        rho += np.outer(vec, vec.conj())
    return rho


def format_ket(layout: RegisterLayout, idx: BasisIndex) -> str:
    """Concatenated ket label, e.g. ``|2-20110>``."""
    return "|" + "".join(str(v) for v in idx) + ">"


def parse_ket(layout: RegisterLayout, text: str) -> BasisIndex:
    """Inverse of :func:`format_ket`; one (optionally signed) digit per register."""
    body = text.strip().lstrip("|").rstrip(">").rstrip("⟩")
    vals: list[int] = []
    i = 0
    while i < len(body):
        sign = 1
        if body[i] in "-−":
            sign, i = -1, i + 1
        vals.append(sign * int(body[i]))
        i += 1
    idx = tuple(vals)
    layout.validate_index(idx)
    return idx

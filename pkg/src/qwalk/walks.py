"""Fixed walk programs for the uncontrolled (4-step) and controlled (6-step) protocols."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

from .hilbert import RegisterDescriptor, RegisterLayout, StateVector, layout_for, make_initial_state
from .operators import ConditionalShiftSpec, ShiftKind, apply_conditional_shift, apply_hadamard


class Protocol(enum.Enum):
    UNCONTROLLED = "uncontrolled"
    CONTROLLED = "controlled"

    @property
    def n_steps(self) -> int:
        return 4 if self is Protocol.UNCONTROLLED else 6

    @property
    def register_ids(self) -> tuple[str, ...]:
        base = ("A1", "B1", "A2", "A3", "B2", "B3")
        return base if self is Protocol.UNCONTROLLED else base + ("C1", "C2")


class Topology(enum.Enum):
    LINE = "line"
    TWO_VERTEX = "k2"
    CYCLE4 = "c4"

    @property
    def shift_kind(self) -> ShiftKind:
        return {
            Topology.LINE: ShiftKind.LINE,
            Topology.TWO_VERTEX: ShiftKind.TWO_VERTEX,
            Topology.CYCLE4: ShiftKind.CYCLE4,
        }[self]


# (hadamard coin, shifted position) per step; the coin also controls the shift
_WIRING = (
    ("A2", "A1"),
    ("B2", "B1"),
    ("A3", "B1"),
    ("B3", "A1"),
    ("C1", "A1"),
    ("C2", "B1"),
)


@dataclass(frozen=True)
class WalkStep:
    hadamard_coin: str
    shift: ConditionalShiftSpec

    def __post_init__(self):
        if self.shift.control_coin != self.hadamard_coin:
            raise ValueError("a walk step's shift must be controlled by its Hadamard coin")


@dataclass(frozen=True)
class WalkProgram:
    protocol: Protocol
    topology: Topology
    steps: tuple[WalkStep, ...]

    def __post_init__(self):
        if len(self.steps) != self.protocol.n_steps:
            raise ValueError(f"{self.protocol.value} program needs {self.protocol.n_steps} steps")

    @property
    def layout(self) -> RegisterLayout:
        return build_layout(self.protocol, self.topology)


def line_window(protocol: Protocol) -> int:
    """Smallest half-width the walkers never leave."""
    return 2 if protocol is Protocol.UNCONTROLLED else 3


@lru_cache(maxsize=None)
def build_layout(protocol: Protocol, topology: Topology) -> RegisterLayout:
    if topology is Topology.LINE:
        pos = {r: RegisterDescriptor.line(r, line_window(protocol)) for r in ("A1", "B1")}
    else:
        n = 2 if topology is Topology.TWO_VERTEX else 4
        pos = {r: RegisterDescriptor.cycle(r, n) for r in ("A1", "B1")}
    return layout_for(protocol.register_ids, pos)


def build_walk_program(protocol: Protocol, topology: Topology) -> WalkProgram:
    kind = topology.shift_kind
    steps = tuple(
        WalkStep(coin, ConditionalShiftSpec(target, coin, kind))
        for coin, target in _WIRING[: protocol.n_steps]
    )
    return WalkProgram(protocol, topology, steps)


def apply_step(state: StateVector, step: WalkStep) -> StateVector:
    return apply_conditional_shift(apply_hadamard(state, step.hadamard_coin), step.shift)


def walk_states(program: WalkProgram) -> list[StateVector]:
    """[psi_0, psi_1, ..., psi_n] for the whole program."""
    states = [make_initial_state(program.layout)]
    for step in program.steps:
        states.append(apply_step(states[-1], step))
    return states


@lru_cache(maxsize=None)
def _cached_states(protocol: Protocol, topology: Topology) -> tuple[StateVector, ...]:
    return tuple(walk_states(build_walk_program(protocol, topology)))


def run_walk(program: WalkProgram, upto: int | None = None) -> StateVector:
    n = len(program.steps)
    if upto is None:
        upto = n
    if not 0 <= upto <= n:
        raise ValueError(f"upto must be in [0, {n}], got {upto}")
    canonical = build_walk_program(program.protocol, program.topology)
    if program == canonical:
        return _cached_states(program.protocol, program.topology)[upto]
    return walk_states(program)[upto]

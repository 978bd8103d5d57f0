"""Published intermediate states and term-by-term comparison against simulation.

The reference kets live in ``data/reference_states.json`` keyed by
``"<protocol>/<topology>/<step>"``. Every published term carries the same
positive amplitude (the listed prefactor), so a reference state is a ket list
plus one number. Simulation is treated as ground truth; a mismatch is a
report, not an error.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from .hilbert import BasisIndex, StateVector, format_ket, parse_ket
from .walks import Protocol, Topology, build_walk_program, run_walk

AMP_TOL = 1e-12


@dataclass(frozen=True)
class ReferenceState:
    key: str
    prefactor: str
    amplitude: float
    kets: tuple[str, ...]


@dataclass
class FixtureDiff:
    key: str
    simulated_terms: int
    reference_terms: int
    missing: list[str] = field(default_factory=list)  # simulated, absent from reference
    extra: list[str] = field(default_factory=list)  # listed in reference, not simulated
    amplitude_mismatch: list[tuple[str, float, float]] = field(default_factory=list)
    duplicates: list[str] = field(default_factory=list)
    unparsed: list[str] = field(default_factory=list)  # published kets that fit no register layout

    @property
    def matches(self) -> bool:
        return not (self.missing or self.extra or self.amplitude_mismatch or self.duplicates
                    or self.unparsed)

    def summary(self) -> str:
        if self.matches:
            return f"{self.key}: {self.simulated_terms} terms match"
        parts = [f"{self.key}: simulated {self.simulated_terms} terms, published {self.reference_terms}"]
        if self.missing:
            parts.append("  not in published: " + " ".join(self.missing))
        if self.extra:
            parts.append("  not in simulation: " + " ".join(self.extra))
        if self.duplicates:
            parts.append("  listed twice: " + " ".join(self.duplicates))
        if self.unparsed:
            parts.append("  malformed: " + " ".join(self.unparsed))
        for ket, sim, ref in self.amplitude_mismatch:
            parts.append(f"  {ket}: simulated {sim:+.6g}, published {ref:+.6g}")
        return "\n".join(parts)


def fixture_key(protocol: Protocol, topology: Topology, step: int) -> str:
    return f"{protocol.value}/{topology.value}/{step}"


@lru_cache(maxsize=None)
def _load() -> dict[str, ReferenceState]:
    raw = json.loads(resources.files("qwalk").joinpath("data").joinpath("reference_states.json")
                     .read_text(encoding="utf-8"))
    return {k: ReferenceState(k, v["prefactor"], float(v["amplitude"]), tuple(v["kets"])) for k, v in raw.items()}


def reference_state(protocol: Protocol, topology: Topology, step: int) -> ReferenceState | None:
    return _load().get(fixture_key(protocol, topology, step))


def available_fixtures() -> list[str]:
    return sorted(_load())


def compare_to_reference(state: StateVector, ref: ReferenceState) -> FixtureDiff:
    layout = state.layout
    listed: dict[BasisIndex, float] = {}
    dup = []
    diff_unparsed: list[str] = []
    for text in ref.kets:
        try:
            idx = parse_ket(layout, text)
        except ValueError:
            diff_unparsed.append(text)
            continue
        if idx in listed:
            dup.append(text)
        listed[idx] = listed.get(idx, 0.0) + ref.amplitude
    sim = dict(state.items())
    diff = FixtureDiff(ref.key, len(sim), len(ref.kets), duplicates=dup, unparsed=diff_unparsed)
    for idx in sorted(sim):
        if idx not in listed:
            diff.missing.append(format_ket(layout, idx))
        elif abs(sim[idx] - listed[idx]) > AMP_TOL:
            diff.amplitude_mismatch.append((format_ket(layout, idx), sim[idx].real, listed[idx]))
    diff.extra = [format_ket(layout, idx) for idx in sorted(listed) if idx not in sim]
    return diff


def compare_step(protocol: Protocol, topology: Topology, step: int) -> FixtureDiff | None:
    ref = reference_state(protocol, topology, step)
    if ref is None:
        return None
    return compare_to_reference(run_walk(build_walk_program(protocol, topology), step), ref)

"""Correction tables: published transcriptions, oracle derivation, and diffing.

Table file format (UTF-8, ``#`` starts a comment)::

    position  alice  bob     charlie  a3   b3
    alpha0    beta0  gamma0  00       X    I     # optional note

``charlie`` is ``-`` (or omitted) for the uncontrolled protocol. Pauli strings
are over ``{I, X, Z}`` and are applied left to right on coin A3 / B3.
"""
from __future__ import annotations

import enum
import itertools
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

import numpy as np

from .hilbert import fidelity_up_to_phase
from .operators import apply_pauli_sequence, correction_ops, pauli_class
from .protocol import (
    PASS_THRESHOLD,
    PAULI_CLASSES,
    Correction,
    OutcomeTuple,
    ProtocolConfig,
    measurement_cascade,
    all_outcomes,
    random_target,
    swapped_target_state,
)
from .walks import Protocol, Topology

TABLE_DIR_ENV = "QWALK_TABLE_DIR"

EXPECTED_ROWS = {
    (Protocol.UNCONTROLLED, Topology.LINE): 36,
    (Protocol.UNCONTROLLED, Topology.TWO_VERTEX): 16,
    (Protocol.UNCONTROLLED, Topology.CYCLE4): 16,
    (Protocol.CONTROLLED, Topology.LINE): 256,
    (Protocol.CONTROLLED, Topology.TWO_VERTEX): 64,
    (Protocol.CONTROLLED, Topology.CYCLE4): 64,
}


class TableFormatError(ValueError):
    pass


class NoValidCorrection(RuntimeError):
    """No Pauli-pair class restores the target; points at a wiring or basis bug."""


class AmbiguousCorrection(RuntimeError):
    """More than one Pauli-pair class works: a degenerate outcome."""


class Provenance(enum.Enum):
    PUBLISHED = "published"
    ORACLE_DERIVED = "derived"


@dataclass
class CorrectionTable:
    config_key: tuple[Protocol, Topology]
    rows: dict[OutcomeTuple, Correction]
    provenance: Provenance
    notes: dict[OutcomeTuple, str] = field(default_factory=dict)

    def sorted_rows(self) -> list[tuple[OutcomeTuple, Correction]]:
        return sorted(self.rows.items(), key=lambda kv: kv[0].sort_key())


# -- file format --------------------------------------------------------------

def parse_table(text: str, config_key: tuple[Protocol, Topology],
                provenance: Provenance = Provenance.PUBLISHED) -> CorrectionTable:
    rows: dict[OutcomeTuple, Correction] = {}
    notes: dict[OutcomeTuple, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        body, _, note = raw.partition("#")
        fields = body.split()
        if not fields:
            continue
        if len(fields) == 5:
            fields.insert(3, "-")
        if len(fields) != 6:
            raise TableFormatError(f"line {lineno}: expected 5 or 6 fields, got {len(fields)}")
        pos, alice, bob, charlie, a3, b3 = fields
        for seq in (a3, b3):
            if set(seq.upper()) - set("IXZ"):
                raise TableFormatError(f"line {lineno}: bad Pauli string {seq!r}")
        key = OutcomeTuple(pos, alice, bob, None if charlie == "-" else charlie)
        if key in rows:
            raise TableFormatError(f"line {lineno}: duplicate row {key}")
        rows[key] = (a3.upper(), b3.upper())
        if note.strip():
            notes[key] = note.strip()
    return CorrectionTable(config_key, rows, provenance, notes)


def render_table(table: CorrectionTable) -> str:
    protocol, topology = table.config_key
    lines = [
        f"# {table.provenance.value} correction table: {protocol.value} protocol, {topology.value} topology",
        "# position  alice  bob     charlie  a3   b3",
    ]
    for o, (a3, b3) in table.sorted_rows():
        line = f"{o.position:<11} {o.alice:<6} {o.bob:<7} {o.charlie or '-':<8} {a3:<4} {b3}"
        if o in table.notes:
            line = f"{line:<48} # {table.notes[o]}"
        lines.append(line.rstrip())
    return "\n".join(lines) + "\n"


def load_table(path: str | Path, config_key: tuple[Protocol, Topology],
               provenance: Provenance = Provenance.PUBLISHED) -> CorrectionTable:
    return parse_table(Path(path).read_text(encoding="utf-8"), config_key, provenance)


def save_table(table: CorrectionTable, path: str | Path) -> None:
    Path(path).write_text(render_table(table), encoding="utf-8")


def _read_data_file(name: str) -> str:
    override = os.environ.get(TABLE_DIR_ENV)
    if override:
        return (Path(override) / name).read_text(encoding="utf-8")
    return resources.files("qwalk").joinpath("data").joinpath(name).read_text(encoding="utf-8")


def _has_data_file(name: str) -> bool:
    override = os.environ.get(TABLE_DIR_ENV)
    if override:
        return (Path(override) / name).is_file()
    return resources.files("qwalk").joinpath("data").joinpath(name).is_file()


def relabel_cycle(table: CorrectionTable, protocol: Protocol) -> CorrectionTable:
    """Two-vertex table -> 4-cycle table by renaming alpha_i to talpha_i."""
    def swap(o: OutcomeTuple) -> OutcomeTuple:
        return OutcomeTuple("t" + o.position, o.alice, o.bob, o.charlie)
    return CorrectionTable(
        (protocol, Topology.CYCLE4),
        {swap(o): c for o, c in table.rows.items()},
        table.provenance,
        {swap(o): n for o, n in table.notes.items()},
    )


def load_published_table(protocol: Protocol, topology: Topology) -> CorrectionTable:
    """Load the published table for a configuration (4-cycle via relabeling)."""
    name = f"{protocol.value}_{topology.value}.tbl"
    if topology is Topology.CYCLE4 and not _has_data_file(name):
        return relabel_cycle(load_published_table(protocol, Topology.TWO_VERTEX), protocol)
    try:
        text = _read_data_file(name)
    except FileNotFoundError as exc:
        raise TableFormatError(f"table data file {name} not found") from exc
    table = parse_table(text, (protocol, topology))
    expected = EXPECTED_ROWS[(protocol, topology)]
    if len(table.rows) != expected:
        raise TableFormatError(f"{name}: {len(table.rows)} rows, expected {expected}")
    return table


# -- oracle -------------------------------------------------------------------

def candidate_corrections() -> list[Correction]:
    return list(itertools.product(PAULI_CLASSES, repeat=2))


def derive_correction(config: ProtocolConfig, outcome: OutcomeTuple, n_pairs: int = 3,
                      seed: int = 1234) -> set[Correction]:
    """Every Pauli-pair class that restores the swapped target at all sampled targets.

    The configuration's own targets are always checked, plus ``n_pairs``
    random ones.
    """
    rng = np.random.default_rng(seed)
    configs = [config] + [config.with_targets(random_target(rng), random_target(rng)) for _ in range(n_pairs)]
    valid = set(candidate_corrections())
    for cfg in configs:
        state, _, factors = measurement_cascade(cfg, outcome)
        target = swapped_target_state(cfg, factors)
        for cand in list(valid):
            fid = fidelity_up_to_phase(target, apply_pauli_sequence(state, correction_ops(cand)))
            if fid < PASS_THRESHOLD:
                valid.discard(cand)
        if not valid:
            break
    if not valid:
        raise NoValidCorrection(f"no Pauli correction works for {outcome}")
    return valid


def derive_table(protocol: Protocol, topology: Topology, n_pairs: int = 3, seed: int = 1234,
                 alice=(1.0, 0.0), bob=(1.0, 0.0)) -> CorrectionTable:
    cfg = ProtocolConfig(protocol, topology, alice, bob)
    rows: dict[OutcomeTuple, Correction] = {}
    for o in all_outcomes(protocol, topology):
        found = derive_correction(cfg, o, n_pairs, seed)
        if len(found) > 1:
            raise AmbiguousCorrection(f"{o}: several valid corrections {sorted(found)}")
        rows[o] = found.pop()
    return CorrectionTable((protocol, topology), rows, Provenance.ORACLE_DERIVED)


def canonical_correction(corr: Correction) -> Correction:
    return pauli_class(corr[0]), pauli_class(corr[1])


# -- diff ---------------------------------------------------------------------

class RowStatus(enum.Enum):
    MATCH = "match"
    LISTED_INVALID = "listed-invalid"
    MISSING_ROW = "missing-row"


@dataclass(frozen=True)
class RowDiff:
    outcome: OutcomeTuple
    status: RowStatus
    listed: Correction | None
    derived: Correction | None
    note: str = ""


@dataclass
class TableDiff:
    config_key: tuple[Protocol, Topology]
    rows: list[RowDiff]

    @property
    def counts(self) -> Mapping[RowStatus, int]:
        return {s: sum(r.status is s for r in self.rows) for s in RowStatus}

    def exceptions(self) -> list[RowDiff]:
        return [r for r in self.rows if r.status is not RowStatus.MATCH]

    def flagged(self) -> list[RowDiff]:
        return [r for r in self.rows if r.note]


def diff_tables(listed: CorrectionTable, derived: CorrectionTable) -> TableDiff:
    """Compare corrections as actions: strings reduce to Pauli classes first.

    Since a Pauli class fixes the action up to global phase, equal classes
    mean the listed product achieves the same fidelity as the derived one.
    """
    if listed.config_key != derived.config_key:
        raise ValueError(f"config mismatch: {listed.config_key} vs {derived.config_key}")
    notes = {**derived.notes, **listed.notes}
    rows = []
    for o in sorted(set(listed.rows) | set(derived.rows), key=OutcomeTuple.sort_key):
        p, d = listed.rows.get(o), derived.rows.get(o)
        if p is None or d is None:
            status = RowStatus.MISSING_ROW
        elif canonical_correction(p) == canonical_correction(d):
            status = RowStatus.MATCH
        else:
            status = RowStatus.LISTED_INVALID
        rows.append(RowDiff(o, status, p, d, notes.get(o, "")))
    return TableDiff(listed.config_key, rows)

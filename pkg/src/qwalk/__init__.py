"""Exact state-vector simulation of coined quantum walks for bidirectional remote state preparation."""
from .hilbert import StateVector, fidelity_up_to_phase, inner_product, make_initial_state
from .protocol import OutcomeTuple, ProtocolConfig, run_protocol_outcome, success_probability, verify_table
from .tables import derive_correction, derive_table, diff_tables, load_published_table
from .walks import Protocol, Topology, build_walk_program, run_walk

__all__ = [
    "OutcomeTuple",
    "Protocol",
    "ProtocolConfig",
    "StateVector",
    "Topology",
    "build_walk_program",
    "derive_correction",
    "derive_table",
    "diff_tables",
    "load_published_table",
    "fidelity_up_to_phase",
    "inner_product",
    "make_initial_state",
    "run_protocol_outcome",
    "run_walk",
    "success_probability",
    "verify_table",
]

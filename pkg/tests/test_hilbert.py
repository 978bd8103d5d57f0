from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import SMALL, small_states
from qwalk.hilbert import (
    LayoutMismatch,
    RegisterDescriptor,
    StateVector,
    basis_state,
    fidelity_up_to_phase,
    format_ket,
    inner_product,
    layout_for,
    make_initial_state,
    parse_ket,
    product_state,
    reduced_density_matrix,
    states_equal,
)
from qwalk.walks import Protocol, Topology, build_layout, build_walk_program, run_walk


def test_register_dimensions():
    assert RegisterDescriptor.line("A1", 2).dimension == 5
    assert list(RegisterDescriptor.line("A1", 1).values()) == [-1, 0, 1]
    assert RegisterDescriptor.cycle("A1", 4).dimension == 4
    assert RegisterDescriptor.coin("A2").dimension == 2
    with pytest.raises(ValueError):
        RegisterDescriptor.cycle("A1", 3)


def test_layout_enumeration_matches_dimension():
    assert SMALL.total_dimension == 7 * 4 * 2 * 2 * 2
    assert sum(1 for _ in SMALL.enumerate_basis()) == SMALL.total_dimension


def test_duplicate_register_rejected():
    with pytest.raises(ValueError):
        layout_for(("A2", "A2"))


@pytest.mark.parametrize("protocol", list(Protocol))
def test_initial_state_is_all_zeros(protocol):
    layout = build_layout(protocol, Topology.LINE)
    s = make_initial_state(layout)
    assert dict(s.items()) == {(0,) * len(protocol.register_ids): 1}
    assert s.norm() == 1.0


def test_zero_amplitudes_are_dropped():
    s = StateVector(SMALL, {(0, 0, 0, 0, 0): 1.0, (1, 0, 0, 0, 0): 0.0})
    assert len(s) == 1


def test_inner_product_examples():
    prog = build_walk_program(Protocol.UNCONTROLLED, Topology.LINE)
    psi0, psi1 = run_walk(prog, 0), run_walk(prog, 1)
    assert inner_product(psi0, psi0) == pytest.approx(1)
    assert inner_product(psi0, psi1) == 0


@given(small_states(), small_states())
def test_inner_product_hermitian(x, y):
    assert inner_product(x, y) == pytest.approx(np.conj(inner_product(y, x)), abs=1e-12)
    assert inner_product(x, y) == pytest.approx(np.vdot(x.to_dense(), y.to_dense()), abs=1e-12)


@given(small_states(), st.floats(0, 6.3))
def test_fidelity_ignores_global_phase(x, phi):
    assert fidelity_up_to_phase(x, x.scaled(np.exp(1j * phi))) == pytest.approx(1, abs=1e-12)


def test_fidelity_examples():
    a = basis_state(SMALL, (0, 0, 0, 0, 0))
    b = basis_state(SMALL, (1, 0, 0, 0, 0))
    assert fidelity_up_to_phase(a, a.scaled(-1)) == 1
    assert fidelity_up_to_phase(a, b) == 0
    assert not states_equal(a, a.scaled(-1))


def test_layout_mismatch():
    other = build_layout(Protocol.UNCONTROLLED, Topology.LINE)
    with pytest.raises(LayoutMismatch):
        inner_product(make_initial_state(other), basis_state(SMALL, (0, 0, 0, 0, 0)))


@given(small_states())
def test_ket_round_trip(x):
    for idx, _ in x.items():
        assert parse_ket(SMALL, format_ket(SMALL, idx)) == idx


def test_ket_parsing_conventions():
    layout = build_layout(Protocol.UNCONTROLLED, Topology.LINE)
    assert parse_ket(layout, "|2-20110>") == (2, -2, 0, 1, 1, 0)
    assert parse_ket(layout, "|−101000⟩") == (-1, 0, 1, 0, 0, 0)
    assert parse_ket(layout, "|-001010>") == (0, 0, 1, 0, 1, 0)
    with pytest.raises(ValueError):
        parse_ket(layout, "|30000>")


def test_product_state_requires_full_cover():
    with pytest.raises(ValueError):
        product_state(SMALL, [(("P",), {(0,): 1.0})])


@given(small_states())
def test_reduced_density_matrix_is_a_state(x):
    rho = reduced_density_matrix(x, ("c", "d"))
    assert rho.shape == (4, 4)
    assert np.trace(rho).real == pytest.approx(1, abs=1e-12)
    assert np.allclose(rho, rho.conj().T)
    assert np.linalg.eigvalsh(rho).min() > -1e-12

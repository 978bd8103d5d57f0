from __future__ import annotations

import cmath
import math

import hypothesis.strategies as st
from hypothesis import settings

from qwalk.hilbert import RegisterDescriptor, StateVector, layout_for

settings.register_profile("qwalk", deadline=None, derandomize=True)
settings.load_profile("qwalk")

# a small mixed layout: one line walker, one 4-cycle walker, one 2-vertex walker, two coins
SMALL = layout_for(
    ("P", "Q", "R", "c", "d"),
    {
        "P": RegisterDescriptor.line("P", 3),
        "Q": RegisterDescriptor.cycle("Q", 4),
        "R": RegisterDescriptor.cycle("R", 2),
    },
)


@st.composite
def small_states(draw, interior: bool = False, max_terms: int = 6):
    """Random normalized states on SMALL; ``interior`` keeps P within +-2."""
    span = 2 if interior else 3
    idx = st.tuples(
        st.integers(-span, span), st.integers(0, 3), st.integers(0, 1),
        st.integers(0, 1), st.integers(0, 1),
    )
    keys = draw(st.lists(idx, min_size=1, max_size=max_terms, unique=True))
    amps = {}
    for k in keys:
        r = draw(st.floats(0.1, 1.0))
        phi = draw(st.floats(0.0, 2 * math.pi))
        amps[k] = r * cmath.exp(1j * phi)
    return StateVector(SMALL, amps).normalized()


def random_state(rng, layout=SMALL, terms=5, interior=False):
    span = 2 if interior else 3
    amps = {}
    for _ in range(terms):
        k = (int(rng.integers(-span, span + 1)), int(rng.integers(0, 4)), int(rng.integers(0, 2)),
             int(rng.integers(0, 2)), int(rng.integers(0, 2)))
        amps[k] = complex(rng.normal(), rng.normal())
    return StateVector(layout, amps).normalized()


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, ok: bool, detail: str) -> str:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

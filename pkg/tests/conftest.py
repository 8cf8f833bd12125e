import numpy as np
import pytest

from twolayer_pcdg.model import PhysParams

# depths of the moving equilibrium used throughout (left: b = -2, right: b = -1)
LEFT_DEPTHS = (1.22373355048230, 0.968329515483846)
RIGHT_DEPTHS = (1.44970064153589, 1.12439026921484)


@pytest.fixture
def params():
    return PhysParams(10.0, 0.98)


@pytest.fixture
def left_state():
    """Conservative ``(h1, m1, h2, m2, b)`` of the left moving-equilibrium state."""
    return np.array([LEFT_DEPTHS[0], 12.0, LEFT_DEPTHS[1], 10.0, -2.0])


# one verdict line per acceptance criterion, printed in the terminal summary
ACCEPTANCE = {}


def record_verdict(number, ok, detail):
    ACCEPTANCE[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE[number])


def record_note(number, text):
    """A line listed after a criterion's verdict, without PASS/FAIL."""
    ACCEPTANCE[number + 0.5] = f"  note: {text}"
    print(ACCEPTANCE[number + 0.5])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])

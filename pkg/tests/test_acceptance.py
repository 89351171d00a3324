"""Acceptance gate: every criterion at its stated tolerance and time budget.

Each criterion prints one ``[PASS]``/``[FAIL]`` line; the lines are also
collected into the terminal summary.
"""
import pytest

from ccspectral.acceptance import CRITERIA, NAMES, criterion_10

LINES = []


@pytest.fixture(scope="module")
def first_pass():
    return {}


@pytest.mark.parametrize("number", range(1, 11), ids=[f"{i}-{n}" for i, n in enumerate(NAMES, start=1)])
def test_criterion(number, first_pass):
    if number == 10:
        earlier = [first_pass[i] for i in range(1, 10) if i in first_pass]
        result = criterion_10(earlier if len(earlier) == 9 else None)
    else:
        result = CRITERIA[number - 1]()
        first_pass[number] = result
    line = result.line()
    LINES.append(line)
    print(line)
    assert result.passed, line

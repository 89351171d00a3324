import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ccspectral.extrapolation import last_value, richardson

R = [8, 16, 32, 64]


def test_first_order_ladder_is_exact():
    ex = richardson(R, [1 + 2 / r for r in R])
    assert ex.value == pytest.approx(1.0, abs=1e-13)
    assert ex.converged


def test_second_order_ladder_is_exact():
    ex = richardson(R, [3 - 5 / r**2 for r in R], conservative=False)
    assert ex.value == pytest.approx(3.0, abs=1e-12)
    assert ex.error <= 1e-12
    assert "p=2" in ex.method


@given(st.floats(-5, 5), st.floats(-10, 10).filter(lambda a: abs(a) > 1e-3), st.floats(1, 4))
def test_power_law_limits(c, a, p):
    vals = [c + a * r**-p for r in R]
    ex = richardson(R, vals)
    assert abs(ex.value - c) <= 1e-8 * max(1, abs(a))
    # default error bar never undercuts the last raw difference
    assert ex.error >= abs(vals[-1] - vals[-2])


@given(st.lists(st.floats(-1, 1), min_size=2, max_size=6))
def test_error_bar_at_least_last_difference(vals):
    ex = richardson(list(range(1, len(vals) + 1)), vals)
    assert ex.error >= abs(vals[-1] - vals[-2])
    assert np.isfinite(ex.error)


def test_non_monotone_ladder_flagged():
    vals = [1.0, 1.01, 0.9, 1.2]
    ex = richardson(R, vals)
    assert not ex.converged
    assert ex.error >= max(abs(np.diff(vals)))


def test_constant_and_single_ladders():
    ex = richardson(R, [0.25] * 4)
    assert ex.value == 0.25 and ex.error == 0 and ex.converged
    one = richardson([8], [2.0])
    assert one.error == np.inf and not one.converged


def test_complex_values_and_bad_input():
    ex = richardson(R, [1j + 1 / r for r in R])
    assert ex.value == pytest.approx(1j, abs=1e-13)
    with pytest.raises(ValueError):
        richardson([8, 4], [1, 2])
    with pytest.raises(ValueError):
        richardson([4, 8], [1, np.nan])
    with pytest.raises(ValueError):
        richardson([], [])


def test_last_value_rule():
    ex = last_value([2, 4, 8], [1.0, 0.5, 0.4])
    assert ex.value == 0.4 and ex.error == pytest.approx(0.1) and ex.converged
    assert last_value([2, 4, 8], [0.0, 0.0, 0.0]).error == 0


def test_serialisation_round_trip():
    d = richardson(R, [1 + 1j / r for r in R]).to_dict()
    assert set(d) == {"value", "error", "converged", "method", "steps", "raw", "differences", "first_order"}
    assert len(d["raw"]) == 4 and len(d["differences"]) == 3

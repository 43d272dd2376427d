import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nearnet.bounds import (
    BoundInput,
    BoundParams,
    delta_schedule,
    property3_gap,
    q_bound,
    q_value,
)

# Frozen at first computation with the default constants; guards regressions.
GAP_ANCHOR_N1E6_M10 = 0.02528363827414437


def test_bound_input_validation():
    with pytest.raises(ValueError):
        BoundInput(n=10, alpha=0.1, m=10, delta=0.1)  # m == n
    with pytest.raises(ValueError):
        BoundInput(n=10, alpha=1.5, m=1, delta=0.1)
    with pytest.raises(ValueError):
        BoundInput(n=10, alpha=0.1, m=1, delta=0.0)
    with pytest.raises(ValueError):
        BoundInput(n=0, alpha=0.1, m=0, delta=0.1)
    with pytest.raises(ValueError):
        BoundParams(c_linear=0.0)


def test_q_bound_zero_error_zero_compression_closed_form():
    # With alpha = m = 0 every m-term vanishes.
    for n, delta in ((100, 0.05), (10_000, 0.001)):
        expected = 2.0 * math.log(1 / delta) / n + math.sqrt(2.0 * math.log(1 / delta) / n)
        assert q_value(n, 0.0, 0, delta) == pytest.approx(expected, rel=1e-15)


def test_q_bound_monotone_in_alpha_and_m():
    assert q_value(1000, 0.2, 10, 0.01) < q_value(1000, 0.3, 10, 0.01)
    assert q_value(1000, 0.1, 5, 0.01) < q_value(1000, 0.1, 50, 0.01)


@settings(max_examples=300)
@given(
    n=st.integers(2, 10**7),
    delta=st.floats(1e-12, 0.999),
    a1=st.floats(0, 1),
    a2=st.floats(0, 1),
    m1=st.integers(0, 10**6),
    m2=st.integers(0, 10**6),
)
def test_q_bound_monotonicity_property(n, delta, a1, a2, m1, m2):
    a_lo, a_hi = sorted((a1, a2))
    m_lo, m_hi = sorted((m1, m2)) if max(m1, m2) < n else (0, min(n - 1, max(m1, m2) % n))
    q_low = q_value(n, a_lo, m_lo, delta)
    assert q_value(n, a_hi, m_lo, delta) >= q_low
    assert q_value(n, a_lo, m_hi, delta) >= q_low
    # and the bound never undercuts the inflated empirical term
    assert q_low >= n / (n - m_lo) * a_lo >= a_lo


def test_delta_schedule_examples():
    assert delta_schedule(1) == 0.5
    assert delta_schedule(10) == pytest.approx(0.01)
    assert delta_schedule(1000) == pytest.approx(1e-6)
    with pytest.raises(ValueError):
        delta_schedule(0)


def test_delta_schedule_is_summable_prefix():
    # partial sums grow slower than a convergent-series tail allows
    total = sum(delta_schedule(n) for n in range(1, 10_000))
    assert total < 2.2


def test_property3_gap_examples():
    assert property3_gap(10**6, 10) < property3_gap(10**3, 10)
    assert property3_gap(10**4, 50) >= 0.0
    assert property3_gap(10**6, 10) <= 0.1
    assert property3_gap(10**6, 10) == pytest.approx(GAP_ANCHOR_N1E6_M10, rel=1e-12)


def test_property3_gap_nonincreasing_in_n():
    for m in (1, 10, 100):
        gaps = [property3_gap(n, m) for n in (10**3, 10**4, 10**5, 10**6)]
        assert all(g2 <= g1 for g1, g2 in zip(gaps, gaps[1:])), (m, gaps)


def test_property3_gap_requires_room():
    with pytest.raises(ValueError):
        property3_gap(10, 5)


def test_q_bound_input_object_path():
    inp = BoundInput(n=500, alpha=0.25, m=20, delta=0.05)
    assert q_bound(inp) == q_value(500, 0.25, 20, 0.05)

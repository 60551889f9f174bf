import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tritail.bounds import (EnEventSpec, binomial_bound, binomial_rate, chatterjee_rate, check_event_En,
                            composite_bound, entropy_h, hub_count_tail_bound, wellner_bound)
from tritail.dist import PowerLawDist, WeightVector


def test_entropy_examples():
    assert entropy_h(1.0) == 0.0
    assert entropy_h(math.e) == pytest.approx(1.0, rel=1e-15)
    assert entropy_h(2.0) == pytest.approx(2 * math.log(2) - 1, rel=1e-15)


@given(st.floats(0.01, 50), st.floats(0.01, 50), st.floats(0, 1))
def test_entropy_convex(x, y, t):
    m = t * x + (1 - t) * y
    assert entropy_h(m) <= t * entropy_h(x) + (1 - t) * entropy_h(y) + 1e-12


def test_wellner_examples():
    assert wellner_bound(100, 0.3, 1.0) == 1.0
    assert wellner_bound(100, 0.1, math.e) == pytest.approx(math.exp(-10), rel=1e-12)
    with pytest.raises(ValueError):
        wellner_bound(100, 0.1, 0.5)


def test_binomial_rate_examples():
    assert binomial_rate(0.0) == 0.0
    assert binomial_rate(1.0) == pytest.approx(2 * math.log(2) - 1, rel=1e-15)
    assert binomial_rate(math.e - 1) == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(ValueError):
        binomial_rate(-1.0)


def test_chatterjee_examples():
    assert abs(chatterjee_rate(1e-8)) < 1e-7
    assert chatterjee_rate(1.0) == pytest.approx(2 * math.log(1.5) / 3, rel=1e-14)
    v = chatterjee_rate(np.linspace(0.1, 5, 50))
    assert np.all(np.diff(v) > 0)


@given(st.integers(1, 10**6), st.floats(1e-3, 1), st.floats(1, 20), st.floats(1, 20))
def test_wellner_in_unit_interval_and_monotone(n, y, l1, l2):
    lo, hi = sorted((l1, l2))
    b_lo, b_hi = wellner_bound(n, y, lo), wellner_bound(n, y, hi)
    assert 0 <= b_hi <= b_lo <= 1


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 10), st.floats(1e-3, 10))
def test_binomial_bound_monotone(mean, b1, b2):
    lo, hi = sorted((b1, b2))
    assert 0 <= binomial_bound(mean, hi) <= binomial_bound(mean, lo) <= 1


def test_hub_count_bound():
    assert hub_count_tail_bound(1, 0.5, 1.0, 1.0, 2.0, 1.2) == 1.0
    with pytest.raises(ValueError, match="γ > 1 - αβ"):
        hub_count_tail_bound(200, -0.2, 1.0, 1.0, 2.0, 1.2)
    with pytest.raises(ValueError):
        hub_count_tail_bound(200, -0.3, 1.0, 1.0, 2.0, 1.2)
    assert 0 < hub_count_tail_bound(200, -0.1, 1.0, 1.0, 2.0, 1.2) <= 1
    b = hub_count_tail_bound(200, 0.0, 1.0, 1.0, 2.0, 1.2)
    assert b == pytest.approx(math.exp(-2 * 0.2 * math.log(200)), rel=1e-12)
    assert hub_count_tail_bound(400, 0.0, 1.0, 1.0, 2.0, 1.2) < b


def test_En_spec_validation():
    with pytest.raises(ValueError):
        EnEventSpec(delta=0.5).window_exponent(1.5)  # 1/α + δ ≥ 1
    assert EnEventSpec().window_exponent(1.5) == pytest.approx(0.1 * (1 - 1 / 1.5))


def test_En_event_examples():
    d = PowerLawDist(1.5)
    assert check_event_En(WeightVector(np.array([1.0])), EnEventSpec(), d) in (True, False)
    spec = EnEventSpec(A=0.5, c=0.5)
    n = 500
    wv = d.sample(n, 3)
    w = wv.weights.copy()
    w[0] = 10 * spec.b_n(d, n)
    assert not check_event_En(WeightVector(w), spec, d)


def test_En_event_monotone_in_A_and_c():
    d = PowerLawDist(1.5)
    for r in range(200):
        wv = d.sample(100, 7, r)
        base = check_event_En(wv, EnEventSpec(A=0.2, c=2.0), d)
        if base:
            assert check_event_En(wv, EnEventSpec(A=0.6, c=2.0), d)
            assert check_event_En(wv, EnEventSpec(A=0.2, c=6.0), d)


def test_En_event_first_condition_uses_left_limits():
    d = PowerLawDist(1.5)
    # two coincident sample points just above x_min: F̄_n jumps from 1 to 0 there
    wv = WeightVector(np.array([1.01, 1.01]))
    spec = EnEventSpec(A=0.5, c=8.0)
    assert check_event_En(wv, spec, d)
    # piling mass far out breaks the envelope at the left limit of that point
    assert not check_event_En(WeightVector(np.full(50, 1.5)), EnEventSpec(A=0.2, c=100.0), d)


def test_composite_bound_in_unit_interval():
    d = PowerLawDist(1.5)
    for n in (50, 200, 1000, 10**4):
        assert 0 < composite_bound(d, n, EnEventSpec()) <= 1

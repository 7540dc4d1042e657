from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ksboundary.coefficients import (
    CoefficientError,
    GsSeries,
    QLaurent,
    QRational,
    exp_half_gs,
    parse_qlaurent,
    parse_series,
    render_qlaurent,
    render_series,
    series_exp,
    series_inv,
    series_log,
    series_mul,
    substitute_q_to_gs,
)

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=6)
laurents = st.dictionaries(st.integers(-6, 6), fractions, max_size=4).map(QLaurent)


def series(order=6):
    return st.lists(fractions, min_size=1, max_size=order + 1).map(lambda cs: GsSeries(cs, 0, order))


@given(laurents, laurents)
@settings(max_examples=60, deadline=None)
def test_substitution_is_a_ring_morphism(a, b):
    order = 8
    assert substitute_q_to_gs(a + b, order) == substitute_q_to_gs(a, order) + substitute_q_to_gs(b, order)
    assert substitute_q_to_gs(a * b, order) == substitute_q_to_gs(a, order) * substitute_q_to_gs(b, order)


def test_half_powers_cancel():
    one = substitute_q_to_gs(QLaurent.qpow(1) * QLaurent.qpow(-1), 10)
    assert one == GsSeries.one(10)
    # q^(1/2) = -exp(g_s/2)
    assert substitute_q_to_gs(QLaurent.qpow(1), 6) == -exp_half_gs(1, 6)


@given(series())
@settings(max_examples=40, deadline=None)
def test_exp_log_inverse(s):
    s0 = s - GsSeries.const(s[0], s.order)
    assert series_log(series_exp(s0)) == s0


@given(series())
@settings(max_examples=40, deadline=None)
def test_reciprocal(s):
    if s[0] == 0:
        return
    assert s * series_inv(s) == GsSeries.one(s.order)


def test_series_with_poles_keeps_honest_order():
    a = GsSeries.from_dict({-2: Fraction(1), 0: Fraction(3)}, 4)
    b = GsSeries.from_dict({0: Fraction(1), 1: Fraction(1)}, 4)
    p = series_mul(a, b)
    assert p.order == 2
    assert p[-2] == 1 and p[-1] == 1 and p[0] == 3


def test_mismatched_orders_rejected_by_ring_product():
    with pytest.raises(CoefficientError):
        GsSeries.one(3) * GsSeries.one(4)


@given(laurents)
@settings(max_examples=60, deadline=None)
def test_qlaurent_text_round_trip(a):
    assert parse_qlaurent(render_qlaurent(a)) == a


@given(series())
@settings(max_examples=60, deadline=None)
def test_series_text_round_trip(s):
    text = render_series(s)
    assert "O(g_s^" in text
    assert parse_series(text) == s


def test_qrational_reduces_to_lowest_terms():
    one_minus_q = QLaurent({0: 1, 2: -1})
    r = QRational(one_minus_q * one_minus_q, one_minus_q * QLaurent({0: 1, 2: 1}))
    assert r == QRational(one_minus_q, QLaurent({0: 1, 2: 1}))
    assert QRational(one_minus_q, one_minus_q).as_laurent() == QLaurent.const(1)


def test_qrational_series_expansion_with_pole():
    # 1 / (1 - q) has a simple pole at g_s = 0
    r = QRational(QLaurent.const(1), QLaurent({0: 1, 2: -1}))
    s = r.to_series(4)
    assert s.min_exp == -1 and s[-1] == -1
    back = s * substitute_q_to_gs(QLaurent({0: 1, 2: -1}), 6).truncate(s.order)
    assert back.truncate(s.order - 1) == GsSeries.one(s.order - 1)

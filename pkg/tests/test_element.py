import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import elem_matches_fraction
from dvrlu import (
    AmbiguousValuation,
    Backend,
    DivisionByUnknownZero,
    DvrConfig,
    PrecElem,
    valuation_less,
)

CFG = DvrConfig(p=5, prec=10)
CFG2 = DvrConfig(p=2, prec=16)
SER = DvrConfig(p=5, prec=10, backend=Backend.SERIES)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def test_from_int_zero_is_bigoh():
    z = PrecElem.from_int(CFG, 0)
    assert z.is_zeroish and z.val_lower_bound == 10
    assert PrecElem.from_int(CFG, 0, abs_prec=3).val_lower_bound == 3


def test_from_int_representative_roundtrip():
    e = PrecElem.from_int(CFG, 350, abs_prec=10)
    assert e.valuation == 2
    assert e.representative() == 350
    assert e.abs_prec == 10 and e.rel_prec == 8


def test_from_int_negative_reduces():
    e = PrecElem.from_int(CFG, -4, abs_prec=10)
    assert e.representative() == 5**10 - 4


def test_from_int_abs_below_valuation_collapses():
    e = PrecElem.from_int(CFG, 125, abs_prec=2)
    assert e.is_zeroish and e.val_lower_bound == 2


def test_unit_form_rejects_non_units():
    with pytest.raises(ValueError):
        PrecElem.unit_form(CFG, 0, 10, 5)
    with pytest.raises(ValueError):
        PrecElem.unit_form(CFG, 0, 1, 0)


def test_series_backend_rejects_negative():
    with pytest.raises(ValueError):
        PrecElem.from_int(SER, -3)


def test_random_is_flat():
    rng = random.Random(0)
    for _ in range(50):
        e = PrecElem.random(CFG, rng)
        assert e.abs_prec == 10 or (e.is_zeroish and e.val_lower_bound == 10)


# ---------------------------------------------------------------------------
# precision surgery
# ---------------------------------------------------------------------------


def test_lift_bigoh_both_directions():
    z = PrecElem.bigoh(CFG, 5)
    assert z.lift_to_precision(8).val_lower_bound == 8
    assert z.lift_to_precision(2).val_lower_bound == 2


def test_lift_unit_zero_pads():
    e = PrecElem.from_int(CFG, 7, abs_prec=4)
    up = e.lift_to_precision(9)
    assert up.abs_prec == 9 and up.representative() == 7


def test_lift_unit_truncates_digits():
    e = PrecElem.from_int(CFG, 7 + 5**3, abs_prec=8)
    down = e.lift_to_precision(2)
    assert down.representative() == 7 and down.abs_prec == 2


def test_lift_unit_below_valuation_gives_bigoh():
    e = PrecElem.from_int(CFG, 125, abs_prec=8)  # valuation 3
    assert e.lift_to_precision(3).is_zeroish
    assert e.lift_to_precision(2).val_lower_bound == 2


def test_cap_abs_never_raises_precision():
    e = PrecElem.from_int(CFG, 7, abs_prec=4)
    assert e.cap_abs(9) == e
    assert e.cap_abs(2).abs_prec == 2


# ---------------------------------------------------------------------------
# arithmetic against exact rationals
# ---------------------------------------------------------------------------

ints = st.integers(min_value=0, max_value=5**10 - 1)


@given(ints, ints)
def test_add_matches_exact(a, b):
    ea = PrecElem.from_int(CFG, a, abs_prec=10)
    eb = PrecElem.from_int(CFG, b, abs_prec=10)
    assert elem_matches_fraction(ea + eb, Fraction(a + b))


@given(ints, ints)
def test_mul_matches_exact(a, b):
    ea = PrecElem.from_int(CFG, a, abs_prec=10)
    eb = PrecElem.from_int(CFG, b, abs_prec=10)
    assert elem_matches_fraction(ea * eb, Fraction(a * b))


@given(ints, ints.filter(lambda b: b % 5 != 0))
def test_div_matches_exact(a, b):
    ea = PrecElem.from_int(CFG, a, abs_prec=10)
    eb = PrecElem.from_int(CFG, b, abs_prec=10)
    assert elem_matches_fraction(ea / eb, Fraction(a, b))


@given(ints, ints)
def test_sub_of_self_cancels(a, b):
    ea = PrecElem.from_int(CFG, a, abs_prec=10)
    eb = PrecElem.from_int(CFG, b, abs_prec=10)
    s = (ea + eb) - eb
    assert elem_matches_fraction(s, Fraction(a))
    z = ea - ea
    assert z.is_zeroish


# ---------------------------------------------------------------------------
# the ultrametric precision rules
# ---------------------------------------------------------------------------


def test_add_takes_min_absolute_precision():
    a = PrecElem.from_int(CFG, 3, abs_prec=7)
    b = PrecElem.from_int(CFG, 4, abs_prec=4)
    assert (a + b).abs_prec == 4


def test_mul_adds_valuations_min_relative():
    a = PrecElem.unit_form(CFG, 2, 3, 5)  # 3*5^2, rel 5
    b = PrecElem.unit_form(CFG, 1, 2, 3)  # 2*5^1, rel 3
    c = a * b
    assert c.valuation == 3 and c.rel_prec == 3


def test_div_subtracts_valuations():
    a = PrecElem.unit_form(CFG, 2, 3, 5)
    b = PrecElem.unit_form(CFG, 1, 2, 3)
    c = a / b
    assert c.valuation == 1 and c.rel_prec == 3


def test_bigoh_absorption_in_mul():
    z = PrecElem.bigoh(CFG, 6)
    u = PrecElem.unit_form(CFG, 2, 3, 4)
    assert (z * u).val_lower_bound == 8
    zz = z * PrecElem.bigoh(CFG, 3)
    assert zz.is_zeroish and zz.val_lower_bound == 9


def test_bigoh_division_rules():
    z = PrecElem.bigoh(CFG, 6)
    u = PrecElem.unit_form(CFG, 2, 3, 4)
    assert (z / u).val_lower_bound == 4
    with pytest.raises(DivisionByUnknownZero):
        u / z
    with pytest.raises(DivisionByUnknownZero):
        z / z


def test_valuation_of_bigoh_raises():
    with pytest.raises(AmbiguousValuation):
        PrecElem.bigoh(CFG, 5).valuation


def test_exact_cancellation_reports_bound():
    a = PrecElem.from_int(CFG, 7, abs_prec=6)
    b = PrecElem.from_int(CFG, 7, abs_prec=9)
    z = a - b
    assert z.is_zeroish and z.val_lower_bound == 6


# ---------------------------------------------------------------------------
# the forced-comparison rules
# ---------------------------------------------------------------------------


def unit(v, rel=4):
    return PrecElem.unit_form(CFG, v, 1, rel)


def test_compare_units():
    assert valuation_less(unit(1), unit(2))
    assert not valuation_less(unit(2), unit(2))
    assert not valuation_less(unit(3), unit(2))


def test_compare_unit_entry_vs_bigoh_pivot():
    # entry with valuation strictly below the pivot's bound: forced swap
    assert valuation_less(unit(1), PrecElem.bigoh(CFG, 3))
    # entry could be equal or bigger: unforced
    with pytest.raises(AmbiguousValuation):
        valuation_less(unit(3), PrecElem.bigoh(CFG, 3))


def test_compare_bigoh_entry_vs_unit_pivot():
    # entry hidden below the pivot: could go either way
    with pytest.raises(AmbiguousValuation):
        valuation_less(PrecElem.bigoh(CFG, 2), unit(3))
    # entry bound at least the pivot valuation: forced no-swap
    assert not valuation_less(PrecElem.bigoh(CFG, 3), unit(3))
    assert not valuation_less(PrecElem.bigoh(CFG, 5), unit(3))


def test_compare_bigoh_vs_bigoh_unforced():
    with pytest.raises(AmbiguousValuation):
        valuation_less(PrecElem.bigoh(CFG, 2), PrecElem.bigoh(CFG, 5))


# ---------------------------------------------------------------------------
# the series backend is carry-free
# ---------------------------------------------------------------------------


def test_series_addition_no_carry():
    a = PrecElem.from_int(SER, 3, abs_prec=10)
    b = PrecElem.from_int(SER, 4, abs_prec=10)
    # 3 + 4 = 2 in F_5, and nothing carries into the t digit
    assert (a + b).representative() == 2


def test_series_char_two_self_cancel():
    ser2 = DvrConfig(p=2, prec=8, backend=Backend.SERIES)
    e = PrecElem.from_int(ser2, 1, abs_prec=8)
    assert (e + e).is_zeroish


def test_series_multiplication_is_convolution():
    # (1 + t) * (1 + t) = 1 + 2t + t^2 over F_5
    a = PrecElem.from_int(SER, 6, abs_prec=6)  # digits 1,1
    sq = a * a
    assert sq.representative() == 1 + 2 * 5 + 25


def test_series_division_roundtrip():
    a = PrecElem.from_int(SER, 1 + 2 * 5 + 3 * 25, abs_prec=6)
    b = PrecElem.from_int(SER, 4 + 5, abs_prec=6)
    assert ((a / b) * b - a).is_zeroish


# ---------------------------------------------------------------------------
# equality, hashing, serialization, printing
# ---------------------------------------------------------------------------


def test_eq_is_structural():
    a = PrecElem.from_int(CFG, 7, abs_prec=5)
    b = PrecElem.from_int(CFG, 7, abs_prec=5)
    c = PrecElem.from_int(CFG, 7, abs_prec=6)
    assert a == b and hash(a) == hash(b)
    assert a != c
    assert PrecElem.bigoh(CFG, 5) == PrecElem.bigoh(CFG, 5)


@given(st.integers(min_value=0, max_value=5**10 - 1))
def test_json_roundtrip(x):
    e = PrecElem.from_int(CFG, x, abs_prec=10)
    assert PrecElem.from_json(CFG, e.to_json()) == e


def test_json_roundtrip_bigoh_and_series():
    z = PrecElem.bigoh(CFG, 4)
    assert PrecElem.from_json(CFG, z.to_json()) == z
    s = PrecElem.from_int(SER, 26, abs_prec=7)
    assert PrecElem.from_json(SER, s.to_json()) == s


def test_repr_mentions_precision():
    assert "O(5^10)" in repr(PrecElem.from_int(CFG, 3, abs_prec=10))
    assert "t" in repr(PrecElem.from_int(SER, 5, abs_prec=4))


def test_negative_valuation_has_no_representative():
    q = unit(1) / unit(2)
    assert q.valuation == -1
    with pytest.raises(ValueError):
        q.representative()

import pytest
from hypothesis import given, settings, strategies as st
from sympy import primefactors

from heegner.errors import InputError
from heegner.quadarith import (
    INFINITY,
    LocalQuadExt,
    QuadOrder,
    SplittingType,
    class_number,
    eichler_symbol,
    form_class_number,
    hilbert_symbol,
    is_fundamental,
    kronecker_symbol,
    local_classes,
    local_quad_class,
    reduced_forms,
    splitting_at,
    valuation,
)

FUNDAMENTAL = [-3, -4, -7, -8, -11, -15, -19, -20, -23, -24, -31, -35, -39, -40, -43, -47, -51, -52, -55, -56]


@pytest.mark.parametrize("d,h", [(-3, 1), (-4, 1), (-7, 1), (-15, 2), (-20, 2), (-23, 3), (-47, 5)])
def test_class_number_maximal(d, h):
    assert class_number(QuadOrder(d)) == h


def test_class_number_with_conductor():
    assert class_number(QuadOrder(-4, 5)) == 2
    assert class_number(QuadOrder(-3, 2)) == 1
    assert class_number(QuadOrder(-4, 3)) == 2


def test_non_primitive_forms_are_excluded():
    assert reduced_forms(-100) == [(1, 0, 25), (2, 2, 13)]
    assert form_class_number(-100) == 2


def test_reduced_forms_disc_minus_23():
    assert reduced_forms(-23) == [(1, 1, 6), (2, -1, 3), (2, 1, 3)]


@settings(max_examples=150, deadline=None)
@given(d=st.sampled_from(FUNDAMENTAL), c=st.integers(min_value=1, max_value=30))
def test_conductor_formula_matches_form_count(d, c):
    if c * c * -d > 50_000:
        c = 1
    assert class_number(QuadOrder(d, c)) == form_class_number(c * c * d)


@pytest.mark.parametrize("d,expected", [(-3, True), (-4, True), (-8, True), (-15, True),
                                        (-12, False), (-16, False), (-5, False), (1, False)])
def test_is_fundamental(d, expected):
    assert is_fundamental(d) is expected


def test_quad_order_rejects_non_fundamental():
    with pytest.raises(InputError):
        QuadOrder(-12)
    with pytest.raises(InputError):
        QuadOrder(-4, 0)


def test_generator_trace_and_norm():
    assert QuadOrder(-4).generator == (-4, 5)
    assert QuadOrder(-3).generator == (-3, 3)


def test_valuation():
    assert valuation(48, 2) == 4
    assert valuation(-27, 3) == 3
    with pytest.raises(InputError):
        valuation(0, 5)


def test_splitting():
    K = QuadOrder(-4)
    assert splitting_at(K, 2) is SplittingType.RAMIFIED
    assert splitting_at(K, 3) is SplittingType.INERT
    assert splitting_at(K, 5) is SplittingType.SPLIT
    assert splitting_at(QuadOrder(-7), 2) is SplittingType.SPLIT
    assert splitting_at(QuadOrder(-3), 2) is SplittingType.INERT


def test_kronecker_symbol():
    assert kronecker_symbol(-4, 3) == -1
    assert kronecker_symbol(-4, 5) == 1
    assert kronecker_symbol(5, 2) == -1
    assert kronecker_symbol(-7, 2) == 1
    assert kronecker_symbol(6, 3) == 0


@given(st.integers(min_value=-500, max_value=500), st.sampled_from([3, 5, 7, 11, 13, 101]))
def test_kronecker_symbol_at_odd_primes_is_euler_criterion(a, p):
    expected = pow(a % p, (p - 1) // 2, p)
    assert kronecker_symbol(a, p) == (expected - p if expected > 1 else expected)
    assert kronecker_symbol(a, p * p) == (1 if a % p else 0)


def test_eichler_symbol():
    assert eichler_symbol(0, SplittingType.INERT) == -1
    assert eichler_symbol(0, SplittingType.RAMIFIED) == 0
    assert eichler_symbol(2, SplittingType.INERT) == 1
    with pytest.raises(InputError):
        eichler_symbol(0, SplittingType.SPLIT)


@pytest.mark.parametrize("a,b,p,expected", [
    (-1, -3, 3, -1),
    (-1, -1, 2, -1),
    (-1, -1, INFINITY, -1),
    (-1, -4, 3, 1),
    (-1, -20, 5, 1),
    (2, 3, 3, -1),
    (5, 5, 5, 1),
])
def test_hilbert_symbol_values(a, b, p, expected):
    assert hilbert_symbol(a, b, p) == expected


nonzero = st.integers(min_value=-500, max_value=500).filter(lambda x: x != 0)


@settings(max_examples=300)
@given(a=nonzero, b=nonzero)
def test_hilbert_product_formula(a, b):
    places = set(primefactors(2 * a * b))
    total = hilbert_symbol(a, b, INFINITY)
    for p in places:
        total *= hilbert_symbol(a, b, p)
    assert total == 1


@settings(max_examples=300)
@given(a=nonzero, a2=nonzero, b=nonzero, p=st.sampled_from([2, 3, 5, 7, 11]))
def test_hilbert_bimultiplicative_and_symmetric(a, a2, b, p):
    assert hilbert_symbol(a * a2, b, p) == hilbert_symbol(a, b, p) * hilbert_symbol(a2, b, p)
    assert hilbert_symbol(a, b, p) == hilbert_symbol(b, a, p)


def test_hilbert_accepts_rationals():
    from fractions import Fraction
    assert hilbert_symbol(Fraction(-1, 3), -1, 3) == hilbert_symbol(-3, -1, 3)


def test_local_quad_class():
    assert local_quad_class(QuadOrder(-4), 2) is LocalQuadExt.SQRT7
    assert local_quad_class(QuadOrder(-3), 3) is LocalQuadExt.RAMIFIED_UNIT
    assert local_quad_class(QuadOrder(-3), 2) is LocalQuadExt.UNRAMIFIED
    assert local_quad_class(QuadOrder(-8), 2) is LocalQuadExt.SQRT14
    assert local_quad_class(QuadOrder(-4), 3) is LocalQuadExt.UNRAMIFIED
    assert local_quad_class(QuadOrder(-4), 5) is SplittingType.SPLIT


def test_local_classes_and_representatives():
    assert len(local_classes(2)) == 7
    assert len(local_classes(3)) == 3
    assert LocalQuadExt.RAMIFIED_UNIT.representative(3) == 6
    assert LocalQuadExt.RAMIFIED_UNIT.representative(5) == 10
    assert LocalQuadExt.SQRT7.disc_valuation(2) == 2
    assert LocalQuadExt.SQRT10.disc_valuation(2) == 3
    with pytest.raises(InputError):
        LocalQuadExt.SQRT3.representative(3)
    with pytest.raises(InputError):
        local_classes(9)

"""Coefficient arithmetic: ring axioms, canonical forms, morphisms."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ainfinity.exceptions import CoefficientError
from ainfinity.rings import (RATIONALS, RingDescriptor, Scalar, eval_at,
                             embed_fraction, evaluation_map, fraction_field,
                             from_coeffs, from_int, mod_p_map, one, poly_ring,
                             prime_field, scalar_from_str, scalar_str,
                             truncated_poly_ring, truncation_map, variable,
                             zero)
from ainfinity.randomized import random_scalar
from conftest import ALL_RINGS

F5 = prime_field(5)
QH = poly_ring("h", RATIONALS)
F5H = poly_ring("h", F5)
QH4 = truncated_poly_ring("h", 4, RATIONALS)
QHFRAC = fraction_field(QH)


@pytest.mark.parametrize("ring", ALL_RINGS, ids=str)
def test_ring_axioms_on_random_triples(ring, rng):
    # slightly over a thousand triples across the parametrized rings
    for _ in range(1100):
        a = random_scalar(ring, rng, 4)
        b = random_scalar(ring, rng, 4)
        c = random_scalar(ring, rng, 4)
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * b == b * a
        assert a + b == b + a
        assert a * (b + c) == a * b + a * c
        assert a + zero(ring) == a
        assert a * one(ring) == a
        assert a + (-a) == zero(ring)


@pytest.mark.parametrize("ring", ALL_RINGS, ids=str)
def test_field_inverses(ring, rng):
    if not ring.is_field:
        return
    for _ in range(100):
        a = random_scalar(ring, rng, 4)
        if a.is_zero():
            continue
        assert a * a.inverse() == one(ring)


@given(st.fractions(), st.fractions(), st.fractions())
@settings(max_examples=200, deadline=None)
def test_rational_scalar_laws(x, y, z):
    a, b, c = (Scalar(RATIONALS, v) for v in (x, y, z))
    assert (a + b) * c == a * c + b * c
    assert a - a == zero(RATIONALS)


def test_canonicalization_idempotent(rng):
    for ring in ALL_RINGS:
        for _ in range(50):
            s = random_scalar(ring, rng)
            again = Scalar(ring, s.value)
            assert again == s and again.value == s.value


def test_canonical_forms():
    # trailing zeros stripped
    assert from_coeffs(QH, (1, 0, 0)).value == (Fraction(1),)
    assert from_coeffs(QH, ()).is_zero()
    # residues reduced
    assert Scalar(F5, 12).value == 2
    # fractions gcd-reduced with monic denominator
    h = variable(QH)
    num = embed_fraction(h * h - from_int(QH, 1))
    den = embed_fraction(h - from_int(QH, 1))
    q = num / den
    assert q == embed_fraction(h + from_int(QH, 1))


def test_eval_at_examples():
    h = variable(QH)
    s = h * h + from_int(QH, 1)
    assert eval_at(s, zero(RATIONALS)) == from_int(RATIONALS, 1)
    assert eval_at(s, one(RATIONALS)) == from_int(RATIONALS, 2)
    # direct modular arithmetic oracle: 3*4 - 2 = 10 = 0 mod 5
    t = from_coeffs(F5H, (-2, 3))
    assert eval_at(t, from_int(F5, 4)) == zero(F5)


def test_eval_at_is_ring_homomorphism(rng):
    for _ in range(200):
        a = random_scalar(QH, rng)
        b = random_scalar(QH, rng)
        pt = random_scalar(RATIONALS, rng)
        assert eval_at(a + b, pt) == eval_at(a, pt) + eval_at(b, pt)
        assert eval_at(a * b, pt) == eval_at(a, pt) * eval_at(b, pt)
    assert eval_at(one(QH), from_int(RATIONALS, 7)) == one(RATIONALS)


def test_eval_at_ring_mismatch():
    with pytest.raises(CoefficientError):
        eval_at(variable(QH), from_int(F5, 1))
    with pytest.raises(CoefficientError):
        from_int(QH, 1) + from_int(RATIONALS, 1)


def test_embed_fraction_examples():
    h = variable(QH)
    assert embed_fraction(h).value == ((Fraction(0), Fraction(1)), (Fraction(1),))
    assert embed_fraction(zero(QH)) == zero(QHFRAC)
    # injective on canonical forms
    assert embed_fraction(h) != embed_fraction(h + from_int(QH, 1))


def test_base_change_examples(rng):
    # truncation: h^3 mod h^2 = 0
    tm = truncation_map(QH, 2)
    h = variable(QH)
    assert tm(h ** 3).is_zero()
    assert tm(h + from_int(QH, 3)) == from_coeffs(truncated_poly_ring("h", 2, RATIONALS), (3, 1))
    # modular inverse oracle: 1/2 mod 5 = 3
    mp = mod_p_map(5)
    assert mp(Scalar(RATIONALS, Fraction(1, 2))) == from_int(F5, 3)
    with pytest.raises(CoefficientError):
        mp(Scalar(RATIONALS, Fraction(1, 5)))
    # homomorphism property on random pairs
    for _ in range(200):
        a = random_scalar(RATIONALS, rng)
        b = random_scalar(RATIONALS, rng)
        if a.value.denominator % 5 == 0 or b.value.denominator % 5 == 0 \
                or (a + b).value.denominator % 5 == 0:
            continue
        assert mp(a + b) == mp(a) + mp(b)
        assert mp(a * b) == mp(a) * mp(b)
    assert mp(one(RATIONALS)) == one(F5)


def test_identity_map():
    from ainfinity.rings import identity_map
    h = variable(QH)
    assert identity_map(QH)(h) == h


def test_truncated_units(rng):
    for _ in range(60):
        s = random_scalar(QH4, rng)
        if s.value and s.value[0] != 0:
            assert s * s.inverse() == one(QH4)
    with pytest.raises(CoefficientError):
        variable(QH4).inverse()


def test_scalar_strings_round_trip(rng):
    for ring in ALL_RINGS:
        for _ in range(40):
            s = random_scalar(ring, rng)
            assert scalar_from_str(ring, scalar_str(s)) == s


def test_ring_descriptor_validation():
    with pytest.raises(CoefficientError):
        prime_field(6)
    with pytest.raises(CoefficientError):
        RingDescriptor("poly", var="h", base=poly_ring("t", RATIONALS))
    assert QH.characteristic() == 0
    assert F5H.characteristic() == 5

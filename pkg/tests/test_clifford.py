"""Algebra-level tests: product signs, conjugation, grades, parity splits.

Everything here is exact integer arithmetic; assertions use equality or a
zero tolerance unless stated otherwise.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vekua_lab import clifford as cl
from vekua_lab.clifford import Multivector, conjugate, geometric_product, grade_project, parity_split

from conftest import random_integer_mv


def mv(coeffs, n=3):
    return Multivector(n, coeffs)


def e(i, n=3):
    return Multivector.basis_vector(i, n)


def integer_mv(n):
    dim = 1 << n
    return st.lists(
        st.integers(min_value=-5, max_value=5), min_size=dim, max_size=dim
    ).map(lambda c: Multivector(n, np.array(c, dtype=float)))


# -- generator relations ---------------------------------------------------------


@pytest.mark.parametrize("n", [3, 4, 5, 8])
def test_generators_square_to_minus_one(n):
    for i in range(1, n + 1):
        sq = e(i, n) * e(i, n)
        assert sq.coeffs[0] == -1.0
        assert np.count_nonzero(sq.coeffs) == 1


@pytest.mark.parametrize("n", [3, 4, 6])
def test_anticommutation(n):
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            anti = e(i, n) * e(j, n) + e(j, n) * e(i, n)
            if i == j:
                assert anti.coeffs[0] == -2.0
                assert np.count_nonzero(anti.coeffs) == 1
            else:
                assert not np.any(anti.coeffs)


def test_spec_product_examples():
    e1, e2 = e(1), e(2)
    assert (e1 * e2).coeffs[0b011] == 1.0
    assert (e2 * e1).coeffs[0b011] == -1.0
    prod = (e1 + e2) * (e1 - e2)
    expected = np.zeros(8)
    expected[0b011] = -2.0
    assert np.array_equal(prod.coeffs, expected)


@pytest.mark.parametrize("n", [3, 4])
def test_associativity_exhaustive_blades(n):
    dim = 1 << n
    blades = [Multivector.blade(m, 1.0, n) for m in range(dim)]
    for a in blades:
        for b in blades:
            ab = a * b
            for c in blades:
                assert (ab * c).isclose(a * (b * c), 0.0)


@pytest.mark.parametrize("n", [3, 4])
def test_sign_table_matches_reference(n):
    tab = cl.tables(n)
    for a in range(tab.dim):
        for b in range(tab.dim):
            assert tab.sign[a, b] == cl._blade_sign_reference(a, b)


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        geometric_product(e(1, 3), e(1, 4))


def test_dimension_bounds():
    with pytest.raises(ValueError):
        cl.tables(2)
    with pytest.raises(ValueError):
        cl.tables(9)


# -- conjugation -----------------------------------------------------------------


def test_conjugate_grade_signs():
    a = mv([1, 1, 0, 1, 0, 0, 0, 1])  # 1 + e1 + e12 + e123
    c = conjugate(a)
    assert np.array_equal(c.coeffs, np.array([1, -1, 0, -1, 0, 0, 0, 1.0]))


@pytest.mark.parametrize("n", [3, 4, 8])
def test_conjugate_sign_pattern_by_grade(n):
    tab = cl.tables(n)
    for mask in range(tab.dim):
        k = tab.grades[mask]
        expected = 1.0 if k % 4 in (0, 3) else -1.0
        assert tab.conj_signs[mask] == expected


@settings(max_examples=60, deadline=None)
@given(integer_mv(3))
def test_conjugate_involution(a):
    assert conjugate(conjugate(a)).isclose(a, 0.0)


@settings(max_examples=60, deadline=None)
@given(integer_mv(3), integer_mv(3))
def test_conjugate_antiautomorphism(a, b):
    assert conjugate(a * b).isclose(conjugate(b) * conjugate(a), 0.0)


@settings(max_examples=60, deadline=None)
@given(integer_mv(4), integer_mv(4))
def test_scalar_trace_symmetry(a, b):
    assert (a * b).sc() == (b * a).sc()


@settings(max_examples=40, deadline=None)
@given(integer_mv(4), integer_mv(4), integer_mv(4))
def test_associativity_random(a, b, c):
    assert ((a * b) * c).isclose(a * (b * c), 0.0)


def test_conjugate_of_product_example():
    # conj(e1 e2) = conj(e2) conj(e1) = (-e2)(-e1) = -e12
    lhs = conjugate(e(1) * e(2))
    assert lhs.coeffs[0b011] == -1.0


# -- grades and parity ------------------------------------------------------------


def test_grade_projection_slots():
    a = mv([1, 2, 0, 3, 0, 0, 0, 0])  # 1 + 2 e1 + 3 e12
    g1 = grade_project(a, 1)
    assert g1.coeffs[1] == 2.0
    assert np.count_nonzero(g1.coeffs) == 1


@settings(max_examples=40, deadline=None)
@given(integer_mv(4))
def test_grade_partition(a):
    total = Multivector(4)
    for k in range(5):
        total = total + grade_project(a, k)
    assert total.isclose(a, 0.0)


def test_grade_out_of_range():
    with pytest.raises(ValueError):
        grade_project(e(1), 4)


def test_npa_example():
    a = mv([1, 1, 0, 1, 0, 0, 0, 1])
    npa = a.npa()
    assert np.array_equal(npa.coeffs, np.array([0, 0, 0, 1, 0, 0, 0, 1.0]))


def test_parity_split_example():
    a = mv([1, 1, 0, 1, 0, 0, 0, 1])
    p03, p12 = parity_split(a)
    assert np.array_equal(p03.coeffs, np.array([1, 0, 0, 0, 0, 0, 0, 1.0]))
    assert np.array_equal(p12.coeffs, np.array([0, 1, 0, 1, 0, 0, 0, 0.0]))


def test_parity_split_zero():
    p03, p12 = parity_split(Multivector(3))
    assert not np.any(p03.coeffs) and not np.any(p12.coeffs)


@settings(max_examples=60, deadline=None)
@given(integer_mv(3))
def test_parity_split_against_conjugate(a):
    p03, p12 = parity_split(a)
    assert (p03 + p12).isclose(a, 0.0)
    assert (p03 - p12).isclose(conjugate(a), 0.0)


# -- array-level algebra -----------------------------------------------------------


def test_gp_array_matches_objects(rng):
    for _ in range(20):
        a = random_integer_mv(rng)
        b = random_integer_mv(rng)
        arr = cl.gp_array(a.coeffs[None, :], b.coeffs[None, :], 3)[0]
        assert np.array_equal(arr, (a * b).coeffs)


def test_basis_mul_matches_objects(rng):
    for mask in range(1, 8):
        a = random_integer_mv(rng)
        left = cl.basis_mul_left(mask, a.coeffs[None, :], 3)[0]
        right = cl.basis_mul_right(a.coeffs[None, :], mask, 3)[0]
        blade = Multivector.blade(mask, 1.0, 3)
        assert np.array_equal(left, (blade * a).coeffs)
        assert np.array_equal(right, (a * blade).coeffs)


def test_vector_mul_left(rng):
    comps = rng.integers(-3, 4, (5, 3)).astype(float)
    a = random_integer_mv(rng)
    out = cl.vector_mul_left(comps, a.coeffs[None, :], 3)
    for k in range(5):
        expected = Multivector.from_vector(comps[k]) * a
        assert np.array_equal(out[k], expected.coeffs)


def test_vector_to_array_layout():
    arr = cl.vector_to_array(np.array([[1.0, 2.0, 3.0]]), 3)[0]
    assert arr[0b001] == 1.0 and arr[0b010] == 2.0 and arr[0b100] == 3.0
    assert arr[0] == 0.0 and arr[0b011] == 0.0

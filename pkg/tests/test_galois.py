import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from design_gradcode import field_new, projective_normalize
from design_gradcode.errors import DivideByZero, NotPrimePower, ZeroVector
from design_gradcode.galois import factor_prime_power, smallest_irreducible

from oracles import gf_ops, sympy_irreducible

PRIME_POWERS_64 = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27, 29, 31, 32, 37, 41,
                   43, 47, 49, 53, 59, 61, 64]


def test_prime_field_modulus():
    f = field_new(2)
    assert (f.p, f.k) == (2, 1)
    assert f.modulus == (0, 1)  # x


def test_gf4_modulus_is_x2_x_1():
    assert field_new(4).modulus == (1, 1, 1)


@pytest.mark.parametrize("q", [6, 1, 0, 12, 100])
def test_not_prime_power(q):
    with pytest.raises(NotPrimePower):
        field_new(q)


def test_order_cap():
    with pytest.raises(NotPrimePower):
        field_new(2**17)
    assert field_new(2**16).q == 2**16


def test_small_examples():
    assert field_new(2).arith("add", 1, 1) == 0
    assert field_new(3).arith("mul", 2, 2) == 1
    f4 = field_new(4)
    x = f4.element([0, 1])
    assert f4.coeffs(f4.arith("mul", x, x)) == (1, 1)


def test_inverse_of_zero():
    for q in (5, 8):
        with pytest.raises(DivideByZero):
            field_new(q).arith("inv", 0)


def test_bad_operation():
    f = field_new(3)
    with pytest.raises(ValueError):
        f.arith("div", 1, 2)
    with pytest.raises(ValueError):
        f.arith("add", 1)
    with pytest.raises(ValueError):
        f.add(3, 0)


@pytest.mark.parametrize("q", [8, 9, 16, 25, 27])
def test_modulus_smallest_and_irreducible(q):
    p, k = factor_prime_power(q)
    mod = smallest_irreducible(p, k)
    assert sympy_irreducible(mod, p)
    # no smaller monic polynomial of degree k is irreducible
    from itertools import product

    # candidates in order of (c_{k-1}, ..., c_0)
    for big_endian in product(range(p), repeat=k):
        if big_endian >= tuple(reversed(mod[:k])):
            break
        assert not sympy_irreducible(tuple(reversed(big_endian)) + (1,), p)


def test_known_moduli():
    assert field_new(8).modulus == (1, 1, 0, 1)  # x^3 + x + 1
    assert field_new(9).modulus == (1, 0, 1)  # x^2 + 1


@pytest.mark.parametrize("q", PRIME_POWERS_64)
def test_field_axioms_exhaustive(q):
    f = field_new(q)
    A, M = f.add_table, f.mul_table
    e = np.arange(q)
    assert np.array_equal(A, A.T) and np.array_equal(M, M.T)
    assert np.array_equal(A[0], e) and np.array_equal(M[1], e)
    assert np.all(M[0] == 0)
    # associativity and distributivity over all triples
    assert np.array_equal(A[A[:, :, None], e[None, None, :]], A[e[:, None, None], A[None, :, :]])
    assert np.array_equal(M[M[:, :, None], e[None, None, :]], M[e[:, None, None], M[None, :, :]])
    lhs = M[e[:, None, None], A[None, :, :]]
    rhs = A[M[:, :, None], M[:, None, :]]
    assert np.array_equal(lhs, rhs)
    assert np.all(A[e, f.neg_table] == 0)
    assert np.all(M[e[1:], f.inv_table[1:]] == 1)


@pytest.mark.parametrize("q", [4, 8, 9, 16, 25, 27, 32, 49, 64])
def test_tables_match_sympy(q):
    f = field_new(q)
    add, mul = gf_ops(f.p, f.k, f.modulus)
    rng = np.random.default_rng(q)
    for a, b in rng.integers(0, q, size=(200, 2)):
        a, b = int(a), int(b)
        assert f.mul_table[a, b] == mul(a, b) == f.mul(a, b)
        assert f.add_table[a, b] == add(a, b) == f.add(a, b)


def test_large_field_scalar_path():
    f = field_new(2**11)
    for a in (1, 2, 777, 2047):
        assert f.mul(a, f.inv(a)) == 1


def test_normalize_examples():
    assert projective_normalize(field_new(3), (2, 1, 0)) == (1, 2, 0)
    assert projective_normalize(field_new(2), (0, 1, 1)) == (0, 1, 1)
    with pytest.raises(ZeroVector):
        projective_normalize(field_new(5), (0, 0, 0))


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([3, 4, 5, 7, 8, 9]), st.data())
def test_normalize_orbit_invariant(q, data):
    f = field_new(q)
    vec = data.draw(st.lists(st.integers(0, q - 1), min_size=1, max_size=4).filter(any))
    c = data.draw(st.integers(1, q - 1))
    n = projective_normalize(f, vec)
    assert projective_normalize(f, n) == n
    assert projective_normalize(f, [f.mul(c, a) for a in vec]) == n
    assert next(a for a in n if a) == 1

import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from lowtw.algebra import (DEFAULT_PRIME, QQ, PrimeField, SparseMatrix, field_for, is_prime,
                           sample_prime)


def test_is_prime_small_values():
    primes = [p for p in range(200) if is_prime(p)]
    sieve = [p for p in range(2, 200) if all(p % d for d in range(2, int(p ** 0.5) + 1))]
    assert primes == sieve
    assert is_prime(DEFAULT_PRIME)
    assert not is_prime(DEFAULT_PRIME + 2)


def test_sample_prime_in_range():
    p = sample_prime(10**12, 2 * 10**12, random.Random(1))
    assert 10**12 <= p < 2 * 10**12 and is_prime(p)
    with pytest.raises(ValueError):
        sample_prime(24, 29)


@given(st.integers(1, DEFAULT_PRIME - 1))
def test_prime_field_inverse(a):
    F = PrimeField(DEFAULT_PRIME)
    assert F.mul(a, F.inv(a)) == 1
    assert F.div(a, a) == 1
    assert F.submul(F.add(a, 5), a, 1) == 5


def test_prime_field_rejects_composites_and_maps_fractions():
    with pytest.raises(ValueError):
        PrimeField(91)
    F = PrimeField(7)
    assert F(Fraction(1, 2)) == 4
    assert F(-1) == 6
    with pytest.raises(ZeroDivisionError):
        F.inv(0)


def test_rationals_and_field_for():
    assert field_for(0) is QQ
    assert field_for(13) == PrimeField(13)
    assert QQ.div(QQ(1), QQ(3)) == Fraction(1, 3)
    assert QQ.format(Fraction(-2, 4)) == "-1/2"


def test_sparse_matrix_drops_zeros_and_multiplies():
    F = PrimeField(5)
    a = SparseMatrix.from_dense([[1, 0], [5, 2]], F)
    assert a.nnz == 2
    b = SparseMatrix.from_dense([[0, 1], [1, 0]], F)
    assert a.matmul(b).to_dense() == [[0, 1], [2, 0]]
    assert a.matvec([1, 1]) == [1, 2]
    assert a.transpose().to_dense() == [[1, 0], [0, 2]]
    with pytest.raises(ValueError):
        SparseMatrix.from_entries(1, 1, F, [(0, 0, 1), (0, 0, 2)])


def test_permutation_and_submatrix():
    p = SparseMatrix.permutation([2, 0, 1], QQ)
    m = SparseMatrix.from_dense([[1, 2, 3], [4, 5, 6], [7, 8, 9]], QQ)
    assert p.matmul(m).to_dense() == [[7, 8, 9], [1, 2, 3], [4, 5, 6]]
    sub, rows, cols = m.submatrix([2, 0], [1])
    assert rows == [0, 2] and cols == [1]
    assert sub.to_dense() == [[2], [8]]

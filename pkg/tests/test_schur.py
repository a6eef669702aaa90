from itertools import combinations

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from signcomp.errors import CardinalityError, PreconditionError
from signcomp.linalg import numerical_rank
from signcomp.schur import (
    as_sign_matrix,
    binary_schur_family,
    binary_to_sign,
    correspondence_holds,
    exact_rank,
    is_permutation_matrix,
    is_schur_binary,
    is_schur_sign,
    is_signed_permutation,
    max_sign_cardinality,
    random_schur_binary,
    random_schur_sign,
    sign_schur_family,
    sign_to_binary,
)


def rational_rank(M):
    return sympy.Matrix(np.asarray(M).tolist()).rank()


@st.composite
def sign_matrices(draw, max_n=10, max_r=5):
    n = draw(st.integers(1, max_n))
    r = draw(st.integers(1, max_r))
    bits = draw(st.lists(st.sampled_from([-1, 1]), min_size=n * r, max_size=n * r))
    return np.array(bits).reshape(n, r)


@st.composite
def binary_matrices(draw, max_n=10, max_r=4):
    n = draw(st.integers(1, max_n))
    r = draw(st.integers(1, max_r))
    bits = draw(st.lists(st.sampled_from([0, 1]), min_size=n * r, max_size=n * r))
    return np.array(bits).reshape(n, r)


@pytest.mark.parametrize(
    "S, expected",
    [
        (np.array([[1], [-1], [1]]), True),
        (np.array([[1, 1], [-1, -1], [1, 1]]), False),
        (np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]]), True),
    ],
)
def test_is_schur_sign_examples(S, expected):
    assert is_schur_sign(S) is expected


@pytest.mark.parametrize(
    "Z, expected",
    [
        (np.array([[1], [1], [1]]), False),
        (np.array([[1], [0], [0]]), True),
        (np.array([[1, 1], [0, 0], [1, 1], [0, 1]])[:, [0, 0]], False),
    ],
)
def test_is_schur_binary_examples(Z, expected):
    assert is_schur_binary(Z) is expected


@pytest.mark.parametrize("n, r", [(7, 4), (1, 1), (3, 2), (4, 3), (6, 3), (11, 5), (10, 4)])
def test_max_sign_cardinality(n, r):
    assert max_sign_cardinality(n) == r


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10 ** 6))
def test_max_sign_cardinality_is_largest(n):
    r = max_sign_cardinality(n)
    # r <= (1 + sqrt(8n - 7)) / 2  <=>  (2r - 1)^2 <= 8n - 7
    assert (2 * r - 1) ** 2 <= 8 * n - 7 < (2 * r + 1) ** 2


def test_validation():
    with pytest.raises(PreconditionError):
        as_sign_matrix([[1, 0]])
    with pytest.raises(PreconditionError):
        is_schur_binary([[2]])
    with pytest.raises(PreconditionError):
        max_sign_cardinality(0)


@settings(max_examples=150, deadline=None)
@given(st.lists(st.lists(st.integers(-3, 3), min_size=4, max_size=4), min_size=1, max_size=6))
def test_exact_rank_matches_rational_rank(rows):
    assert exact_rank(np.array(rows)) == rational_rank(rows)


@settings(max_examples=150, deadline=None)
@given(sign_matrices())
def test_sign_checker_matches_oracle(S):
    F = sign_schur_family(S)
    expected = F.shape[1] <= F.shape[0] and rational_rank(F) == F.shape[1]
    assert is_schur_sign(S) == expected


@settings(max_examples=150, deadline=None)
@given(binary_matrices())
def test_binary_checker_matches_oracle_and_correspondence(Z):
    F = binary_schur_family(Z)
    expected = F.shape[1] <= F.shape[0] and rational_rank(F) == F.shape[1]
    assert is_schur_binary(Z) == expected
    assert correspondence_holds(Z)


@settings(max_examples=100, deadline=None)
@given(sign_matrices())
def test_closure_properties(S):
    if not is_schur_sign(S):
        return
    n, r = S.shape
    assert r <= max_sign_cardinality(n)
    assert numerical_rank(S.astype(float)) == r
    for k in range(1, r + 1):
        for cols in combinations(range(r), k):
            assert is_schur_sign(S[:, list(cols)])
    for j in range(r):
        T = S.copy()
        T[:, j] *= -1
        assert is_schur_sign(T)


@pytest.mark.parametrize(
    "Z",
    [np.array([[1], [0], [0]]), np.ones((3, 1), dtype=int), np.random.default_rng(3).integers(0, 2, (8, 3))],
)
def test_correspondence_examples(Z):
    assert correspondence_holds(Z)


def test_affine_maps():
    assert np.array_equal(binary_to_sign([[1], [0]]), [[1], [-1]])
    assert np.array_equal(sign_to_binary(np.ones((3, 1), dtype=int)), np.ones((3, 1)))
    Z = np.random.default_rng(0).integers(0, 2, (9, 4))
    assert np.array_equal(sign_to_binary(binary_to_sign(Z)), Z)


@pytest.mark.parametrize("n, r", [(8, 3), (30, 5), (5, 1), (20, 4)])
def test_random_schur_sign(n, r):
    S = random_schur_sign(n, r, seed=n * r)
    assert S.shape == (n, r) and is_schur_sign(S)
    assert np.array_equal(S, random_schur_sign(n, r, seed=n * r))


@pytest.mark.parametrize("n, r", [(10, 3), (30, 4), (4, 1)])
def test_random_schur_binary(n, r):
    Z = random_schur_binary(n, r, seed=r)
    assert Z.shape == (n, r) and is_schur_binary(Z)
    if r == 1:
        assert 0 < Z.sum() < n


@pytest.mark.parametrize("fn, n, r", [(random_schur_sign, 3, 3), (random_schur_binary, 2, 2),
                                      (random_schur_binary, 3, 2)])
def test_random_generators_enforce_bound(fn, n, r):
    with pytest.raises(CardinalityError):
        fn(n, r, seed=0)


def test_permutation_predicates():
    P = np.array([[0, -1], [1, 0]])
    assert is_signed_permutation(P) and not is_permutation_matrix(P)
    assert is_permutation_matrix(np.abs(P))
    assert not is_signed_permutation(np.array([[1, 1], [0, 1]]))
    assert not is_signed_permutation(np.array([[2, 0], [0, 1]]))

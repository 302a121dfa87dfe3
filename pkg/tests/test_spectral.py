from fractions import Fraction
from math import comb

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from torus_obs import (DomainError, enumerate_sphere, exact_rank, extremal_kernel, gamma_bounds, gamma_max,
                       kernel_vector, moment_matrix, vanishing_order)
from torus_obs.spectral import multi_indices, rank_count_lower

int_matrices = st.integers(1, 7).flatmap(
    lambda r: st.integers(1, 7).flatmap(
        lambda c: st.lists(st.lists(st.integers(-6, 6), min_size=c, max_size=c), min_size=r, max_size=r)))


@settings(max_examples=150, deadline=None)
@given(rows=int_matrices)
def test_rank_matches_sympy(rows):
    assert exact_rank(rows) == sympy.Matrix(rows).rank()


@settings(max_examples=150, deadline=None)
@given(rows=int_matrices)
def test_kernel_vector_matches_sympy_nullspace(rows):
    null = sympy.Matrix(rows).nullspace()
    vec = kernel_vector(rows)
    assert (vec is None) == (not null)
    if vec is not None:
        x = sympy.Matrix([sympy.Rational(v.numerator, v.denominator) for v in vec.entries])
        assert x != sympy.zeros(len(x), 1)
        assert sympy.Matrix(rows) * x == sympy.zeros(len(rows), 1)
        assert next(v for v in vec.entries if v) == 1


def test_multi_index_counts():
    for d in (2, 3, 4):
        for N in range(6):
            assert len(multi_indices(d, N)) == comb(N + d, d)
            assert len(multi_indices(d, N, reduced=True)) == comb(N + d - 1, d - 1) + comb(N + d - 2, d - 1)
    assert all(a[-1] <= 1 for a in multi_indices(3, 5, reduced=True))


def test_moment_matrix_shape_and_entries():
    m = moment_matrix([(1, 0), (0, 1)], 2)
    assert m.shape == (6, 2)
    assert m.entries[0] == (1, 1)
    assert m.to_json()["entries"][0] == ["1", "1"]


def test_moment_matrix_errors():
    with pytest.raises(DomainError):
        moment_matrix([], 2)
    with pytest.raises(DomainError):
        moment_matrix([(1, 0)], -1)


def test_gamma_max_examples():
    assert gamma_max(2, 1, 10) == 1
    assert gamma_max(2, 25, 12) == 5
    with pytest.raises(DomainError):
        gamma_max(2, 3, 4)


def test_gamma_bounds_examples():
    b = gamma_bounds(2, 1)
    assert (b.lower, b.upper_M, b.upper_D) == (1, 2, 2.0)
    b = gamma_bounds(2, 25)
    assert (b.lower, b.upper_M, b.upper_D) == (5, 10, 10.0)
    assert gamma_bounds(3, 2).upper_D is None
    assert gamma_bounds(3, 50).upper_D > 0


def test_kernel_on_s2_25():
    pts = enumerate_sphere(2, 25).tuples()
    vec = kernel_vector(moment_matrix(pts, 5, reduced=True))
    assert vec.entries[0] == 1 and vec.entries[1] == Fraction(-25, 14)
    assert vanishing_order(vec, pts, 8) == 5
    assert kernel_vector(moment_matrix(pts, 6, reduced=True)) is None


def test_kernel_on_unit_circle():
    pts = enumerate_sphere(2, 1).tuples()
    vec = kernel_vector(moment_matrix(pts, 1))
    assert vec.entries == (1, -1, -1, 1)
    assert vanishing_order(vec, pts, 4) == 1


def test_vanishing_order_inputs():
    pts = [(1, 0), (-1, 0)]
    assert vanishing_order([1, 1], pts, 3) == -1
    assert vanishing_order({(1, 0): 1, (-1, 0): -1}, pts, 3) == 0
    assert vanishing_order([1j, -1j], pts, 3) == 0
    with pytest.raises(DomainError):
        vanishing_order([1], pts, 3)
    with pytest.raises(DomainError):
        vanishing_order({(2, 0): 1, (-1, 0): 1}, pts, 3)


SPHERES = [(d, n) for d in (2, 3) for n in range(1, 61) if len(enumerate_sphere(d, n)) > 1]


@pytest.mark.parametrize("d,n", SPHERES)
def test_extremal_kernel_soundness(d, n):
    pts = enumerate_sphere(d, n).tuples()
    N, vec = extremal_kernel(pts)
    lower = rank_count_lower(d, len(pts))
    # a kernel is guaranteed wherever the reduced matrix is short
    assert N >= lower
    assert (vec is None) == (lower < 0)
    if lower >= 0:
        assert kernel_vector(moment_matrix(pts, lower, reduced=True)) is not None
    if vec is not None:
        assert vanishing_order(vec, pts, N) == N
        assert kernel_vector(moment_matrix(pts, N + 1)) is None


@pytest.mark.parametrize("d,n", [(d, n) for d, n in SPHERES if n <= 40])
def test_sandwich(d, n):
    g = gamma_max(d, n, 12)
    b = gamma_bounds(d, n)
    assert b.lower <= g <= b.upper_M
    if b.upper_D is not None:
        assert g <= int(b.upper_D)


def test_extremal_kernel_requires_common_norm():
    with pytest.raises(DomainError):
        extremal_kernel([(1, 0), (2, 0)])


def test_kernel_is_deterministic():
    pts = enumerate_sphere(3, 27).tuples()
    a = extremal_kernel(pts)
    b = extremal_kernel(pts)
    assert a == b


def _rank_identity(d):
    for n in range(1, 201):
        pts = enumerate_sphere(d, n).tuples()
        if not pts:
            continue
        for N in range(9):
            full = exact_rank(moment_matrix(pts, N))
            assert full == exact_rank(moment_matrix(pts, N, reduced=True)), (d, n, N)
            if full == len(pts):
                break


def test_rank_identity_plane():
    _rank_identity(2)


@pytest.mark.slow
def test_rank_identity_space():
    _rank_identity(3)

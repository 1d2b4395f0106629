from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from ncflat.exactlin import (
    GF,
    QQ,
    Mat,
    Subspace,
    image,
    inverse,
    is_prime,
    kernel,
    kron,
    quotient,
    rank,
    rref,
    solve_affine,
    swap_matrix,
)
from ncflat.exactlin import kernels
from ncflat.exactlin.kernels import PRIMES, rational_reconstruct, rref_mod

small = st.integers(-6, 6)


def matrices(rows=st.integers(1, 6), cols=st.integers(1, 7), entries=small):
    return st.tuples(rows, cols).flatmap(
        lambda rc: st.lists(st.lists(entries, min_size=rc[1], max_size=rc[1]), min_size=rc[0], max_size=rc[0])
    )


def fractions(num=st.integers(-20, 20), den=st.integers(1, 9)):
    return st.builds(Fraction, num, den)


# -- oracles -------------------------------------------------------------------------------

def test_rref_identity():
    red, piv = rref(Mat.eye(QQ, 2))
    assert red == Mat.eye(QQ, 2) and piv == [0, 1]


def test_rref_rank_one_compacts_rows():
    red, piv = rref(Mat.from_rows(QQ, [[2, 4], [1, 2]]))
    assert red == Mat.from_rows(QQ, [[1, 2]]) and piv == [0]


def test_rref_with_fractions():
    red, piv = rref(Mat.from_rows(QQ, [[3, 1], [1, "1/2"]]))
    assert piv == [0, 1]
    assert red == Mat.eye(QQ, 2)


def test_kernel_of_zero_and_identity():
    assert kernel(Mat.zeros(QQ, 3, 3)).dim == 3
    assert kernel(Mat.eye(QQ, 3)).dim == 0


def test_kernel_of_dual_number_multiplication():
    # basis 1, x; columns 1(x)1, 1(x)x, x(x)1, x(x)x
    mu = Mat.from_rows(QQ, [[1, 0, 0, 0], [0, 1, 1, 0]])
    K = kernel(mu)
    assert K.dim == 2
    assert K.contains(Mat.column(QQ, [0, 1, -1, 0]))
    assert K.contains(Mat.column(QQ, [0, 0, 0, 1]))


def test_solve_affine_trivial_cases():
    b = Mat.column(QQ, [1, "2/3", -4])
    part, hom = solve_affine(Mat.eye(QQ, 3), b)
    assert part == b and hom.dim == 0
    assert solve_affine(Mat.zeros(QQ, 3, 2), b) is None


def test_quotient_extremes():
    q = quotient(3, Subspace.zero(QQ, 3))
    assert q.projection == Mat.eye(QQ, 3) and q.section == Mat.eye(QQ, 3)
    assert quotient(3, Subspace.full(QQ, 3)).dim == 0


def _eliminate_mod(rows, p):
    """Plain Gauss-Jordan mod p taking the lowest available pivot row."""
    rows = [[x % p for x in r] for r in rows]
    out = []
    for c in range(len(rows[0])):
        cand = [r for r in rows if r[c]]
        if not cand:
            continue
        piv = cand[-1]
        rows.remove(piv)
        inv = pow(piv[c], -1, p)
        piv = [x * inv % p for x in piv]
        rows = [[(x - r[c] * y) % p for x, y in zip(r, piv)] for r in rows]
        out = [[(x - r[c] * y) % p for x, y in zip(r, piv)] for r in out]
        out.append(piv)
    return out


def test_fp_rref_matches_independent_elimination():
    F = GF(5)
    rng = np.random.default_rng(7)
    rows = rng.integers(0, 5, size=(5, 7)).tolist()
    red, piv = rref(Mat.from_rows(F, rows))
    ref = _eliminate_mod(rows, 5)
    ours, theirs = Subspace.span_rows(red), Subspace.span_rows(Mat.from_rows(F, ref, 7))
    assert ours.contains_subspace(theirs) and theirs.contains_subspace(ours)
    # reduced echelon forms are unique
    assert red == Mat.from_rows(F, sorted(ref, key=lambda r: [x == 0 for x in r]), 7)


def test_field_arithmetic():
    F = GF(7)
    assert F.scalar("1/2") == 4
    assert F.scalar(-1) == 6
    with pytest.raises(ZeroDivisionError):
        F.scalar("1/7")
    with pytest.raises(ValueError):
        GF(8)
    assert QQ.format_scalar(Fraction(6, 4)) == "3/2"
    assert QQ.format_scalar(Fraction(4, 2)) == 2


def test_primes_table_is_prime():
    assert all(is_prime(p) and p < 2**31 for p in PRIMES)
    assert len(set(PRIMES)) == len(PRIMES)


def test_rational_reconstruction():
    p = PRIMES[0]
    x = Fraction(-17, 23)
    r = x.numerator * pow(x.denominator, -1, p) % p
    assert rational_reconstruct(r, p) == x


def test_swap_matrix_swaps_kronecker_factors():
    a = Mat.column(QQ, [1, 2])
    b = Mat.column(QQ, [3, 4, 5])
    assert swap_matrix(QQ, 2, 3) @ kron(a, b) == kron(b, a)


def test_kron_index_is_row_major():
    a = Mat.column(QQ, [1, 0])
    b = Mat.column(QQ, [0, 1, 0])
    assert kron(a, b).flat_list() == [0, 1, 0, 0, 0, 0]


# -- properties -----------------------------------------------------------------------------

@given(matrices())
def test_rank_matches_sympy(rows):
    assert rank(Mat.from_rows(QQ, rows)) == sympy.Matrix(rows).rank()


@given(matrices(entries=fractions()))
def test_rref_matches_sympy_over_q(rows):
    red, piv = rref(Mat.from_rows(QQ, rows))
    ref, ref_piv = sympy.Matrix(rows).rref()
    assert list(piv) == list(ref_piv)
    expected = [[Fraction(int(x.p), int(x.q)) for x in ref.row(i)] for i in range(len(piv))]
    assert red == Mat.from_rows(QQ, expected, len(rows[0]))


@given(matrices())
def test_rref_is_idempotent(rows):
    red, piv = rref(Mat.from_rows(QQ, rows))
    again, piv2 = rref(red)
    assert again == red and piv2 == piv


@given(matrices(), st.sampled_from([2, 3, 101, 65521]))
def test_rank_nullity_over_fp(rows, p):
    m = Mat.from_rows(GF(p), rows)
    K = kernel(m)
    assert K.dim + rank(m) == m.cols
    assert (m @ K.embedding).is_zero()


@given(matrices())
def test_kernel_and_image_over_q(rows):
    m = Mat.from_rows(QQ, rows)
    K = kernel(m)
    assert (m @ K.embedding).is_zero()
    assert K.dim + image(m).dim == m.cols


@given(matrices(rows=st.just(4), cols=st.just(4), entries=st.integers(-3, 3)))
def test_inverse_roundtrip(rows):
    m = Mat.from_rows(QQ, rows)
    if rank(m) < 4:
        with pytest.raises(ZeroDivisionError):
            inverse(m)
        return
    assert inverse(m) @ m == Mat.eye(QQ, 4)


@given(matrices(), st.lists(small, min_size=7, max_size=7))
def test_solve_affine_solutions_solve(rows, x):
    m = Mat.from_rows(QQ, rows)
    b = m @ Mat.column(QQ, x[: m.cols])
    part, hom = solve_affine(m, b)
    assert m @ part == b
    assert (m @ hom.embedding).is_zero()


@given(matrices(entries=st.integers(-(2**40), 2**40)))
def test_large_entries_exact(rows):
    assert rank(Mat.from_rows(QQ, rows)) == sympy.Matrix(rows).rank()


@given(matrices(rows=st.integers(1, 8), cols=st.integers(1, 9), entries=st.integers(0, 100)))
def test_backends_agree(rows):
    if kernels._rref_mod_compiled is None:
        pytest.skip("compiled kernel not built")
    a = np.array(rows, dtype=np.int64)
    r1, p1 = rref_mod(a, 101, backend="compiled")
    r2, p2 = rref_mod(a, 101, backend="numpy")
    assert p1 == p2 and np.array_equal(r1, r2)


@given(matrices(), st.lists(small, min_size=7, max_size=7))
def test_quotient_projection_kills_relations(rows, v):
    m = Mat.from_rows(QQ, rows)
    rel = image(m.T)
    q = quotient(m.cols, rel)
    assert (q.projection @ rel.embedding).is_zero()
    assert q.projection @ q.section == Mat.eye(QQ, q.dim)

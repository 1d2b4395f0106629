import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import PRESET_NAMES, SMALL
from ncflat.algebra import preset
from ncflat.calculus import (
    Form,
    d_element,
    d_universal,
    differential_matrix,
    omega,
    omega_product,
    product_matrix,
)
from ncflat.errors import DegreeCapExceeded
from ncflat.exactlin import QQ, Mat, kron, kron_all


@pytest.mark.parametrize("name", PRESET_NAMES)
@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_omega_dimension(name, k):
    A = preset(name)
    n = A.dim
    assert omega(A, k).dim == n * (n - 1) ** k


def test_field_has_no_one_forms():
    assert omega(preset("field"), 1).dim == 0


def test_dual_numbers_one_forms():
    A = preset("dual_numbers")
    W = omega(A, 1)
    one, x = A.basis(0), A.basis(1)
    assert W.dim == 2
    W.coords(kron(one, x) - kron(x, one))
    W.coords(kron(x, x))
    assert d_element(A, x).ambient == kron(one, x) - kron(x, one)


def test_dx_dx_in_dual_numbers():
    A = preset("dual_numbers")
    one, x = A.basis(0), A.basis(1)
    dx = d_element(A, x)
    sq = omega_product(dx, dx)
    # 1(x)x(x)x - 1(x)x^2(x)1 - x(x)1(x)x + x(x)x(x)1, and x^2 = 0
    expected = kron_all(one, x, x) - kron_all(x, one, x) + kron_all(x, x, one)
    assert sq.ambient == expected


def test_degree_cap(monkeypatch):
    A = preset("dual_numbers")
    monkeypatch.setenv("NCFLAT_DEGREE_CAP", "1")
    with pytest.raises(DegreeCapExceeded):
        omega(A, 2)


@pytest.mark.parametrize("name", PRESET_NAMES)
@pytest.mark.parametrize("k", [0, 1, 2])
def test_d_squared_is_zero(name, k, monkeypatch):
    monkeypatch.setenv("NCFLAT_DEGREE_CAP", "4")
    A = preset(name)
    assert (differential_matrix(A, k + 1) @ differential_matrix(A, k)).is_zero()


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_leibniz_degree_zero_on_basis(name):
    A = preset(name)
    W0 = omega(A, 0)
    for i in range(A.dim):
        for j in range(A.dim):
            a, b = Form(W0, A.basis(i)), Form(W0, A.basis(j))
            ab = Form(W0, A.mul(A.basis(i), A.basis(j)))
            lhs = d_universal(A, 0, ab)
            rhs = omega_product(a, d_universal(A, 0, b)) + omega_product(d_universal(A, 0, a), b)
            assert lhs.coords == rhs.coords


def _form(A, k, xs):
    W = omega(A, k)
    return Form(W, Mat.column(QQ, (xs * (W.dim // max(len(xs), 1) + 1))[: W.dim]))


@pytest.mark.parametrize("name", SMALL + ["mat2"])
@given(
    st.integers(0, 1),
    st.integers(0, 1),
    st.lists(st.integers(-3, 3), min_size=1, max_size=8),
    st.lists(st.integers(-3, 3), min_size=1, max_size=8),
)
def test_graded_leibniz(name, k, l, xs, ys):
    A = preset(name)
    w, v = _form(A, k, xs), _form(A, l, ys)
    lhs = d_universal(A, k + l, omega_product(w, v))
    first = omega_product(d_universal(A, k, w), v)
    second = omega_product(w, d_universal(A, l, v))
    rhs = first + second if k % 2 == 0 else first - second
    assert lhs.coords == rhs.coords


@pytest.mark.parametrize("name", SMALL)
@given(
    st.lists(st.integers(-3, 3), min_size=1, max_size=6),
    st.lists(st.integers(-3, 3), min_size=1, max_size=6),
    st.lists(st.integers(-3, 3), min_size=1, max_size=6),
)
def test_product_associative(name, xs, ys, zs):
    A = preset(name)
    a, b, c = _form(A, 1, xs), _form(A, 0, ys), _form(A, 1, zs)
    assert omega_product(omega_product(a, b), c).coords == omega_product(a, omega_product(b, c)).coords


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_bimodule_structure_matches_products(name):
    A = preset(name)
    W = omega(A, 1)
    for i in range(A.dim):
        assert W.left[i] == product_matrix(A, 0, 1) @ kron(A.basis(i), Mat.eye(QQ, W.dim))
        assert W.right[i] == product_matrix(A, 1, 0) @ kron(Mat.eye(QQ, W.dim), A.basis(i))

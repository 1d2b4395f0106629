import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import PRESET_NAMES, SMALL
from ncflat.algebra import preset, preset_modules, regular_module
from ncflat.calculus import contraction_matrix
from ncflat.connection import (
    Connection,
    associativity_defect_possible,
    associativity_pairing,
    check_connection,
    connection_on_omega,
    d_tensor_id,
    flatness,
    flatness_residual,
    induce_right_action,
    left_linear_maps_to_forms,
    nonflat_associativity_witness,
    perturb,
    random_flat_connection,
    random_left_automorphism,
    rng_for,
    solve_connections,
    transport,
    universal_d,
    verify_lemma_21,
)
from ncflat.errors import NotAConnection, RetryExhausted
from ncflat.exactlin import GF, QQ, Mat, kron, kron_all
from ncflat.report import FAIL


def test_d_is_a_connection(algebra):
    assert check_connection(universal_d(algebra)).passed


def test_zero_connection_fails_leibniz_at_x_and_1():
    A = preset("dual_numbers")
    M = regular_module(A)
    rep = check_connection(Connection(M, Mat.zeros(QQ, 4, 2)))
    assert rep.get("con1").ok
    bad = rep.get("con2[a1]")
    assert bad.status == FAIL
    assert bad.witness["column"] == 0  # m = 1
    one, x = A.basis(0), A.basis(1)
    # residual is x (x) 1 - 1 (x) x
    expected = (kron(x, one) - kron(one, x)).nonzero_entries()
    assert bad.witness["residual"] == [[r, v] for r, _, v in expected]
    assert rep.get("con2[a0]").ok


def test_field_zero_connection():
    K = preset("field")
    for M in preset_modules(K).values():
        if M.left is not None:
            conn = Connection(M, Mat.zeros(QQ, M.dim, M.dim))
            assert check_connection(conn).passed
            assert flatness(conn).is_flat


def test_universal_d_is_flat(algebra):
    assert flatness(universal_d(algebra)).is_flat


def test_flatness_requires_a_connection():
    A = preset("dual_numbers")
    with pytest.raises(NotAConnection):
        flatness(Connection(regular_module(A), Mat.zeros(QQ, 4, 2)))


def test_perturbation_breaks_flatness():
    A = preset("dual_numbers")
    bad = perturb(universal_d(A), seed=0)
    assert check_connection(bad).passed
    assert not flatness(bad).is_flat


def test_field_cannot_be_perturbed():
    with pytest.raises(RetryExhausted):
        perturb(universal_d(preset("field")), seed=0)


def test_regular_d_induces_multiplication(algebra):
    R = induce_right_action(universal_d(algebra))
    assert R == algebra.right_mult


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_d_on_omega1_is_flat(name):
    conn = connection_on_omega(preset(name), 1)
    assert check_connection(conn).passed
    assert conn.is_flat()


def test_d_on_omega_of_field_is_empty():
    conn = connection_on_omega(preset("field"), 1)
    assert conn.matrix.shape == (0, 0)


def test_solver_regular_module(algebra):
    fam = solve_connections(regular_module(algebra))
    assert fam is not None
    assert check_connection(fam.particular).passed
    assert fam.dimension == len(left_linear_maps_to_forms(regular_module(algebra)))


@pytest.mark.parametrize("name", ["dual_numbers", "trunc_poly_3"])
def test_residue_module_has_no_connection(name):
    assert solve_connections(preset_modules(preset(name))["residue_left"]) is None


def test_mat2_column_module_has_connections():
    fam = solve_connections(preset_modules(preset("mat2"))["column"])
    assert fam is not None


def test_field_connection_is_unique():
    K = preset("field")
    fam = solve_connections(regular_module(K))
    assert fam.dimension == 0 and fam.particular.matrix.is_zero()


def test_identity_transport_is_d_tensor_id():
    A = preset("group_C2")
    base = d_tensor_id(A, 2)
    same = transport(base, base.module.identity())
    assert same.matrix == base.matrix and same.is_flat()


def test_random_generator_rejects_empty_rank():
    with pytest.raises(ValueError):
        random_flat_connection(preset("mat2"), 0, seed=1)


def test_random_generator_is_deterministic():
    A = preset("mat2")
    _, c1 = random_flat_connection(A, 1, seed=11)
    _, c2 = random_flat_connection(A, 1, seed=11)
    assert c1.matrix == c2.matrix


def test_random_automorphism_over_fp():
    A = preset("dual_numbers", GF(5))
    phi = random_left_automorphism(A, 2, rng_for(4))
    for L in A.left_mult:
        assert phi @ kron(L, Mat.eye(A.field, 2)) == kron(L, Mat.eye(A.field, 2)) @ phi


@pytest.mark.parametrize("name", PRESET_NAMES)
@given(st.integers(0, 10_000), st.integers(1, 2))
def test_random_flat_connections(name, seed, v):
    A = preset(name)
    _, conn = random_flat_connection(A, v, seed)
    assert check_connection(conn).passed
    assert flatness(conn).is_flat
    assert verify_lemma_21(conn).passed


@pytest.mark.parametrize("name", SMALL + ["mat2"])
@given(st.integers(0, 10_000))
def test_associativity_defect_identity(name, seed):
    # R_b R_a - R_{ab} = -(x (x) y (x) m -> x a y b m)(flatness residual)
    A = preset(name)
    base = universal_d(A)
    try:
        conn = perturb(base, seed, require_nonflat=False)
    except RetryExhausted:
        conn = base
    R = induce_right_action(conn)
    F = flatness_residual(conn)
    C = contraction_matrix(conn.module)
    I, Im = A.identity(), conn.module.identity()
    for a in range(A.dim):
        for b in range(A.dim):
            prod = A.left_mult[a].col(b)
            R_ab = Mat.zeros(QQ, A.dim, A.dim)
            for k in range(A.dim):
                if prod[k, 0] != 0:
                    R_ab = R_ab + R[k].scale(prod[k, 0])
            P = associativity_pairing(A, a, b) @ kron_all(I, I, A.unit)
            assert R[b] @ R[a] - R_ab == -(C @ kron(P, Im) @ F)


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_defect_possible_only_for_mat2(name):
    assert associativity_defect_possible(preset(name)) == (name == "mat2")


def test_nonflat_associativity_witness_on_mat2():
    found = nonflat_associativity_witness(preset("mat2"), seeds=range(20))
    assert found is not None
    conn, chk = found
    assert not conn.is_flat()
    assert chk.status == FAIL and len(chk.witness["triple"]) == 3


def test_no_witness_for_commutative():
    assert nonflat_associativity_witness(preset("dual_numbers"), seeds=range(5)) is None

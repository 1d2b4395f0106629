"""Braidings between flat modules, the maps sigma^1, sigma^2 and tensor connections.

Every flat connection turns its module into a bimodule.  For two such
bimodules the braiding ``c_{M,N}: M (x)_A N -> N (x)_A M`` is
``m (x) n -> n (x) m - sum n_A n (x) m_M`` where ``nabla m = sum m_A (x) m_M``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import ModuleRep, TensorOverA, tensor_over_A
from .calculus import contraction_matrix, differential_matrix, omega
from .connection import Connection, ensure_flat
from .errors import WellDefinednessFailure
from .exactlin import Mat, hstack, kron, kron_all, rank, swap_matrix
from .report import FAIL, PASS, Check, VerificationReport, compare, zero_check, witness_from_diff

TAG_BRAID = "braid"
TAG_SIGMA = "sigma"
TAG_BIMCON = "bim.con"
TAG_FLATBIM = "flat.bim.uni"
TAG_TENSOR = "tensor connection"


@dataclass
class Braiding:
    matrix: Mat
    source: TensorOverA  # M (x)_A N
    target: TensorOverA  # N (x)_A M
    lift: Mat  # M (x) N -> N (x) M before descending


def braiding_lift(conn_M: Connection, N: ModuleRep) -> Mat:
    A = conn_M.algebra
    m = conn_M.module.dim
    S = swap_matrix(A.field, m, N.dim)
    corr = Mat.zeros(A.field, N.dim * m, N.dim * m)
    for i, B in enumerate(conn_M.blocks()):
        corr = corr + kron(N.left[i], B)
    return (Mat.eye(A.field, N.dim * m) - corr) @ S


def _as_bimodule(N: Connection | ModuleRep, check_flat: bool) -> ModuleRep:
    if isinstance(N, Connection):
        if check_flat:
            ensure_flat(N)
        return N.bimodule()
    if N.left is None or N.right is None:
        raise ValueError("braiding needs a bimodule on the right-hand side")
    return N


def braiding(conn_M: Connection, N: Connection | ModuleRep, check_flat: bool = True) -> Braiding:
    """``c_{M,N}`` on balanced tensor products.

    ``N`` is either a flat connection (its induced bimodule is used) or a
    bimodule given directly.  Only ``nabla_M`` enters the formula.
    """
    if check_flat:
        ensure_flat(conn_M)
    Mb, Nb = conn_M.bimodule(), _as_bimodule(N, check_flat)
    src = tensor_over_A(Mb, Nb)
    dst = tensor_over_A(Nb, Mb)
    lift = braiding_lift(conn_M, Nb)
    leak = src.quotient.respects(lift, dst.quotient)
    if not leak.is_zero():
        raise WellDefinednessFailure("braiding", witness_from_diff(leak))
    return Braiding(src.quotient.descend(lift, dst.quotient), src, dst, lift)


def verify_braiding(conn_M: Connection, conn_N: Connection) -> VerificationReport:
    """Well-definedness, bilinearity and ``c_{N,M} c_{M,N} = id``."""
    rep = VerificationReport()
    Mb, Nb = conn_M.bimodule(), conn_N.bimodule()
    src = tensor_over_A(Mb, Nb)
    dst = tensor_over_A(Nb, Mb)
    lift_mn = braiding_lift(conn_M, Nb)
    lift_nm = braiding_lift(conn_N, Mb)
    rep.add(zero_check("braid_well_defined[MN]", TAG_BRAID, src.quotient.respects(lift_mn, dst.quotient)))
    rep.add(zero_check("braid_well_defined[NM]", TAG_BRAID, dst.quotient.respects(lift_nm, src.quotient)))
    if not rep.passed:
        return rep
    c_mn = src.quotient.descend(lift_mn, dst.quotient)
    c_nm = dst.quotient.descend(lift_nm, src.quotient)
    A = conn_M.algebra
    for i in range(A.dim):
        rep.add(compare(f"braid_left_linear[a{i}]", TAG_BRAID, c_mn @ src.module.left[i], dst.module.left[i] @ c_mn))
        rep.add(compare(f"braid_right_linear[a{i}]", TAG_BRAID, c_mn @ src.module.right[i], dst.module.right[i] @ c_mn))
    rep.add(compare("braid_symmetric", TAG_BRAID, c_nm @ c_mn, Mat.eye(A.field, src.dim)))
    return rep


# -- sigma maps ------------------------------------------------------------------------

def sigma1_lift(conn: Connection) -> Mat:
    """``M (x) A -> A (x) M``, ``m (x) a -> -(id (x) R_a) nabla m``."""
    A, M = conn.algebra, conn.module
    R = conn.right_action()
    H = hstack([kron(A.identity(), R[j]) @ conn.matrix for j in range(A.dim)], A.field, A.dim * M.dim)
    return -(H @ swap_matrix(A.field, M.dim, A.dim))


def sigma_lift(conn: Connection, k: int) -> Mat:
    """``M (x) A^{(x)k} -> A^{(x)k} (x) M`` by moving ``M`` past one leg at a time."""
    A = conn.algebra
    s1 = sigma1_lift(conn)
    out = kron(s1, Mat.eye(A.field, A.dim ** (k - 1)))
    for step in range(1, k):
        out = kron_all(Mat.eye(A.field, A.dim**step), s1, Mat.eye(A.field, A.dim ** (k - 1 - step))) @ out
    return out


def right_contraction(conn: Connection) -> Mat:
    """``M (x) A -> M``, ``m (x) a -> m a`` for the induced right action."""
    A, M = conn.algebra, conn.module
    R = conn.right_action()
    return hstack(list(R), A.field, M.dim) @ swap_matrix(A.field, M.dim, A.dim)


def sigma1_domain(conn: Connection):
    """``M (x)_A Omega^1`` realized as the kernel of ``m (x) a -> m a``."""
    from .exactlin import kernel

    return kernel(right_contraction(conn))


def verify_sigma1(conn: Connection) -> VerificationReport:
    """The lift lands in ``Omega^1 (x)_A M`` and is A-bilinear on the kernel model."""
    A, M = conn.algebra, conn.module
    R = conn.right_action()
    E = sigma1_domain(conn).embedding
    s = sigma1_lift(conn)
    Im, In = M.identity(), A.identity()
    rep = VerificationReport()
    rep.add(zero_check("sigma1_into_forms", TAG_SIGMA, contraction_matrix(M) @ s @ E))
    for i in range(A.dim):
        rep.add(compare(f"sigma1_left_linear[a{i}]", TAG_SIGMA, s @ kron(M.left[i], In) @ E, kron(A.left_mult[i], Im) @ s @ E))
        rep.add(compare(f"sigma1_right_linear[a{i}]", TAG_SIGMA, s @ kron(Im, A.right_mult[i]) @ E, kron(In, R[i]) @ s @ E))
    return rep


@dataclass
class SigmaComparison:
    degree: int
    braid: Braiding
    into_source: Mat  # M (x)_A Omega^k -> M (x) A^{(x)k}
    into_target: Mat  # Omega^k (x)_A M -> A^{(x)k} (x) M
    sigma: Mat  # lift on M (x) A^{(x)k}


def sigma_comparison(conn: Connection, k: int) -> SigmaComparison:
    A, M = conn.algebra, conn.module
    W = omega(A, k)
    # native bimodule structure of Omega^k; the one induced by d differs for k >= 1
    br = braiding(conn, W.module("bi"))
    rho = right_contraction(conn)
    Ik = Mat.eye(A.field, A.dim**k)
    Im = M.identity()
    i_src = kron(rho, Ik) @ kron(Im, W.embedding) @ br.source.section
    i_dst = kron(Ik, contraction_matrix(M)) @ kron(W.embedding, Im) @ br.target.section
    return SigmaComparison(k, br, i_src, i_dst, sigma_lift(conn, k))


def verify_theorem_24(conn: Connection) -> VerificationReport:
    """``sigma^1 = c_{M,Omega^1}``, ``sigma^2 = c_{M,Omega^2}``, (bim.con) and (flat.bim.uni)."""
    ensure_flat(conn)
    A, M = conn.algebra, conn.module
    rep = VerificationReport()
    R = conn.right_action()
    rep.extend(verify_sigma1(conn))
    cmp = {}
    for k in (1, 2):
        sc = sigma_comparison(conn, k)
        cmp[k] = sc
        rep.add(
            Check(
                f"sigma{k}_iso",
                TAG_SIGMA,
                PASS if rank(sc.into_source) == sc.braid.source.dim and rank(sc.into_target) == sc.braid.target.dim else FAIL,
                detail="tensor products over A embed into the reduced models",
            )
        )
        rep.add(
            compare(
                f"sigma{k}=c[M,Omega^{k}]",
                TAG_SIGMA,
                sc.into_target @ sc.braid.matrix,
                sc.sigma @ sc.into_source,
            )
        )
    # (bim.con): nabla(m a) = nabla(m) a + c(m (x) da), c = c_{M,Omega^1}
    sc = cmp[1]
    d0 = differential_matrix(A, 0)
    Im = M.identity()
    for j in range(A.dim):
        lhs = conn.matrix @ R[j] - kron(A.identity(), R[j]) @ conn.matrix
        rhs = sc.into_target @ sc.braid.matrix @ sc.braid.source.projection @ kron(Im, d0 @ A.basis(j))
        rep.add(compare(f"bim.con[a{j}]", TAG_BIMCON, lhs, rhs))
    # (flat.bim.uni): the degree-2 braiding is the composite of two degree-1 moves
    s1 = sigma1_lift(conn)
    In = A.identity()
    composite = kron(In, s1) @ kron(s1, In)
    sc2 = cmp[2]
    rep.add(
        compare(
            "flat.bim.uni",
            TAG_FLATBIM,
            sc2.into_target @ sc2.braid.matrix,
            composite @ sc2.into_source,
        )
    )
    return rep


# -- tensor connection -------------------------------------------------------------------

def tensor_connection_lift(conn_M: Connection, conn_N: Connection) -> Mat:
    """Five-term connection on ``M (x) N -> A (x) M (x) N`` before descending."""
    A = conn_M.algebra
    M = conn_M.module
    N = conn_N.module
    n, m, q = A.dim, M.dim, N.dim
    F = A.field
    Mb = conn_M.blocks()
    Nb = conn_N.blocks()
    Im, In = M.identity(), N.identity()
    out = kron(conn_M.matrix, In)
    for i in range(n):
        out = out + kron(A.basis(i), kron(Im, Nb[i]))
        out = out - kron(A.unit, kron(M.left[i], Nb[i]))
        for j in range(n):
            out = out + kron(A.basis(j), kron(M.left[i] @ Mb[j], Nb[i]))
            out = out - kron(A.left_mult[j].col(i), kron(Mb[j], Nb[i]))
    return out


def tensor_connection(conn_M: Connection, conn_N: Connection) -> Connection:
    """Connection on ``M (x)_A N`` from a flat ``nabla_M`` and any ``nabla_N``."""
    ensure_flat(conn_M)
    A = conn_M.algebra
    T = tensor_over_A(conn_M.bimodule(), conn_N.module.left_only())
    lift = tensor_connection_lift(conn_M, conn_N)
    outer = kron(A.identity(), T.projection)
    rel = T.quotient.relations
    if rel.dim:
        leak = outer @ lift @ rel.embedding
        if not leak.is_zero():
            raise WellDefinednessFailure("tensor connection", witness_from_diff(leak))
    mat = outer @ lift @ T.section
    return Connection(T.module, mat, name=f"{conn_M.name}(x){conn_N.name}")

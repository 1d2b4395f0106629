"""Hom-connections ``Hom_A(Omega^1, M) -> M`` on right modules.

``H^k = Hom_A(Omega^k, M)`` is stored through a basis of ``m x w_k`` matrices
(``w_k = dim Omega^k``), each commuting with the right actions.  A
hom-connection is an ``m x h_1`` matrix acting on ``H^1`` coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import Iterator, Sequence

from .algebra import Algebra, ModuleRep, tensor_over_A
from .calculus import differential_matrix, omega, product_matrix
from .connection import Connection, random_scalars, rng_for
from .errors import CoordinateFailure, DescentFailure, NotFlat
from .exactlin import Mat, Subspace, kernel, kron, solve_affine, vstack
from .report import FAIL, PASS, Check, VerificationReport, compare, witness_from_diff, zero_check

TAG_HOMCON = "hom-con"
TAG_PHI0 = "hom-con-phi-0"
TAG_PHI = "hom-con-phi"
TAG_PHIACT = "phi.act"
TAG_PHID = "phi.d"
TAG_NABLA1 = "nabla_1 expansion"
TAG_HOMFLAT = "hom-flat"
TAG_LACT = "l.act"
TAG_SYMBOL = "symbol"
TAG_PHIID = "phi"


def _vec(x: Mat) -> Mat:
    return Mat(x.field, x.num.reshape(-1, 1).copy(), x.den)


def _unvec(v: Mat, rows: int, cols: int) -> Mat:
    return Mat(v.field, v.num.reshape(rows, cols).copy(), v.den)


@dataclass(frozen=True, eq=False)
class HomSpace:
    """Right ``A``-linear maps ``Omega^k -> M``."""

    module: ModuleRep
    degree: int
    subspace: Subspace  # inside K^{m * w_k}, row-major vec of the matrices

    @property
    def algebra(self) -> Algebra:
        return self.module.algebra

    @property
    def dim(self) -> int:
        return self.subspace.dim

    @property
    def source_dim(self) -> int:
        return omega(self.algebra, self.degree).dim

    def basis(self) -> list[Mat]:
        m, w = self.module.dim, self.source_dim
        return [_unvec(self.subspace.basis.take_rows([r]).T, m, w) for r in range(self.dim)]

    def to_map(self, coords: Mat) -> Mat:
        return _unvec(self.subspace.embedding @ coords, self.module.dim, self.source_dim)

    def coords(self, f: Mat) -> Mat:
        """Coordinates of a map (or of a horizontal stack of maps, one block per column)."""
        try:
            return self.subspace.coordinates(_vec(f))
        except ValueError as exc:
            raise CoordinateFailure(f"map is not right A-linear on Omega^{self.degree}") from exc

    def coords_many(self, fs: Sequence[Mat]) -> Mat:
        F = self.module.field
        if not fs:
            return Mat.zeros(F, self.dim, 0)
        cols = vstack([_vec(f).T for f in fs], F, self.module.dim * self.source_dim).T
        try:
            return self.subspace.coordinates(cols)
        except ValueError as exc:
            raise CoordinateFailure(f"map is not right A-linear on Omega^{self.degree}") from exc


def hom_space(M: ModuleRep, k: int) -> HomSpace:
    if M.right is None:
        raise ValueError("hom-spaces need a right module")
    A = M.algebra
    W = omega(A, k)
    m, w = M.dim, W.dim
    Im, Iw = M.identity(), Mat.eye(A.field, w)
    # f W.right[i] = R_i f, row-major vec: vec(X B) = (I (x) B^T) vec X, vec(B X) = (B (x) I) vec X
    eqs = [kron(Im, Wr.T) - kron(R, Iw) for Wr, R in zip(W.right, M.right)]
    if not eqs or m * w == 0:
        sub = Subspace.zero(A.field, m * w)
    else:
        sub = kernel(vstack(eqs, A.field, m * w))
    return HomSpace(M, k, sub)


def expected_h1_dim(M: ModuleRep) -> int:
    """``Omega^1 = Abar (x) A`` as right modules gives ``(n - 1) dim M``."""
    return (M.algebra.dim - 1) * M.dim


@dataclass
class HomContext:
    """Spaces and action matrices shared by every hom-connection on ``M``."""

    module: ModuleRep
    h1: HomSpace
    h2: HomSpace
    right_h1: tuple[Mat, ...]  # (f a)(w) = f(a w)
    right_h2: tuple[Mat, ...]
    df: tuple[Mat, ...]  # column b: f_b(d a_i)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def algebra(self) -> Algebra:
        return self.module.algebra


def hom_context(M: ModuleRep) -> HomContext:
    A = M.algebra
    h1, h2 = hom_space(M, 1), hom_space(M, 2)
    W1, W2 = omega(A, 1), omega(A, 2)
    b1, b2 = h1.basis(), h2.basis()
    r1 = tuple(h1.coords_many([f @ L for f in b1]) for L in W1.left)
    r2 = tuple(h2.coords_many([f @ L for f in b2]) for L in W2.left)
    d0 = differential_matrix(A, 0)
    F = A.field
    df = tuple(
        _hstack_cols([f @ d0 @ A.basis(i) for f in b1], F, M.dim) for i in range(A.dim)
    )
    return HomContext(M, h1, h2, r1, r2, df)


def _hstack_cols(cols: list[Mat], F, rows: int) -> Mat:
    from .exactlin import hstack

    return hstack(cols, F, rows)


@dataclass(frozen=True, eq=False)
class HomConnection:
    context: HomContext
    matrix: Mat  # m x h1
    name: str = "hom-nabla"
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        ctx = self.context
        if self.matrix.shape != (ctx.module.dim, ctx.h1.dim):
            raise ValueError(f"hom-connection must be {(ctx.module.dim, ctx.h1.dim)}, got {self.matrix.shape}")

    @property
    def module(self) -> ModuleRep:
        return self.context.module

    @property
    def algebra(self) -> Algebra:
        return self.module.algebra

    def apply(self, f: Mat) -> Mat:
        """``nabla`` of a right-linear map given as an ``m x w_1`` matrix."""
        return self.matrix @ self.context.h1.coords(f)

    def memo(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def curvature(self) -> Mat:
        return self.memo("F", lambda: self.matrix @ nabla_1(self))

    def is_flat(self) -> bool:
        return self.curvature().is_zero()

    def left_action(self) -> tuple[Mat, ...]:
        return self.memo("left", lambda: induce_left_action(self))


def hom_con_residual(nab: HomConnection, i: int) -> Mat:
    """``nabla(f a_i) - nabla(f) a_i - f(d a_i)`` over the basis of ``H^1``."""
    ctx = nab.context
    return nab.matrix @ ctx.right_h1[i] - ctx.module.right[i] @ nab.matrix - ctx.df[i]


def check_hom_connection(nab: HomConnection) -> VerificationReport:
    rep = VerificationReport()
    for i in range(nab.algebra.dim):
        c = zero_check(f"hom-con[a{i}]", TAG_HOMCON, hom_con_residual(nab, i))
        if c.witness is not None:
            c.witness["a"] = i
        rep.add(c)
    return rep


@dataclass
class HomConnectionFamily:
    particular: HomConnection
    directions: list[Mat]

    @property
    def dimension(self) -> int:
        return len(self.directions)

    def member(self, coeffs: Sequence) -> HomConnection:
        mat = self.particular.matrix
        for c, d in zip(coeffs, self.directions):
            if c:
                mat = mat + d.scale(c)
        return HomConnection(self.particular.context, mat, name="family member")


def solve_hom_connections(M: ModuleRep, ctx: HomContext | None = None) -> HomConnectionFamily | None:
    ctx = hom_context(M) if ctx is None else ctx
    A = M.algebra
    m, h = M.dim, ctx.h1.dim
    F = A.field
    if m * h == 0:
        return HomConnectionFamily(HomConnection(ctx, Mat.zeros(F, m, h), name="zero"), [])
    Im, Ih = M.identity(), Mat.eye(F, h)
    blocks = [kron(Im, ctx.right_h1[i].T) - kron(M.right[i], Ih) for i in range(A.dim)]
    rhs = [_vec(ctx.df[i]) for i in range(A.dim)]
    sol = solve_affine(vstack(blocks, F, m * h), vstack(rhs, F, 1))
    if sol is None:
        return None
    part, hom = sol
    dirs = [_unvec(hom.basis.take_rows([r]).T, m, h) for r in range(hom.dim)]
    return HomConnectionFamily(HomConnection(ctx, _unvec(part, m, h), name="solver particular"), dirs)


# -- the Omega-action, nabla_1 and curvature --------------------------------------------

def left_mult_into_omega2(A: Algebra, s: int) -> Mat:
    """``Omega^1 -> Omega^2``, ``w' -> w_s w'`` for the basis form ``w_s``."""
    W1 = omega(A, 1)
    return product_matrix(A, 1, 1) @ kron(Mat.unit_column(A.field, W1.dim, s), Mat.eye(A.field, W1.dim))


def nabla_1(nab: HomConnection) -> Mat:
    """``nabla_1(f)(w) = nabla(f w) + f(dw)`` as an ``h_1 x h_2`` matrix."""
    ctx = nab.context
    A = nab.algebra
    W1 = omega(A, 1)
    d1 = differential_matrix(A, 1)
    P = [left_mult_into_omega2(A, s) for s in range(W1.dim)]
    images = []
    for f in ctx.h2.basis():
        # column s of the image map is its value on the basis form w_s
        acted = ctx.h1.coords_many([f @ Ps for Ps in P])  # h1 x w1
        g = nab.matrix @ acted + f @ d1
        images.append(g)
    return ctx.h1.coords_many(images)


def curvature(nab: HomConnection) -> Mat:
    return nab.curvature()


# -- phi maps ------------------------------------------------------------------------------

def phi_operator(M: ModuleRep, a: Mat) -> Mat:
    """``m -> phi_{m,a}`` as a map ``M -> Hom_K(Omega^1, M)``; returns blocks ``m x w_1`` per basis ``m``.

    Stored as an ``(m * w_1) x m`` matrix of row-major vecs.
    """
    A = M.algebra
    E = omega(A, 1).embedding
    n = A.dim
    Ra = M.right_of(a)
    cols = []
    for j in range(M.dim):
        e = M.basis(j)
        # ambient basis x_p (x) y_q -> e x_p a y_q = R_q R_a R_p e
        amb = [M.right[q] @ Ra @ M.right[p] @ e for p in range(n) for q in range(n)]
        mat = _hstack_cols(amb, A.field, M.dim) @ E
        cols.append(_vec(mat))
    return _hstack_cols(cols, A.field, M.dim * E.cols)


def phi(M: ModuleRep, m: Mat, a: Mat) -> Mat:
    """``phi_{m,a}`` as an ``dim M x w_1`` matrix."""
    A = M.algebra
    w = omega(A, 1).dim
    return _unvec(phi_operator(M, a) @ m, M.dim, w)


def phi2(M: ModuleRep, m: Mat, a: Mat, b: Mat) -> Mat:
    """``phi_{m,a,b}: x (x) y (x) z -> m x a y b z`` restricted to ``Omega^2``."""
    A = M.algebra
    E = omega(A, 2).embedding
    n = A.dim
    Ra, Rb = M.right_of(a), M.right_of(b)
    amb = [M.right[r] @ Rb @ M.right[q] @ Ra @ M.right[p] @ m for p in range(n) for q in range(n) for r in range(n)]
    return _hstack_cols(amb, A.field, M.dim) @ E


def phi_coords(ctx: HomContext, a: Mat) -> Mat:
    """``m -> coords of phi_{m,a}`` in ``H^1``, an ``h_1 x m`` matrix."""
    key = ("phi", tuple(map(str, a.flat_list())))
    if key not in ctx._cache:
        op = phi_operator(ctx.module, a)
        try:
            ctx._cache[key] = ctx.h1.subspace.coordinates(op)
        except ValueError as exc:
            raise CoordinateFailure("phi_{m,a} is not right A-linear") from exc
    return ctx._cache[key]


# -- Proposition: induced left action ---------------------------------------------------------

def induce_left_action(nab: HomConnection) -> tuple[Mat, ...]:
    """``a m := m a + nabla(phi_{m,a})``."""
    ctx = nab.context
    A = nab.algebra
    return tuple(ctx.module.right[i] + nab.matrix @ phi_coords(ctx, A.basis(i)) for i in range(A.dim))


def verify_prop_31(nab: HomConnection) -> VerificationReport:
    A, M = nab.algebra, nab.module
    L = nab.left_action()
    rep = VerificationReport()
    unit = Mat.zeros(M.field, M.dim, M.dim)
    for j in range(A.dim):
        c = A.unit[j, 0]
        if c != 0:
            unit = unit + L[j].scale(c)
    rep.add(compare("left_unital", TAG_LACT + " unital", unit, M.identity()))
    for i in range(A.dim):
        for j in range(A.dim):
            prod = A.left_mult[i].col(j)
            rhs = Mat.zeros(M.field, M.dim, M.dim)
            for k in range(A.dim):
                c = prod[k, 0]
                if c != 0:
                    rhs = rhs + L[k].scale(c)
            chk = compare(f"left_assoc[a{i},a{j}]", TAG_LACT + " associative", L[i] @ L[j], rhs)
            if chk.witness is not None:
                chk.witness["triple"] = [i, j, chk.witness["column"]]
            rep.add(chk)
    for i in range(A.dim):
        for j in range(A.dim):
            chk = compare(f"compat[a{i},a{j}]", TAG_LACT + " bimodule", M.right[j] @ L[i], L[i] @ M.right[j])
            if chk.witness is not None:
                chk.witness["triple"] = [i, chk.witness["column"], j]
            rep.add(chk)
    return rep


def verify_phi_identities(ctx: HomContext) -> VerificationReport:
    """``phi_{m,1} = 0``, ``phi_{m,a}(db) = mab - mba`` and ``phi_{m,a} b = phi_{mb,a}``."""
    A, M = ctx.algebra, ctx.module
    rep = VerificationReport()
    d0 = differential_matrix(A, 0)
    rep.add(zero_check("phi[m,1]=0", TAG_PHIID, phi_coords(ctx, A.one())))
    for i in range(A.dim):
        a = A.basis(i)
        P = phi_coords(ctx, a)
        for j in range(A.dim):
            b = A.basis(j)
            # phi_{m,a}(db) over all basis m
            lhs = _hstack_cols([phi(M, M.basis(k), a) @ d0 @ b for k in range(M.dim)], A.field, M.dim)
            rhs = M.right[j] @ M.right[i] - M.right[i] @ M.right[j]
            rep.add(compare(f"phi[m,a{i}](da{j})", TAG_PHIID, lhs, rhs))
            rep.add(compare(f"phi[m,a{i}]a{j}=phi[ma{j},a{i}]", TAG_PHIID, ctx.right_h1[j] @ P, P @ M.right[j]))
    return rep


def verify_hom_identities(nab: HomConnection) -> VerificationReport:
    """The phi-level identities; (hom-flat) is skipped unless the connection is flat."""
    ctx = nab.context
    A, M = nab.algebra, nab.module
    N = nab.matrix
    rep = VerificationReport()
    W1 = omega(A, 1)
    d1 = differential_matrix(A, 1)
    phis = [phi_coords(ctx, A.basis(i)) for i in range(A.dim)]
    nphi = [N @ P for P in phis]  # m -> nabla(phi_{m,a_i})
    R = M.right
    n = A.dim

    def combo(ops: Sequence[Mat], coeffs: Mat) -> Mat:
        out = Mat.zeros(M.field, ops[0].rows, ops[0].cols)
        for k in range(n):
            c = coeffs[k, 0]
            if c != 0:
                out = out + ops[k].scale(c)
        return out

    for i in range(n):
        for j in range(n):
            # (hom-con-phi-0): nabla(phi_{m a_i, a_j}) = nabla(phi_{m,a_j}) a_i + m a_j a_i - m a_i a_j
            lhs = nphi[j] @ R[i]
            rhs = R[i] @ nphi[j] + R[i] @ R[j] - R[j] @ R[i]
            rep.add(compare(f"hom-con-phi-0[a{i},a{j}]", TAG_PHI0, lhs, rhs))
    nabla1 = nabla_1(nab)
    # phi_{m,a} for basis a and basis m; other a by linearity
    phi_all = [[phi(M, M.basis(k), A.basis(i)) for k in range(M.dim)] for i in range(n)]

    def phi_at(x: Mat, ws: Mat) -> Mat:
        """``m -> phi_{m,x}(w)`` over basis ``m``."""
        out = Mat.zeros(M.field, M.dim, M.dim)
        for i in range(n):
            c = x[i, 0]
            if c != 0:
                out = out + _hstack_cols([f @ ws for f in phi_all[i]], A.field, M.dim).scale(c)
        return out

    P = [left_mult_into_omega2(A, s) for s in range(W1.dim)]
    for ia in range(n):
        a = A.basis(ia)
        for ib in range(n):
            b = A.basis(ib)
            ab = A.mul(a, b)
            Q = [phi2(M, M.basis(k), a, b) for k in range(M.dim)]
            Qd = [q @ d1 for q in Q]
            acted = ctx.h1.coords_many([q @ Ps for Ps in P for q in Q])
            for s in range(W1.dim):
                ws = Mat.unit_column(A.field, W1.dim, s)
                pa_ws = phi_at(a, ws)
                # (phi.act): phi_{m,a,b} w_s = phi_{phi_{m,a}(w_s), b}
                lhs = acted.take_cols(range(s * M.dim, (s + 1) * M.dim))
                rhs = phis[ib] @ pa_ws
                rep.add(compare(f"phi.act[a{ia},a{ib},w{s}]", TAG_PHIACT, lhs, rhs))
                # (phi.d): phi_{m,a,b}(d w_s) = phi_{ma,b}(w_s) - phi_{m,ab}(w_s) + phi_{m,a}(w_s) b
                lhs = _hstack_cols([q.col(s) for q in Qd], A.field, M.dim)
                rhs = phi_at(b, ws) @ R[ia] - phi_at(ab, ws) + R[ib] @ pa_ws
                rep.add(compare(f"phi.d[a{ia},a{ib},w{s}]", TAG_PHID, lhs, rhs))
                # (hom-con-phi): nabla(phi_{phi_{m,a}(w),b}) = phi_{nabla(phi_{m,b}),a}(w) + phi_{mb,a}(w) - phi_{m,a}(w) b
                lhs = nphi[ib] @ pa_ws
                rhs = pa_ws @ nphi[ib] + pa_ws @ R[ib] - R[ib] @ pa_ws
                rep.add(compare(f"hom-con-phi[a{ia},a{ib},w{s}]", TAG_PHI, lhs, rhs))
            # nabla_1(phi_{m,a,b}) = phi_{nabla(phi_{m,b}),a} + phi_{mb,a} + phi_{ma,b} - phi_{m,ab}
            p2 = ctx.h2.coords_many(Q)
            lhs = nabla1 @ p2
            pab = phi_coords(ctx, ab)
            rhs = phis[ia] @ nphi[ib] + phis[ia] @ R[ib] + phis[ib] @ R[ia] - pab
            rep.add(compare(f"nabla_1(phi[m,a{ia},a{ib}])", TAG_NABLA1, lhs, rhs))
    F = nab.curvature()
    for i in range(n):
        rep.add(compare(f"curvature_right_linear[a{i}]", "curvature", F @ ctx.right_h2[i], R[i] @ F))
    if nab.is_flat():
        for ia in range(n):
            for ib in range(n):
                ab = A.mul(A.basis(ia), A.basis(ib))
                # nabla(phi_{nabla(phi_{m,b}), a}) = nabla(phi_{m,ab}) - nabla(phi_{mb,a}) - nabla(phi_{ma,b})
                lhs = nphi[ia] @ nphi[ib]
                rhs = N @ phi_coords(ctx, ab) - nphi[ia] @ R[ib] - nphi[ib] @ R[ia]
                rep.add(compare(f"hom-flat[a{ia},a{ib}]", TAG_HOMFLAT, lhs, rhs))
    else:
        rep.skip("hom-flat", TAG_HOMFLAT, "connection is not flat")
    return rep


# -- left universal symbol ----------------------------------------------------------------------

def h1_left_action(nab: HomConnection) -> tuple[Mat, ...]:
    """``(a f)(w) = a f(w)`` using the induced left action on ``M``."""
    ctx = nab.context
    L = nab.left_action()
    b1 = ctx.h1.basis()
    return tuple(ctx.h1.coords_many([La @ f for f in b1]) for La in L)


@dataclass
class LeftSymbol:
    matrix: Mat  # quotient coordinates of Omega^1 (x)_A H^1 -> M
    lift: Mat  # Omega^1 (x) H^1 (subspace coords) -> M
    tensor: object


def left_symbol_lift(nab: HomConnection, Lh: Sequence[Mat]) -> Mat:
    """``x (x) y (x) f -> x (nabla(y f) - y nabla(f))`` on ``A (x) A (x) H^1``."""
    A = nab.algebra
    L = nab.left_action()
    n = A.dim
    blocks = []
    for p in range(n):
        for q in range(n):
            blocks.append(L[p] @ (nab.matrix @ Lh[q] - L[q] @ nab.matrix))
    return _hstack_cols(blocks, A.field, nab.module.dim)


def left_symbol(nab: HomConnection, check_flat: bool = True) -> LeftSymbol:
    if check_flat and not nab.is_flat():
        raise NotFlat("left symbol needs a flat hom-connection")
    A = nab.algebra
    Lh = h1_left_action(nab)
    W1 = omega(A, 1)
    h = nab.context.h1.dim
    H1mod = ModuleRep(A, h, tuple(Lh), None, name="H^1")
    T = tensor_over_A(W1.module("right"), H1mod, name="Omega^1(x)_AH^1")
    lift = left_symbol_lift(nab, Lh) @ kron(W1.embedding, Mat.eye(A.field, h))
    rel = T.quotient.relations
    if rel.dim:
        leak = lift @ rel.embedding
        if not leak.is_zero():
            raise DescentFailure("left symbol", witness_from_diff(leak))
    return LeftSymbol(lift @ T.section, lift, T)


def verify_symbol(nab: HomConnection) -> VerificationReport:
    """First-order property, descent, and ``sigma_L(b dc (x) phi_{m,a}) = b[a,c] m``."""
    A, M = nab.algebra, nab.module
    ctx = nab.context
    rep = VerificationReport()
    L = nab.left_action()
    Lh = h1_left_action(nab)
    for i in range(A.dim):
        op = nab.matrix @ ctx.right_h1[i] - M.right[i] @ nab.matrix
        for j in range(A.dim):
            rep.add(compare(f"first_order[a{i},a{j}]", TAG_SYMBOL, op @ Lh[j], L[j] @ op))
    try:
        sym = left_symbol(nab, check_flat=False)
    except DescentFailure as exc:
        rep.add(Check("symbol_descends", TAG_SYMBOL, FAIL, exc.witness))
        return rep
    rep.add(Check("symbol_descends", TAG_SYMBOL, PASS))
    W1 = omega(A, 1)
    d0 = differential_matrix(A, 0)
    h = ctx.h1.dim

    def left_of(a: Mat) -> Mat:
        out = Mat.zeros(M.field, M.dim, M.dim)
        for k in range(A.dim):
            c = a[k, 0]
            if c != 0:
                out = out + L[k].scale(c)
        return out

    for ib, ic, ia in iproduct(range(A.dim), repeat=3):
        b, c, a = A.basis(ib), A.basis(ic), A.basis(ia)
        bdc = W1.left[ib] @ d0 @ c  # b dc in Omega^1 coordinates
        P = phi_coords(ctx, a)  # h x m
        lhs = sym.lift @ kron(bdc, P)
        rhs = left_of(b) @ left_of(A.commutator(a, c))
        rep.add(compare(f"symbol[b=a{ib},c=a{ic},a=a{ia}]", TAG_SYMBOL, lhs, rhs))
    return rep


# -- witnesses ----------------------------------------------------------------------------------

def dual_hom_connection(conn: Connection, ctx: HomContext | None = None) -> HomConnection:
    """Hom-connection on ``N*`` from a connection on ``N``: ``nabla(f) = sum_i B_i^T f(d a_i)``.

    ``f(d a_i)`` lies in ``N*`` and ``B_i`` are the blocks of ``nabla_N``.
    """
    N = conn.module
    A = conn.algebra
    dual = ModuleRep(A, N.dim, None, tuple(L.T for L in N.left), name=f"{N.name}*")
    ctx = hom_context(dual) if ctx is None else ctx
    d0 = differential_matrix(A, 0)
    F = A.field
    h = ctx.h1.dim
    mat = Mat.zeros(F, N.dim, h)
    basis = ctx.h1.basis()
    for i, B in enumerate(conn.blocks()):
        vals = _hstack_cols([f @ d0 @ A.basis(i) for f in basis], F, N.dim) if h else Mat.zeros(F, N.dim, 0)
        mat = mat + B.T @ vals
    return HomConnection(ctx, mat, name=f"dual of {conn.name}")


@dataclass
class SweepResult:
    module: ModuleRep
    family_dimension: int | None
    tried: int
    flat: list[HomConnection]
    nonflat: list[HomConnection]


def _grid(dim: int, values: Sequence[int], limit: int) -> Iterator[tuple[int, ...]]:
    count = 0
    for t in iproduct(values, repeat=dim):
        yield t
        count += 1
        if count >= limit:
            return


def sweep_flat(M: ModuleRep, budget: int = 200, seed: int = 0, keep: int = 3) -> SweepResult:
    """Search the affine family for flat members: a small grid first, then random draws."""
    ctx = hom_context(M)
    fam = solve_hom_connections(M, ctx)
    if fam is None:
        return SweepResult(M, None, 0, [], [])
    flats, nonflats = [], []
    tried = 0
    seen = set()

    def consider(coeffs):
        nonlocal tried
        key = tuple(coeffs)
        if key in seen:
            return
        seen.add(key)
        tried += 1
        nab = fam.member(coeffs)
        (flats if nab.is_flat() else nonflats).append(nab)

    if fam.dimension == 0:
        consider(())
    else:
        for coeffs in _grid(fam.dimension, (0, 1, -1), budget // 2):
            consider(coeffs)
            if len(flats) >= keep:
                break
        rng = rng_for(seed)
        draws = 0
        while draws < budget and tried < budget and len(flats) < keep:
            draws += 1
            consider(tuple(random_scalars(M.field, rng, fam.dimension)))
    return SweepResult(M, fam.dimension, tried, flats[:keep], nonflats[:keep])


def nonflat_hom_associativity_witness(M: ModuleRep, budget: int = 200, seed: int = 0):
    """A hom-connection whose induced left action is not associative, with the failing check."""
    ctx = hom_context(M)
    fam = solve_hom_connections(M, ctx)
    if fam is None or fam.dimension == 0:
        return None
    rng = rng_for(seed)
    for _ in range(budget):
        nab = fam.member(random_scalars(M.field, rng, fam.dimension))
        if nab.is_flat():
            continue
        rep = verify_prop_31(nab)
        fails = [c for c in rep.failures if c.id.startswith("left_assoc")]
        if fails:
            return nab, fails[0]
    return None

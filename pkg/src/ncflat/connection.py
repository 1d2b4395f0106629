"""Connections ``M -> A (x) M`` for the universal calculus.

A connection on a left module ``M`` is stored as the ``(n*m) x m`` matrix of
``m -> sum m_A (x) m_M`` into ``A (x) M``; its image must lie in the kernel
of the action ``A (x) M -> M``, which is how ``Omega^1 (x)_A M`` is realized.
Row index ``i*m + k`` stands for ``a_i (x) m_k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import Algebra, ModuleRep, free_module, regular_module
from .calculus import contraction_matrix, differential_matrix, omega
from .config import degree_cap
from .errors import DegreeCapExceeded, NotAConnection, NotFlat, RetryExhausted
from .exactlin import Mat, hstack, inverse, kron, kron_all, rank, solve_affine, vstack
from .report import FAIL, Check, VerificationReport, compare, zero_check

TAG_CON1 = "con1"
TAG_CON2 = "con2 (Leibniz)"
TAG_FLAT = "flat"
TAG_ACT = "act"


@dataclass(frozen=True, eq=False)
class Connection:
    module: ModuleRep
    matrix: Mat
    name: str = "nabla"
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        n, m = self.algebra.dim, self.module.dim
        if self.module.left is None:
            raise NotAConnection("connections need a left module")
        if self.matrix.shape != (n * m, m):
            raise ValueError(f"connection matrix must be {(n * m, m)}, got {self.matrix.shape}")

    @property
    def algebra(self) -> Algebra:
        return self.module.algebra

    @property
    def field(self):
        return self.module.field

    def blocks(self) -> list[Mat]:
        """``nabla(m) = sum_i a_i (x) B_i m``."""
        m = self.module.dim
        return [self.matrix[i * m : (i + 1) * m, :] for i in range(self.algebra.dim)]

    def __call__(self, v: Mat) -> Mat:
        return self.matrix @ v

    def memo(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def right_action(self) -> tuple[Mat, ...]:
        return self.memo("right", lambda: induce_right_action(self))

    def bimodule(self) -> ModuleRep:
        """The module with the induced right action installed (validated)."""
        return self.memo("bimodule", lambda: self.module.with_right(self.right_action()))

    def is_flat(self) -> bool:
        return self.memo("flat", lambda: flatness(self).is_flat)


def ensure_flat(conn: Connection) -> None:
    if not conn.is_flat():
        raise NotFlat(f"connection {conn.name} on {conn.module.name} is not flat")


# -- the defining identities ---------------------------------------------------

def con1_residual(conn: Connection) -> Mat:
    return contraction_matrix(conn.module) @ conn.matrix


def con2_residual(conn: Connection, i: int) -> Mat:
    """``nabla(a_i m) - a_i nabla(m) - 1 (x) a_i m + a_i (x) m`` over all basis ``m``."""
    A, M = conn.algebra, conn.module
    Im = M.identity()
    return (
        conn.matrix @ M.left[i]
        - kron(A.left_mult[i], Im) @ conn.matrix
        - kron(A.unit, M.left[i])
        + kron(A.basis(i), Im)
    )


def check_connection(conn: Connection) -> VerificationReport:
    rep = VerificationReport()
    rep.add(zero_check("con1", TAG_CON1, con1_residual(conn), detail="image of nabla is killed by the action"))
    for i in range(conn.algebra.dim):
        c = zero_check(f"con2[a{i}]", TAG_CON2, con2_residual(conn, i))
        if c.witness is not None:
            c.witness["a"] = i
        rep.add(c)
    return rep


def is_connection(conn: Connection) -> bool:
    return check_connection(conn).passed


@dataclass
class FlatnessReport:
    is_flat: bool
    residuals: Mat  # columns: residual(m_j) in A (x) A (x) M

    def witness(self):
        if self.is_flat:
            return None
        cols = np.flatnonzero(np.any(self.residuals.num != 0, axis=0))
        return int(cols[0])


def flatness_residual(conn: Connection) -> Mat:
    """``1 (x) nabla(m) - (id (x) nabla) nabla(m)`` for every basis ``m``."""
    A = conn.algebra
    return kron(A.unit, conn.matrix) - kron(A.identity(), conn.matrix) @ conn.matrix


def flatness(conn: Connection, require_connection: bool = True) -> FlatnessReport:
    if require_connection and not is_connection(conn):
        raise NotAConnection(f"{conn.name} fails the connection identities")
    res = flatness_residual(conn)
    return FlatnessReport(res.is_zero(), res)


# -- induced right action ------------------------------------------------------

def induce_right_action(conn: Connection) -> tuple[Mat, ...]:
    """``m a := a m - sum m_A a m_M`` for each basis ``a``."""
    A, M = conn.algebra, conn.module
    out = []
    for j in range(A.dim):
        # x (x) m -> (x a_j) m, with x running over the basis of A
        act = hstack([M.left_of(A.right_mult[j].col(i)) for i in range(A.dim)], M.field, M.dim)
        out.append(M.left[j] - act @ conn.matrix)
    return tuple(out)


def verify_lemma_21(conn: Connection, right: Sequence[Mat] | None = None) -> VerificationReport:
    """Unitality, associativity and compatibility of the induced right action.

    Witnesses are ``(m, a, b)`` basis index triples.  Runs on non-flat input
    too; associativity is then allowed to fail.
    """
    A, M = conn.algebra, conn.module
    R = tuple(right) if right is not None else induce_right_action(conn)
    rep = VerificationReport()
    unit_act = Mat.zeros(M.field, M.dim, M.dim)
    for j in range(A.dim):
        c = A.unit[j, 0]
        if c != 0:
            unit_act = unit_act + R[j].scale(c)
    rep.add(compare("right_unital", TAG_ACT + " unital", unit_act, M.identity()))
    for i in range(A.dim):
        for j in range(A.dim):
            # (m a_i) a_j = m (a_i a_j)
            prod = A.left_mult[i].col(j)
            rhs = Mat.zeros(M.field, M.dim, M.dim)
            for k in range(A.dim):
                c = prod[k, 0]
                if c != 0:
                    rhs = rhs + R[k].scale(c)
            chk = compare(f"right_assoc[a{i},a{j}]", TAG_ACT + " associative", R[j] @ R[i], rhs)
            if chk.witness is not None:
                chk.witness["triple"] = [chk.witness["column"], i, j]
            rep.add(chk)
    for i in range(A.dim):
        for j in range(A.dim):
            # (a_i m) a_j = a_i (m a_j)
            chk = compare(f"compat[a{i},a{j}]", TAG_ACT + " bimodule", R[j] @ M.left[i], M.left[i] @ R[j])
            if chk.witness is not None:
                chk.witness["triple"] = [i, chk.witness["column"], j]
            rep.add(chk)
    return rep


# -- standard connections --------------------------------------------------------

def universal_d(A: Algebra) -> Connection:
    """``(A, d)``: the left regular module with ``a -> 1 (x) a - a (x) 1``."""
    return connection_on_omega(A, 0)


def connection_on_omega(A: Algebra, k: int) -> Connection:
    """``d: Omega^k -> Omega^{k+1}``, read inside ``A (x) Omega^k`` by splitting off the first leg."""
    cap = degree_cap()
    if k + 1 > cap:
        raise DegreeCapExceeded(k + 1, cap)

    def build():
        src, dst = omega(A, k), omega(A, k + 1)
        amb = dst.embedding @ differential_matrix(A, k)  # in A^{(x)(k+2)}
        sel = kron(A.identity(), Mat.eye(A.field, A.dim ** (k + 1)).take_rows(src.subspace.pivots))
        nab = sel @ amb
        if kron(A.identity(), src.embedding) @ nab != amb:
            raise NotAConnection(f"d(Omega^{k}) does not split as A (x) Omega^{k}")
        return Connection(src.module("left"), nab, name=f"d on Omega^{k}")

    return A.cached(("omega_connection", k), build)


def d_tensor_id(A: Algebra, v_dim: int) -> Connection:
    """``d (x) id`` on the free module ``A (x) K^v``."""
    M = free_module(A, v_dim)
    d0 = universal_d(A).matrix
    return Connection(M, kron(d0, Mat.eye(A.field, v_dim)), name="d(x)id")


# -- solver and generators -----------------------------------------------------------

def connection_system(M: ModuleRep) -> tuple[Mat, Mat]:
    """Affine system ``coeff @ vec(nabla) = rhs`` (row-major vec) for both identities."""
    A = M.algebra
    n, m = A.dim, M.dim
    Im = M.identity()
    Inm = Mat.eye(M.field, n * m)
    C = contraction_matrix(M)
    blocks = [kron(C, Im)]
    rhs = [Mat.zeros(M.field, m * m, 1)]
    for i in range(n):
        blocks.append(kron(Inm, M.left[i].T) - kron(kron(A.left_mult[i], Im), Im))
        r = kron(A.unit, M.left[i]) - kron(A.basis(i), Im)
        rhs.append(_vec(r))
    return vstack(blocks, M.field, n * m * m), vstack(rhs, M.field, 1)


def _vec(x: Mat) -> Mat:
    return Mat(x.field, x.num.reshape(-1, 1).copy(), x.den)


def _unvec(v: Mat, rows: int, cols: int) -> Mat:
    return Mat(v.field, v.num.reshape(rows, cols).copy(), v.den)


@dataclass
class ConnectionFamily:
    particular: Connection
    directions: list[Mat]  # left-linear maps M -> Omega^1 (x)_A M

    @property
    def dimension(self) -> int:
        return len(self.directions)

    def member(self, coeffs: Sequence) -> Connection:
        mat = self.particular.matrix
        for c, d in zip(coeffs, self.directions):
            if c:
                mat = mat + d.scale(c)
        return Connection(self.particular.module, mat, name="family member")


def solve_connections(M: ModuleRep) -> ConnectionFamily | None:
    """All connections on ``M`` as an affine family, or ``None`` when there are none."""
    A = M.algebra
    n, m = A.dim, M.dim
    coeff, rhs = connection_system(M)
    sol = solve_affine(coeff, rhs)
    if sol is None:
        return None
    part, hom = sol
    dirs = [_unvec(hom.basis.take_rows([r]).T, n * m, m) for r in range(hom.dim)]
    return ConnectionFamily(Connection(M, _unvec(part, n * m, m), name="solver particular"), dirs)


def left_linear_maps_to_forms(M: ModuleRep) -> list[Mat]:
    """Basis of left ``A``-linear maps ``M -> Omega^1 (x)_A M`` (the homogeneous system)."""
    A = M.algebra
    n, m = A.dim, M.dim
    coeff, _ = connection_system(M)
    from .exactlin import kernel

    hom = kernel(coeff)
    return [_unvec(hom.basis.take_rows([r]).T, n * m, m) for r in range(hom.dim)]


def rng_for(seed: int) -> np.random.Generator:
    """Seeded PCG64 stream; all random instances derive from this."""
    return np.random.Generator(np.random.PCG64(seed))


def random_scalars(field, rng: np.random.Generator, size: int) -> list[int]:
    if field.is_rational:
        return [int(x) for x in rng.integers(-3, 4, size=size)]
    return [int(x) for x in rng.integers(0, field.p, size=size)]


def random_left_automorphism(A: Algebra, v_dim: int, rng: np.random.Generator, max_tries: int = 100) -> Mat:
    """Invertible left ``A``-linear map of ``A (x) K^v`` (images of ``1 (x) e_k`` drawn at random)."""
    n = A.dim
    Iv = Mat.eye(A.field, v_dim)
    lifts = [kron(L, Iv) for L in A.left_mult]
    for _ in range(max_tries):
        w = [Mat.column(A.field, random_scalars(A.field, rng, n * v_dim)) for _ in range(v_dim)]
        cols = [lifts[j] @ w[k] for j in range(n) for k in range(v_dim)]
        phi = hstack(cols, A.field, n * v_dim)
        if rank(phi) == n * v_dim:
            return phi
    raise RetryExhausted(f"no invertible automorphism after {max_tries} draws")


def transport(conn: Connection, phi: Mat, phi_inv: Mat | None = None) -> Connection:
    """``(id (x) phi) o nabla o phi^-1`` for a left-linear automorphism ``phi``."""
    A = conn.algebra
    phi_inv = inverse(phi) if phi_inv is None else phi_inv
    mat = kron(A.identity(), phi) @ conn.matrix @ phi_inv
    return Connection(conn.module, mat, name=f"transported {conn.name}")


def random_flat_connection(A: Algebra, v_dim: int, seed: int) -> tuple[ModuleRep, Connection]:
    """Flat connection on ``A (x) K^v`` obtained by transporting ``d (x) id``."""
    if v_dim < 1:
        raise ValueError("v_dim must be at least 1")
    rng = rng_for(seed)
    base = d_tensor_id(A, v_dim)
    phi = random_left_automorphism(A, v_dim, rng)
    conn = transport(base, phi)
    conn = Connection(base.module, conn.matrix, name=f"random flat (seed {seed})")
    return base.module, conn


def perturb(conn: Connection, seed: int, max_tries: int = 50, require_nonflat: bool = True) -> Connection:
    """Add a random nonzero left-linear map ``M -> Omega^1 (x)_A M``.

    The result still satisfies both connection identities.  With
    ``require_nonflat`` the draw is repeated until flatness breaks.
    """
    dirs = left_linear_maps_to_forms(conn.module)
    if not dirs:
        raise RetryExhausted("no left-linear maps into Omega^1 (x)_A M to perturb with")
    rng = rng_for(seed)
    for _ in range(max_tries):
        coeffs = random_scalars(conn.field, rng, len(dirs))
        if not any(coeffs):
            continue
        mat = conn.matrix
        for c, d in zip(coeffs, dirs):
            if c:
                mat = mat + d.scale(c)
        out = Connection(conn.module, mat, name=f"perturbed {conn.name} (seed {seed})")
        if not require_nonflat or not flatness(out, require_connection=False).is_flat:
            return out
    raise RetryExhausted("every perturbation stayed flat")


def nonflat_associativity_witness(A: Algebra, seeds: Sequence[int] = range(200), v_dims: Sequence[int] = (1, 2)):
    """Search perturbed connections until the induced right action is non-associative.

    Returns ``(connection, failing check)`` or ``None``.
    """
    for v in v_dims:
        base = universal_d(A) if v == 1 else d_tensor_id(A, v)
        if not left_linear_maps_to_forms(base.module):
            continue
        for s in seeds:
            try:
                bad = perturb(base, s)
            except RetryExhausted:
                break
            rep = verify_lemma_21(bad)
            fails = [c for c in rep.checks if c.status == FAIL and c.id.startswith("right_assoc")]
            if fails:
                return bad, fails[0]
    return None


def regular_connection_module(A: Algebra) -> ModuleRep:
    return regular_module(A, "left")


def associativity_pairing(A: Algebra, a: int, b: int) -> Mat:
    """``x (x) y (x) z -> x a_a y a_b z`` as a map ``A^{(x)3} -> A``.

    Tensored with the action on ``M`` it carries the flatness residual to
    minus the associativity defect of the induced right action.
    """
    return A.mu @ kron(A.mu @ kron(A.right_mult[a], A.identity()), A.identity()) @ kron_all(
        A.identity(), A.right_mult[b], A.identity()
    )


def associativity_defect_possible(A: Algebra) -> bool:
    """False when every connection, flat or not, induces an associative right action.

    That happens exactly when all pairings above vanish on ``Omega^2``
    (commutative algebras, upper triangular matrices, ...).
    """
    W = omega(A, 2).embedding
    return any(
        not (associativity_pairing(A, a, b) @ W).is_zero() for a in range(A.dim) for b in range(A.dim)
    )

"""The flat connection on ``A (x) A`` with the outer left action and its DGA.

The connection ``a (x) b -> 1(x)a(x)b - a(x)1(x)b + a(x)b(x)1 - ab(x)1(x)1``
induces the right action ``(a (x) b) c = ac (x) b + a[b, c] (x) 1``.  With an
idempotent ``e`` the coring ``A (x) A`` yields a DGA whose degree ``n`` part is
``A^{(x)(n+1)}``; its product and differential are built here as matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .algebra import Algebra, ModuleRep, TensorOverA, tensor_aa, tensor_over_A
from .calculus import eye_pow, insert_unit
from .config import degree_cap
from .connection import Connection, connection_system, d_tensor_id, rng_for, random_scalars, flatness
from .errors import DegreeCapExceeded, NotIdempotent
from .exactlin import GF, Mat, hstack, kron, kron_all, solve_affine, vstack
from .report import Check, FAIL, PASS, VerificationReport, compare, zero_check

TAG_ACT_UNIV = "act.univ"
TAG_DELTA = "delta"
TAG_PSI = "psi"
TAG_DGA = "dga"
TAG_ACT = "act"


# -- tensor leg bookkeeping ---------------------------------------------------------

def leg_permutation(A: Algebra, order: Sequence[int]) -> Mat:
    """``A^{(x)L} -> A^{(x)L}`` whose output leg ``t`` is input leg ``order[t]``."""
    n, L = A.dim, len(order)
    if sorted(order) != list(range(L)):
        raise ValueError("order must be a permutation")
    size = n**L
    idx = np.arange(size)
    digits = [(idx // n ** (L - 1 - t)) % n for t in range(L)]  # input digits, leg t
    out = np.zeros(size, dtype=np.int64)
    for t, src in enumerate(order):
        out = out * n + digits[src]
    P = np.zeros((size, size), dtype=np.int64)
    P[out, idx] = 1
    return Mat(A.field, P, 1, _normalized=True)


def bracket(A: Algebra) -> Mat:
    """``x (x) y -> [x, y]`` as an ``n x n^2`` matrix."""
    return A.mu - A.mu @ leg_permutation(A, [1, 0])


def nested_bracket(A: Algebra, depth: int) -> Mat:
    """``x_1 (x) ... (x) x_depth (x) b -> [x_1, [x_2, ... [x_depth, b]...]]``."""
    out = A.identity()
    br = bracket(A)
    for _ in range(depth):
        out = br @ kron(A.identity(), out)
    return out


def psi_matrix(A: Algebra, n: int) -> Mat:
    """``psi(a_0, ..., a_n; b)`` as a map ``A^{(x)(n+1)} (x) A -> A^{(x)(n+1)}`` (``2^n`` terms)."""
    def build():
        total = Mat.zeros(A.field, A.dim ** (n + 1), A.dim ** (n + 2))
        for terms in psi_terms(n):
            total = total + _psi_term(A, n, terms)
        return total

    return A.cached(("psi", n), build)


def psi_terms(n: int) -> list[tuple[int, ...]]:
    """Index subsets ``k_1 < ... < k_i`` of ``{1..n}``; the empty one first."""
    return [s for i in range(n + 1) for s in combinations(range(1, n + 1), i)]


def _psi_term(A: Algebra, n: int, subset: tuple[int, ...]) -> Mat:
    i = len(subset)
    rest = [l for l in range(1, n + 1) if l not in subset]
    # input legs a_0..a_n (0..n), b (n+1); gather a_0, a_{k_1..k_i}, b, rest
    order = [0, *subset, n + 1, *rest]
    gather = leg_permutation(A, order)
    head = A.mu @ kron(A.identity(), nested_bracket(A, i))  # a_0 [.., b]
    core = kron(head, eye_pow(A, len(rest)))  # -> head (x) rest
    # put units in the hatted slots: head, rest..., 1...  then reorder to slot order
    with_units = kron_all(eye_pow(A, 1 + len(rest)), *([A.unit] * i)) @ core
    slots = [0, *rest, *subset]  # slot currently holding each position
    place = [slots.index(t) for t in range(n + 1)]
    return leg_permutation(A, place) @ with_units @ gather


def psi(A: Algebra, a: Sequence[Mat], b: Mat) -> Mat:
    """Evaluate ``psi(a_0, ..., a_n; b)`` on algebra elements."""
    if not a:
        raise ValueError("psi needs at least a_0")
    return psi_matrix(A, len(a) - 1) @ kron_all(*a, b)


# -- the connection, its action and Delta ---------------------------------------------

def example_connection(A: Algebra) -> Connection:
    """Flat connection on ``A (x) A`` (outer left action) inducing (act.univ)."""
    def build():
        M = tensor_aa(A)
        mat = (
            insert_unit(A, 2, 0)
            - insert_unit(A, 2, 1)
            + insert_unit(A, 2, 2)
            - kron_all(A.mu, A.unit, A.unit)
        )
        return Connection(M, mat, name="Example A(x)A")

    return A.cached("example_connection", build)


def inner_connection(A: Algebra) -> Connection:
    """``d (x) id`` on ``A (x) A``; induces ``(a (x) b) c = ac (x) b``."""
    c = d_tensor_id(A, A.dim)
    return Connection(tensor_aa(A), c.matrix, name="d(x)id on A(x)A")


def act_univ(A: Algebra) -> tuple[Mat, ...]:
    """Right action ``(a (x) b) c = ac (x) b + a[b, c] (x) 1``."""
    I = A.identity()
    return tuple(
        kron(A.right_mult[c], I) + kron(A.mu @ kron(I, A.right_mult[c] - A.left_mult[c]), A.unit)
        for c in range(A.dim)
    )


def outer_action(A: Algebra) -> tuple[Mat, ...]:
    """Right action ``(a (x) b) c = a (x) bc``."""
    return tuple(kron(A.identity(), R) for R in A.right_mult)


def coring(A: Algebra) -> ModuleRep:
    """``A (x) A`` as a bimodule: outer left action, (act.univ) right action."""
    return A.cached("coring", lambda: example_connection(A).bimodule())


@dataclass
class Comultiplication:
    matrix: Mat  # A(x)A -> quotient coordinates of C (x)_A C
    square: TensorOverA  # C (x)_A C
    cube: TensorOverA  # (C (x)_A C) (x)_A C
    cube_alt: TensorOverA  # C (x)_A (C (x)_A C)


def delta_lift(A: Algebra) -> Mat:
    """``a (x) b -> a (x) 1 (x) 1 (x) b`` on lifts."""
    return kron_all(A.identity(), A.unit, A.unit, A.identity())


def delta(A: Algebra) -> Comultiplication:
    def build():
        C = coring(A)
        sq = tensor_over_A(C, C, name="C(x)_AC")
        cube = tensor_over_A(sq.module, C, name="(C(x)_AC)(x)_AC")
        alt = tensor_over_A(C, sq.module, name="C(x)_A(C(x)_AC)")
        return Comultiplication(sq.projection @ delta_lift(A), sq, cube, alt)

    return A.cached("delta", build)


def verify_delta(A: Algebra) -> VerificationReport:
    """Bilinearity and coassociativity of ``Delta``."""
    C = coring(A)
    D = delta(A)
    sq = D.square
    rep = VerificationReport()
    for i in range(A.dim):
        rep.add(compare(f"delta_left_linear[a{i}]", TAG_DELTA, D.matrix @ C.left[i], sq.module.left[i] @ D.matrix))
        rep.add(compare(f"delta_right_linear[a{i}]", TAG_DELTA, D.matrix @ C.right[i], sq.module.right[i] @ D.matrix))
    # Delta (x)_A id : C (x)_A C -> (C (x)_A C) (x)_A C, and id (x)_A Delta into C (x)_A (C (x)_A C)
    nn = A.dim**2
    lift_l = kron(D.matrix, Mat.eye(A.field, nn))
    lift_r = kron(Mat.eye(A.field, nn), D.matrix)
    rep.add(zero_check("delta(x)id_well_defined", TAG_DELTA, sq.quotient.respects(lift_l, D.cube.quotient)))
    rep.add(zero_check("id(x)delta_well_defined", TAG_DELTA, sq.quotient.respects(lift_r, D.cube_alt.quotient)))
    if not rep.passed:
        return rep
    left = sq.quotient.descend(lift_l, D.cube.quotient) @ D.matrix
    right = sq.quotient.descend(lift_r, D.cube_alt.quotient) @ D.matrix
    # compare inside C (x) C (x) C through the associator of the two bracketings
    iso = associator(A, D)
    rep.add(compare("delta_coassociative", TAG_DELTA, iso @ left, right))
    return rep


def associator(A: Algebra, D: Comultiplication) -> Mat:
    """``(C (x)_A C) (x)_A C -> C (x)_A (C (x)_A C)`` induced by the identity on ``C^{(x)3}``."""
    nn = A.dim**2
    sq = D.square
    lift = kron(sq.section, Mat.eye(A.field, nn))  # (sq coords) (x) C -> C (x) C (x) C
    to_alt = kron(Mat.eye(A.field, nn), sq.projection)  # C (x) C (x) C -> C (x) (sq coords)
    leak = D.cube.quotient.respects(to_alt @ lift, D.cube_alt.quotient)
    if not leak.is_zero():
        raise ArithmeticError("associator does not descend")
    return D.cube.quotient.descend(to_alt @ lift, D.cube_alt.quotient)


def square_identification(A: Algebra) -> Mat:
    """``C (x)_A C -> A^{(x)3}``, ``(a (x) b) (x) (c (x) d) -> psi(a, b; c) (x) d``."""
    sq = delta(A).square
    lift = kron(psi_matrix(A, 1), A.identity())
    return lift @ sq.section


# -- the DGA -------------------------------------------------------------------------------

def idempotent_catalog(A: Algebra) -> dict[str, Mat]:
    """Named idempotents exercised per preset."""
    F = A.field
    cat = {"1": A.one()}
    if A.name == "mat2":
        cat["E11"] = A.basis(0)
    elif A.name == "prod_KK":
        cat["(1,0)"] = A.basis(0)
    elif A.name == "group_C2" and (F.is_rational or F.p != 2):
        half = F.scalar("1/2")
        cat["(1+g)/2"] = Mat.column(F, [half, half])
    return cat


def is_idempotent(A: Algebra, e: Mat) -> bool:
    return A.mul(e, e) == e


@dataclass
class DgaInstance:
    algebra: Algebra
    idempotent: Mat
    max_degree: int
    _products: dict = field(default_factory=dict, repr=False)
    _diffs: dict = field(default_factory=dict, repr=False)

    def piece_dim(self, k: int) -> int:
        return self.algebra.dim ** (k + 1)

    def product(self, p: int, q: int) -> Mat:
        """``Omega^p (x) Omega^q -> Omega^{p+q}``."""
        if p + q > self.max_degree:
            raise DegreeCapExceeded(p + q, self.max_degree)
        key = (p, q)
        if key not in self._products:
            A = self.algebra
            self._products[key] = kron(psi_matrix(A, p), eye_pow(A, q))
        return self._products[key]

    def differential(self, k: int) -> Mat:
        """``d: A^{(x)(k+1)} -> A^{(x)(k+2)}``."""
        if k + 1 > self.max_degree:
            raise DegreeCapExceeded(k + 1, self.max_degree)
        if k not in self._diffs:
            self._diffs[k] = dga_differential(self.algebra, self.idempotent, k)
        return self._diffs[k]

    def multiply(self, x: Mat, p: int, y: Mat, q: int) -> Mat:
        return self.product(p, q) @ kron(x, y)


def dga_differential(A: Algebra, e: Mat, k: int) -> Mat:
    first = kron_all(A.left_of(e), A.unit, eye_pow(A, k))
    out = first
    sign_psi = 1 if (k + 1) % 2 == 0 else -1
    psi_e = kron(psi_matrix(A, k) @ kron(eye_pow(A, k + 1), e), A.unit)
    out = out + psi_e.scale(sign_psi)
    for i in range(1, k + 1):
        term = insert_unit(A, k + 1, i)
        out = out + (term if i % 2 == 0 else -term)
    return out


def dga_build(A: Algebra, e: Mat, max_degree: int | None = None) -> DgaInstance:
    if not is_idempotent(A, e):
        raise NotIdempotent("e^2 != e")
    cap = degree_cap() if max_degree is None else max_degree
    return DgaInstance(A, e, cap)


def verify_dga(dga: DgaInstance) -> VerificationReport:
    """d^2 = 0, graded Leibniz and associativity within the degree cap."""
    A, K = dga.algebra, dga.max_degree
    rep = VerificationReport()
    for k in range(0, K - 1):
        rep.add(zero_check(f"d^2=0[deg{k}]", TAG_DGA, dga.differential(k + 1) @ dga.differential(k)))
    for p in range(K):
        for q in range(K - p):
            # d(xy) = dx y + (-1)^p x dy
            lhs = dga.differential(p + q) @ dga.product(p, q)
            Ip, Iq = eye_pow(A, p + 1), eye_pow(A, q + 1)
            t1 = dga.product(p + 1, q) @ kron(dga.differential(p), Iq)
            t2 = dga.product(p, q + 1) @ kron(Ip, dga.differential(q))
            rhs = t1 + t2 if p % 2 == 0 else t1 - t2
            rep.add(compare(f"leibniz[{p},{q}]", TAG_DGA, lhs, rhs))
    for p in range(K + 1):
        for q in range(K + 1 - p):
            for r in range(K + 1 - p - q):
                Ip, Ir = eye_pow(A, p + 1), eye_pow(A, r + 1)
                lhs = dga.product(p + q, r) @ kron(dga.product(p, q), Ir)
                rhs = dga.product(p, q + r) @ kron(Ip, dga.product(q, r))
                rep.add(compare(f"assoc[{p},{q},{r}]", TAG_DGA, lhs, rhs))
    unit = A.one()
    for k in range(K + 1):
        Ik = eye_pow(A, k + 1)
        rep.add(compare(f"unit_left[deg{k}]", TAG_DGA, dga.product(0, k) @ kron(unit, Ik), Ik))
        rep.add(compare(f"unit_right[deg{k}]", TAG_DGA, dga.product(k, 0) @ kron(Ik, unit), Ik))
    return rep


def abstract_differential_deg1(A: Algebra, e: Mat) -> Mat:
    """``m -> (e(x)1)(x)_A m + m (x)_A (e(x)1) - Delta(m)`` read in ``A^{(x)3}``."""
    D = delta(A)
    sq = D.square
    e1 = kron(e, A.unit)
    nn = A.dim**2
    lift = kron(e1, Mat.eye(A.field, nn)) + kron(Mat.eye(A.field, nn), e1) - delta_lift(A)
    return square_identification(A) @ sq.projection @ lift


def verify_example(A: Algebra, idempotents: dict[str, Mat] | None = None) -> VerificationReport:
    """End-to-end: flatness, (act.univ), Delta, psi and the DGA axioms per idempotent."""
    rep = VerificationReport()
    conn = example_connection(A)
    flat = flatness(conn)
    rep.add(Check("example_flat", "flat", PASS if flat.is_flat else FAIL))
    R = conn.right_action()
    for c, (x, y) in enumerate(zip(R, act_univ(A))):
        rep.add(compare(f"act.univ[a{c}]", TAG_ACT_UNIV, x, y))
    inner = inner_connection(A)
    rep.add(Check("inner_flat", "flat", PASS if inner.is_flat() else FAIL))
    for c, (x, R_A) in enumerate(zip(inner.right_action(), A.right_mult)):
        rep.add(compare(f"inner_action[a{c}]", TAG_ACT, x, kron(R_A, A.identity())))
    rep.extend(verify_delta(A))
    rep.add(compare("square_identification_iso", TAG_DELTA,
                    Mat.eye(A.field, 1).scale(_rank(square_identification(A))),
                    Mat.eye(A.field, 1).scale(A.dim**3)))
    cat = idempotent_catalog(A) if idempotents is None else idempotents
    for name, e in cat.items():
        if not is_idempotent(A, e):
            raise NotIdempotent(f"catalogued element {name} is not idempotent")
        sq = delta(A).square
        rep.add(compare(f"delta(e(x)1)[{name}]", TAG_DELTA,
                        delta(A).matrix @ kron(e, A.unit), sq.element(kron(e, A.unit), kron(e, A.unit))))
        dga = dga_build(A, e)
        rep.extend(verify_dga(dga), prefix=f"[e={name}] ")
        if dga.max_degree >= 2:
            rep.add(compare(f"d_abstract=d_explicit[deg1,e={name}]", TAG_DGA,
                            abstract_differential_deg1(A, e), dga.differential(1)))
        # degree 0: d(a) = [e, a] (x) 1
        comm = kron(A.left_of(e) - A.right_of(e), A.unit)
        rep.add(compare(f"d0=[e,-](x)1[e={name}]", TAG_DGA, dga.differential(0), comm))
    return rep



def _rank(m: Mat) -> int:
    from .exactlin import rank

    return rank(m)


# -- the outer action probe ------------------------------------------------------------------

@dataclass
class OuterActionProbe:
    prime: int
    affine_dimension: int | None  # None: no connection induces the outer action
    samples: int
    flat_hits: int


def outer_action_probe(A: Algebra, prime: int = 101, samples: int = 20, seed: int = 0) -> OuterActionProbe:
    """Sample connections on ``A (x) A`` inducing the outer right action and test flatness.

    Over ``F_p`` only; a zero hit count is evidence, not a proof.
    """
    F = GF(prime)
    Ap = A if A.field == F else _reduce_algebra(A, F)
    M = tensor_aa(Ap)
    n, m = Ap.dim, M.dim
    coeff, rhs = connection_system(M)
    # induced action R_j = L_j - H_j nabla must equal the outer action
    rows, vals = [coeff], [rhs]
    outer = outer_action(Ap)
    Imm = Mat.eye(F, m)
    for j in range(n):
        H = hstack([M.left_of(Ap.right_mult[j].col(i)) for i in range(n)], F, m)
        rows.append(kron(H, Imm))
        vals.append(_vec(M.left[j] - outer[j]))
    sol = solve_affine(vstack(rows, F, n * m * m), vstack(vals, F, 1))
    if sol is None:
        return OuterActionProbe(prime, None, 0, 0)
    part, hom = sol
    rng = rng_for(seed)
    hits = 0
    for _ in range(samples):
        v = part
        if hom.dim:
            cs = random_scalars(F, rng, hom.dim)
            v = v + hom.basis.T @ Mat.column(F, cs)
        conn = Connection(M, Mat(F, v.num.reshape(n * m, m).copy(), v.den), name="outer probe")
        if flatness(conn, require_connection=False).is_flat:
            hits += 1
    return OuterActionProbe(prime, hom.dim, samples, hits)


def _vec(x: Mat) -> Mat:
    return Mat(x.field, x.num.reshape(-1, 1).copy(), x.den)


def _reduce_algebra(A: Algebra, F) -> Algebra:
    from .algebra import make_algebra

    # c[i][j][k] = (L_i)[k, j]; rational entries are mapped through "p/q" strings
    sc = [[[F.scalar(str(A.left_mult[i][k, j])) for k in range(A.dim)] for j in range(A.dim)] for i in range(A.dim)]
    unit = [F.scalar(str(A.unit[k, 0])) for k in range(A.dim)]
    return make_algebra(F, sc, unit, A.names, name=A.name)

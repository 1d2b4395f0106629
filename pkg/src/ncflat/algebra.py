"""Finite-dimensional unital associative algebras, their modules, and ``(x)_A``.

Basis orders of the presets are part of the public contract:

============  ==============================  ==================
preset        basis                           unit
============  ==============================  ==================
field         1                               (1)
dual_numbers  1, x            (x^2 = 0)       (1, 0)
trunc_poly_3  1, x, x^2       (x^3 = 0)       (1, 0, 0)
mat2          E11, E12, E21, E22              (1, 0, 0, 1)
group_C2      1, g            (g^2 = 1)       (1, 0)
prod_KK       e1, e2          (e_i e_j = d_ij e_i)  (1, 1)
upper_tri_2   E11, E12, E22                   (1, 0, 1)
============  ==============================  ==================
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import ActionAbsent, ModuleAxiomError, NotAssociative, NotUnital, UnknownPreset
from .exactlin import QQ, FieldSpec, Mat, QuotientData, Subspace, hstack, kron, quotient


@dataclass(frozen=True, eq=False)
class Algebra:
    """Algebra given by structure constants ``a_i a_j = sum_k c[i][j][k] a_k``.

    Construct through :func:`make_algebra`, which validates the axioms.
    """

    field: FieldSpec
    names: tuple[str, ...]
    struct_consts: tuple  # nested tuples of canonical scalars
    unit: Mat  # n x 1
    left_mult: tuple[Mat, ...]  # L_i with L_i @ b = a_i b
    right_mult: tuple[Mat, ...]  # R_j with R_j @ b = b a_j
    mu: Mat  # n x n^2, the multiplication A (x) A -> A
    name: str = "custom"
    _cache: dict = dc_field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return len(self.names)

    def __repr__(self):
        return f"Algebra({self.name!r}, dim={self.dim}, field={self.field})"

    # elements are n x 1 columns
    def basis(self, i: int) -> Mat:
        return Mat.unit_column(self.field, self.dim, i)

    def element(self, coords: Sequence) -> Mat:
        return Mat.column(self.field, coords)

    def zero(self) -> Mat:
        return Mat.zeros(self.field, self.dim, 1)

    def one(self) -> Mat:
        return self.unit

    def mul(self, a: Mat, b: Mat) -> Mat:
        return self.left_of(a) @ b

    def commutator(self, a: Mat, b: Mat) -> Mat:
        return self.mul(a, b) - self.mul(b, a)

    def left_of(self, a: Mat) -> Mat:
        """Left multiplication matrix of an arbitrary element."""
        return _combine(self.left_mult, a, self.field, self.dim)

    def right_of(self, a: Mat) -> Mat:
        return _combine(self.right_mult, a, self.field, self.dim)

    def identity(self) -> Mat:
        return Mat.eye(self.field, self.dim)

    def basis_products(self) -> list[list[Mat]]:
        return [[self.mul(self.basis(i), self.basis(j)) for j in range(self.dim)] for i in range(self.dim)]

    def is_commutative(self) -> bool:
        return all(l == r for l, r in zip(self.left_mult, self.right_mult))

    def cached(self, key, build):
        """Per-algebra memo for derived objects (Omega spaces, connections on them)."""
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]


def _combine(mats: Sequence[Mat], coeffs: Mat, field: FieldSpec, size: int) -> Mat:
    out = Mat.zeros(field, size, size)
    for i, m in enumerate(mats):
        c = coeffs[i, 0]
        if c != 0:
            out = out + m.scale(c)
    return out


def make_algebra(field: FieldSpec, struct_consts, unit, names=None, name: str = "custom") -> Algebra:
    """Validate structure constants and build an :class:`Algebra`.

    Raises :class:`NotUnital` or :class:`NotAssociative` with the first
    violating index (triple) found.
    """
    n = len(struct_consts)
    if names is None:
        names = [f"a{i}" for i in range(n)]
    if len(names) != n or len(unit) != n:
        raise ValueError("structure constants, unit and names disagree on the dimension")
    c = [[[field.scalar(struct_consts[i][j][k]) for k in range(n)] for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(n):
            if len(struct_consts[i][j]) != n:
                raise ValueError(f"struct_consts[{i}][{j}] has the wrong length")
    left = tuple(Mat.from_rows(field, [[c[i][j][k] for j in range(n)] for k in range(n)], n) for i in range(n))
    right = tuple(Mat.from_rows(field, [[c[i][j][k] for i in range(n)] for k in range(n)], n) for j in range(n))
    mu = Mat.from_rows(field, [[c[i][j][k] for i in range(n) for j in range(n)] for k in range(n)], n * n)
    u = Mat.column(field, unit)
    eye = Mat.eye(field, n)
    lu = _combine(left, u, field, n)
    ru = _combine(right, u, field, n)
    for i in range(n):
        if lu.col(i) != eye.col(i):
            raise NotUnital(i, "left")
        if ru.col(i) != eye.col(i):
            raise NotUnital(i, "right")
    for i in range(n):
        for j in range(n):
            # L_i L_j = L_{a_i a_j}; a column mismatch names l
            lhs = left[i] @ left[j]
            rhs = _combine(left, left[i].col(j), field, n)
            if lhs != rhs:
                diff = lhs - rhs
                l = int(np.flatnonzero(np.any(diff.num != 0, axis=0))[0])
                raise NotAssociative(i, j, l, rhs.col(l), lhs.col(l))
    frozen = tuple(tuple(tuple(row) for row in plane) for plane in c)
    return Algebra(field, tuple(names), frozen, u, left, right, mu, name)


# -- presets ------------------------------------------------------------------

def _table(n, products):
    """Structure constants from a dict {(i, j): {k: coeff}}."""
    c = [[[0] * n for _ in range(n)] for _ in range(n)]
    for (i, j), out in products.items():
        for k, v in out.items():
            c[i][j][k] = v
    return c


def _field_alg():
    return _table(1, {(0, 0): {0: 1}}), [1], ["1"]


def _trunc_poly(deg):
    prods = {}
    for i in range(deg):
        for j in range(deg):
            if i + j < deg:
                prods[(i, j)] = {i + j: 1}
    names = ["1", "x"] + [f"x^{k}" for k in range(2, deg)]
    return _table(deg, prods), [1] + [0] * (deg - 1), names[:deg]


def _mat2():
    # E_ab E_cd = delta_bc E_ad; index of E_ab is 2*(a-1)+(b-1)
    prods = {}
    for a in range(2):
        for b in range(2):
            for d in range(2):
                prods[(2 * a + b, 2 * b + d)] = {2 * a + d: 1}
    return _table(4, prods), [1, 0, 0, 1], ["E11", "E12", "E21", "E22"]


def _group_c2():
    return _table(2, {(0, 0): {0: 1}, (0, 1): {1: 1}, (1, 0): {1: 1}, (1, 1): {0: 1}}), [1, 0], ["1", "g"]


def _prod_kk():
    return _table(2, {(0, 0): {0: 1}, (1, 1): {1: 1}}), [1, 1], ["e1", "e2"]


def _upper_tri():
    # E11, E12, E22
    prods = {(0, 0): {0: 1}, (0, 1): {1: 1}, (1, 2): {1: 1}, (2, 2): {2: 1}}
    return _table(3, prods), [1, 0, 1], ["E11", "E12", "E22"]


PRESETS = {
    "field": _field_alg,
    "dual_numbers": lambda: _trunc_poly(2),
    "trunc_poly_3": lambda: _trunc_poly(3),
    "mat2": _mat2,
    "group_C2": _group_c2,
    "prod_KK": _prod_kk,
    "upper_tri_2": _upper_tri,
}


@lru_cache(maxsize=None)
def preset(name: str, field: FieldSpec = QQ) -> Algebra:
    """Catalogued algebra; see the module docstring for basis orders."""
    if name not in PRESETS:
        raise UnknownPreset(name, PRESETS)
    c, unit, names = PRESETS[name]()
    return make_algebra(field, c, unit, names, name=name)


# -- modules ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ModuleRep:
    """Finite-dimensional module given by action matrices on K^dim.

    ``left[i]`` is the matrix of ``m -> a_i m``; ``right[i]`` that of
    ``m -> m a_i``.  Actions are validated on construction.
    """

    algebra: Algebra
    dim: int
    left: tuple[Mat, ...] | None = None
    right: tuple[Mat, ...] | None = None
    name: str = "M"

    def __post_init__(self):
        validate_module(self)

    @property
    def field(self) -> FieldSpec:
        return self.algebra.field

    def left_of(self, a: Mat) -> Mat:
        if self.left is None:
            raise ActionAbsent("left")
        return _combine(self.left, a, self.field, self.dim)

    def right_of(self, a: Mat) -> Mat:
        if self.right is None:
            raise ActionAbsent("right")
        return _combine(self.right, a, self.field, self.dim)

    def act_left(self, a: Mat, m: Mat) -> Mat:
        return self.left_of(a) @ m

    def act_right(self, m: Mat, a: Mat) -> Mat:
        return self.right_of(a) @ m

    def identity(self) -> Mat:
        return Mat.eye(self.field, self.dim)

    def basis(self, i: int) -> Mat:
        return Mat.unit_column(self.field, self.dim, i)

    def with_right(self, right: Sequence[Mat], name: str | None = None) -> "ModuleRep":
        return ModuleRep(self.algebra, self.dim, self.left, tuple(right), name or self.name)

    def with_left(self, left: Sequence[Mat], name: str | None = None) -> "ModuleRep":
        return ModuleRep(self.algebra, self.dim, tuple(left), self.right, name or self.name)

    def left_only(self) -> "ModuleRep":
        return ModuleRep(self.algebra, self.dim, self.left, None, self.name)

    def right_only(self) -> "ModuleRep":
        return ModuleRep(self.algebra, self.dim, None, self.right, self.name)

    def dual(self, name: str | None = None) -> "ModuleRep":
        """``Hom_K(M, K)``: a left action becomes a right one and vice versa."""
        left = tuple(r.T for r in self.right) if self.right is not None else None
        right = tuple(l.T for l in self.left) if self.left is not None else None
        return ModuleRep(self.algebra, self.dim, left, right, name or f"{self.name}*")


def module_axiom_failures(mod: ModuleRep) -> list[tuple[str, tuple]]:
    """All violated module axioms as ``(axiom, witness)`` pairs, exact."""
    A = mod.algebra
    n = A.dim
    eye = mod.identity()
    out = []
    for side, acts in (("left", mod.left), ("right", mod.right)):
        if acts is None:
            continue
        if len(acts) != n or any(a.shape != (mod.dim, mod.dim) for a in acts):
            out.append((f"{side} shape", ()))
            continue
        if _combine(acts, A.unit, mod.field, mod.dim) != eye:
            out.append((f"{side} unital", ()))
        for i in range(n):
            for j in range(n):
                prod = A.left_mult[i].col(j)
                rhs = _combine(acts, prod, mod.field, mod.dim)
                lhs = acts[i] @ acts[j] if side == "left" else acts[j] @ acts[i]
                if lhs != rhs:
                    out.append((f"{side} associative", (i, j)))
    if mod.left is not None and mod.right is not None and not out:
        for i in range(n):
            for j in range(n):
                if mod.left[i] @ mod.right[j] != mod.right[j] @ mod.left[i]:
                    out.append(("bimodule compatible", (i, j)))
    return out


def validate_module(mod: ModuleRep) -> None:
    failures = module_axiom_failures(mod)
    if failures:
        raise ModuleAxiomError(*failures[0])


def regular_module(A: Algebra, side: str = "left") -> ModuleRep:
    """``A`` acting on itself: side is ``"left"``, ``"right"`` or ``"bi"``."""
    left = A.left_mult if side in ("left", "bi") else None
    right = A.right_mult if side in ("right", "bi") else None
    return ModuleRep(A, A.dim, left, right, name={"left": "A", "right": "A_A", "bi": "A_bi"}[side])


def free_module(A: Algebra, v_dim: int, name: str | None = None) -> ModuleRep:
    """``A (x) V`` with the outer left action ``a (b (x) v) = ab (x) v``."""
    I = Mat.eye(A.field, v_dim)
    return ModuleRep(A, A.dim * v_dim, tuple(kron(L, I) for L in A.left_mult), None, name or f"A(x)K^{v_dim}")


def tensor_aa(A: Algebra) -> ModuleRep:
    """``A (x) A`` with the outer left action."""
    return free_module(A, A.dim, "A(x)A")


def preset_modules(A: Algebra) -> dict[str, ModuleRep]:
    """Standard modules over a preset algebra, keyed by name."""
    mods = {
        "regular_left": regular_module(A, "left"),
        "regular_right": regular_module(A, "right"),
        "regular_bi": regular_module(A, "bi"),
        "AA": tensor_aa(A),
    }
    F = A.field
    if A.name == "mat2":
        # column vectors K^2 (left) and row vectors K^2 (right); E_ab e_c = delta_bc e_a
        col = []
        for a in range(2):
            for b in range(2):
                m = [[0, 0], [0, 0]]
                m[a][b] = 1
                col.append(Mat.from_rows(F, m))
        mods["column"] = ModuleRep(A, 2, tuple(col), None, "K^2")
        mods["row"] = ModuleRep(A, 2, None, tuple(c.T for c in col), "(K^2)^T")
    if A.name in ("dual_numbers", "trunc_poly_3"):
        # A/(x): x acts by zero
        n = A.dim
        zero_acts = tuple(Mat.eye(F, 1) if i == 0 else Mat.zeros(F, 1, 1) for i in range(n))
        mods["residue_left"] = ModuleRep(A, 1, zero_acts, None, "A/(x)")
        mods["residue_right"] = ModuleRep(A, 1, None, zero_acts, "(x)\\A")
    return mods


# -- balanced tensor products --------------------------------------------------

@dataclass(frozen=True, eq=False)
class TensorOverA:
    """``M (x)_A N`` as a quotient of ``M (x) N`` (row-major index ``i*dim N + j``)."""

    left_factor: ModuleRep
    right_factor: ModuleRep
    quotient: QuotientData
    module: ModuleRep

    @property
    def dim(self) -> int:
        return self.quotient.dim

    @property
    def projection(self) -> Mat:
        return self.quotient.projection

    @property
    def section(self) -> Mat:
        return self.quotient.section

    def element(self, m: Mat, n: Mat) -> Mat:
        """Class of ``m (x) n``."""
        return self.projection @ kron(m, n)


def balanced_relations(M: ModuleRep, N: ModuleRep) -> Mat:
    """Columns spanning ``{m a (x) n - m (x) a n}`` over basis triples."""
    if M.right is None:
        raise ActionAbsent("right")
    if N.left is None:
        raise ActionAbsent("left")
    Im = M.identity()
    In = N.identity()
    return hstack(
        [kron(R, In) - kron(Im, L) for R, L in zip(M.right, N.left)],
        M.field,
        M.dim * N.dim,
    )


def tensor_over_A(M: ModuleRep, N: ModuleRep, name: str | None = None) -> TensorOverA:
    """Balanced tensor product; outer actions are inherited when present."""
    if M.algebra is not N.algebra:
        raise ValueError("modules live over different algebras")
    rel = Subspace.span(M.field, balanced_relations(M, N))
    q = quotient(M.dim * N.dim, rel)
    left = right = None
    if M.left is not None:
        In = N.identity()
        left = tuple(q.projection @ kron(L, In) @ q.section for L in M.left)
    if N.right is not None:
        Im = M.identity()
        right = tuple(q.projection @ kron(Im, R) @ q.section for R in N.right)
    mod = ModuleRep(M.algebra, q.dim, left, right, name or f"{M.name}(x)_A{N.name}")
    return TensorOverA(M, N, q, mod)

"""Row reduction, kernels, affine solving and quotients over an exact field."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import FieldSpec
from .kernels import rref_integer, rref_mod
from .matrix import Mat, hstack, vstack


def rref(m: Mat) -> tuple[Mat, list[int]]:
    """Reduced row echelon form with zero rows dropped, and the pivot columns."""
    if m.rows == 0 or m.cols == 0:
        return Mat.zeros(m.field, 0, m.cols), []
    if m.field.is_rational:
        num, den, pivots = rref_integer(m.num)
        return Mat(m.field, num, den), pivots
    red, pivots = rref_mod(m.num, m.field.p)
    return Mat(m.field, red, 1, _normalized=True), pivots


def rank(m: Mat) -> int:
    return len(rref(m)[1])


@dataclass(frozen=True, eq=False)
class Subspace:
    """Subspace of K^ambient_dim with canonical (RREF) row basis."""

    ambient_dim: int
    basis: Mat
    pivots: tuple[int, ...]

    @classmethod
    def span(cls, field: FieldSpec, vectors: Mat) -> "Subspace":
        """Span of the *columns* of ``vectors``."""
        red, piv = rref(vectors.T)
        return cls(vectors.rows, red, tuple(piv))

    @classmethod
    def span_rows(cls, rows: Mat) -> "Subspace":
        red, piv = rref(rows)
        return cls(rows.cols, red, tuple(piv))

    @classmethod
    def zero(cls, field: FieldSpec, n: int) -> "Subspace":
        return cls(n, Mat.zeros(field, 0, n), ())

    @classmethod
    def full(cls, field: FieldSpec, n: int) -> "Subspace":
        return cls(n, Mat.eye(field, n), tuple(range(n)))

    @property
    def field(self) -> FieldSpec:
        return self.basis.field

    @property
    def dim(self) -> int:
        return self.basis.rows

    @property
    def embedding(self) -> Mat:
        """Columns are the basis vectors (ambient x dim)."""
        return self.basis.T

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.basis == other.basis

    __hash__ = None

    def coordinates(self, v: Mat, check: bool = True) -> Mat:
        """Coordinates of the columns of ``v``; raises if a column lies outside."""
        c = v.take_rows(self.pivots) if self.pivots else Mat.zeros(v.field, 0, v.cols)
        if check and self.embedding @ c != v:
            raise ValueError("vector lies outside the subspace")
        return c

    def contains(self, v: Mat) -> bool:
        c = v.take_rows(self.pivots) if self.pivots else Mat.zeros(v.field, 0, v.cols)
        return self.embedding @ c == v

    def contains_subspace(self, other: "Subspace") -> bool:
        return other.dim == 0 or self.contains(other.embedding)

    def intersect(self, other: "Subspace") -> "Subspace":
        # annihilator of a sum is the intersection of annihilators
        ann = kernel(vstack([self.annihilator_rows(), other.annihilator_rows()], self.field, self.ambient_dim))
        return ann

    def annihilator_rows(self) -> Mat:
        """Rows spanning the linear forms vanishing on this subspace."""
        if self.dim == 0:
            return Mat.eye(self.field, self.ambient_dim)
        return kernel(self.basis).basis


def kernel(m: Mat) -> Subspace:
    """Null space of ``m`` as a canonical subspace of K^cols."""
    n = m.cols
    red, piv = rref(m)
    free = [c for c in range(n) if c not in set(piv)]
    if not free:
        return Subspace.zero(m.field, n)
    # x_free = e_f, x_piv[i] = -red[i, f]; reduce again for the canonical basis
    den = red.den
    vecs = np.zeros((len(free), n), dtype=red.num.dtype)
    vecs[np.arange(len(free)), free] = den
    if piv:
        vecs[:, piv] = -red.num[:, free].T
    return Subspace.span_rows(Mat(m.field, vecs, den))


def image(m: Mat) -> Subspace:
    return Subspace.span(m.field, m)


def solve_affine(coeff: Mat, rhs: Mat) -> tuple[Mat, Subspace] | None:
    """Solve ``coeff @ x = rhs`` for a column ``rhs``.

    Returns ``(particular, homogeneous)`` or ``None`` when inconsistent.
    The particular solution is the one with zero free variables.
    """
    if rhs.cols != 1 or rhs.rows != coeff.rows:
        raise ValueError("rhs must be a column matching coeff")
    n = coeff.cols
    aug = hstack([coeff, rhs])
    red, piv = rref(aug)
    if n in piv:
        return None
    x = np.zeros((n, 1), dtype=object)
    for i, p in enumerate(piv):
        x[p, 0] = int(red.num[i, n])
    particular = Mat(coeff.field, x, red.den)
    homogeneous = kernel(coeff)
    return particular, homogeneous


def inverse(m: Mat) -> Mat:
    if m.rows != m.cols:
        raise ValueError("inverse needs a square matrix")
    n = m.rows
    red, piv = rref(hstack([m, Mat.eye(m.field, n)]))
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return red.take_cols(range(n, 2 * n))


@dataclass(frozen=True, eq=False)
class QuotientData:
    """Quotient K^ambient / relations with coordinates on the non-pivot axes."""

    ambient_dim: int
    relations: Subspace
    projection: Mat  # ambient -> quotient
    section: Mat  # quotient -> ambient

    @property
    def dim(self) -> int:
        return self.projection.rows

    @property
    def field(self) -> FieldSpec:
        return self.projection.field

    def descend(self, lift: Mat, target: "QuotientData") -> Mat:
        """Matrix of the map induced on quotients by an ambient ``lift``."""
        return target.projection @ lift @ self.section

    def respects(self, lift: Mat, target: "QuotientData") -> Mat:
        """Image of the relation space under ``lift`` in the target quotient (zero iff well defined)."""
        if self.relations.dim == 0:
            return Mat.zeros(self.field, target.dim, 0)
        return target.projection @ lift @ self.relations.embedding


def quotient(ambient_dim: int, relations: Subspace) -> QuotientData:
    if relations.ambient_dim != ambient_dim:
        raise ValueError("relation space lives in a different ambient space")
    field = relations.field
    piv = list(relations.pivots)
    free = [c for c in range(ambient_dim) if c not in set(piv)]
    q = len(free)
    sec = np.zeros((ambient_dim, q), dtype=np.int64)
    for k, f in enumerate(free):
        sec[f, k] = 1
    section = Mat(field, sec, 1, _normalized=True)
    # projection(v) = (v - sum_i v[piv_i] * basis_i) restricted to free coords
    # = v[free] - basis[:, free]^T v[piv]
    proj_free = Mat(field, np.zeros((q, ambient_dim), dtype=np.int64), 1, _normalized=True)
    if q:
        ident = section.T
        if piv:
            corr = -relations.basis.take_cols(free).T  # q x r
            full = np.zeros((q, ambient_dim), dtype=object)
            full[:, piv] = corr.num
            proj_free = ident + Mat(field, full, corr.den)
        else:
            proj_free = ident
    return QuotientData(ambient_dim, relations, proj_free, section)

"""The universal differential graded algebra of a finite-dimensional algebra.

``Omega^k`` is realized inside ``A^{(x)(k+1)}`` as the tensors killed by
multiplying any two adjacent legs.  Forms are kept in the coordinates of
the canonical (RREF) basis of that subspace.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import Algebra, ModuleRep, TensorOverA, regular_module, tensor_over_A
from .config import degree_cap
from .errors import DegreeCapExceeded, ResultOutsideSubspace
from .exactlin import Mat, Subspace, kernel, kron_all, vstack


def eye_pow(A: Algebra, k: int) -> Mat:
    return Mat.eye(A.field, A.dim**k)


def adjacent_product(A: Algebra, length: int, j: int) -> Mat:
    """``A^{(x)length} -> A^{(x)(length-1)}`` multiplying legs ``j`` and ``j+1``."""
    return kron_all(eye_pow(A, j), A.mu, eye_pow(A, length - j - 2))


def insert_unit(A: Algebra, length: int, j: int) -> Mat:
    """``A^{(x)length} -> A^{(x)(length+1)}`` putting ``1`` in slot ``j``."""
    return kron_all(eye_pow(A, j), A.unit, eye_pow(A, length - j))


def ambient_differential(A: Algebra, k: int) -> Mat:
    """``sum_{j=0}^{k+1} (-1)^j`` (insert 1 at slot j) on ``A^{(x)(k+1)}``."""
    out = Mat.zeros(A.field, A.dim ** (k + 2), A.dim ** (k + 1))
    for j in range(k + 2):
        term = insert_unit(A, k + 1, j)
        out = out + term if j % 2 == 0 else out - term
    return out


def ambient_product(A: Algebra, k: int, l: int) -> Mat:
    """Concatenation ``A^{(x)(k+1)} (x) A^{(x)(l+1)} -> A^{(x)(k+l+1)}``."""
    return kron_all(eye_pow(A, k), A.mu, eye_pow(A, l))


@dataclass(frozen=True, eq=False)
class OmegaSpace:
    algebra: Algebra
    degree: int
    subspace: Subspace
    left: tuple[Mat, ...]
    right: tuple[Mat, ...]

    @property
    def dim(self) -> int:
        return self.subspace.dim

    @property
    def embedding(self) -> Mat:
        return self.subspace.embedding

    def coords(self, v: Mat) -> Mat:
        try:
            return self.subspace.coordinates(v)
        except ValueError as exc:
            raise ResultOutsideSubspace(f"tensor is not in Omega^{self.degree}") from exc

    def module(self, side: str = "bi") -> ModuleRep:
        left = self.left if side in ("left", "bi") else None
        right = self.right if side in ("right", "bi") else None
        return ModuleRep(self.algebra, self.dim, left, right, name=f"Omega^{self.degree}")


@dataclass(frozen=True)
class Form:
    space: OmegaSpace
    coords: Mat

    @property
    def degree(self) -> int:
        return self.space.degree

    @property
    def ambient(self) -> Mat:
        return self.space.embedding @ self.coords

    def __add__(self, other: "Form") -> "Form":
        return Form(self.space, self.coords + other.coords)

    def __sub__(self, other: "Form") -> "Form":
        return Form(self.space, self.coords - other.coords)

    def scale(self, c) -> "Form":
        return Form(self.space, self.coords.scale(c))

    def is_zero(self) -> bool:
        return self.coords.is_zero()


def _check_degree(k: int, cap: int | None = None):
    cap = degree_cap() if cap is None else cap
    if k > cap:
        raise DegreeCapExceeded(k, cap)


def omega(A: Algebra, k: int) -> OmegaSpace:
    """``Omega^k A`` as a canonical subspace of ``A^{(x)(k+1)}``."""
    if k < 0:
        raise ValueError("negative degree")
    _check_degree(k)
    return A.cached(("omega", k), lambda: _build_omega(A, k))


def _build_omega(A: Algebra, k: int) -> OmegaSpace:
    n = A.dim
    length = k + 1
    if k == 0:
        sub = Subspace.full(A.field, n)
    else:
        sub = kernel(vstack([adjacent_product(A, length, j) for j in range(k)], A.field, n**length))
    E = sub.embedding
    rest = eye_pow(A, k)
    left = tuple(sub.coordinates(kron_all(L, rest) @ E, check=False) for L in A.left_mult)
    right = tuple(sub.coordinates(kron_all(rest, R) @ E, check=False) for R in A.right_mult)
    return OmegaSpace(A, k, sub, left, right)


def form(space: OmegaSpace, ambient: Mat) -> Form:
    return Form(space, space.coords(ambient))


def differential_matrix(A: Algebra, k: int) -> Mat:
    """``d: Omega^k -> Omega^{k+1}`` in subspace coordinates."""
    def build():
        src, dst = omega(A, k), omega(A, k + 1)
        return dst.coords(ambient_differential(A, k) @ src.embedding)

    return A.cached(("d", k), build)


def d_universal(A: Algebra, k: int, w: Form) -> Form:
    if w.degree != k:
        raise ValueError("form has the wrong degree")
    return Form(omega(A, k + 1), differential_matrix(A, k) @ w.coords)


def d_element(A: Algebra, a: Mat) -> Form:
    """``da = 1 (x) a - a (x) 1`` as a 1-form."""
    return d_universal(A, 0, Form(omega(A, 0), a))


def product_matrix(A: Algebra, k: int, l: int) -> Mat:
    """Bilinear product ``Omega^k x Omega^l -> Omega^{k+l}`` acting on ``coords(w) (x) coords(v)``."""
    def build():
        wk, wl, out = omega(A, k), omega(A, l), omega(A, k + l)
        return out.coords(ambient_product(A, k, l) @ wk.embedding.kron(wl.embedding))

    return A.cached(("prod", k, l), build)


def omega_product(w: Form, v: Form) -> Form:
    A = w.space.algebra
    k, l = w.degree, v.degree
    return Form(omega(A, k + l), product_matrix(A, k, l) @ w.coords.kron(v.coords))


def omega_module_structure(A: Algebra, k: int) -> tuple[tuple[Mat, ...], tuple[Mat, ...]]:
    """Left and right action matrices of ``A`` on ``Omega^k`` (first / last leg)."""
    W = omega(A, k)
    return W.left, W.right


def multiplication_kernel(A: Algebra) -> Subspace:
    return kernel(A.mu)


def reduction_map(A: Algebra, M: ModuleRep) -> tuple[TensorOverA, Mat]:
    """``(A (x) A) (x)_A M -> A (x) M``, ``x (x) y (x) m -> x (x) ym``.

    Returns the balanced tensor product and the matrix of the induced map
    on its quotient coordinates.
    """
    n = A.dim
    AA_right = ModuleRep(A, n * n, None, tuple(kron_all(A.identity(), R) for R in A.right_mult), "A(x)A")
    T = tensor_over_A(AA_right, M)
    contraction = contraction_matrix(M)
    lift = kron_all(A.identity(), contraction)
    return T, lift @ T.section


def contraction_matrix(M: ModuleRep) -> Mat:
    """Left action as a map ``A (x) M -> M``."""
    from .exactlin import hstack

    return hstack(list(M.left), M.field, M.dim)


def regular_bimodule(A: Algebra) -> ModuleRep:
    return regular_module(A, "bi")

"""Dense exact matrices over Q or F_p.

A rational matrix is stored as an integer numerator array together with one
positive common denominator, normalized so that the representation is
unique.  Prime-field matrices store residues in ``[0, p)`` with denominator 1.
Numerators are int64 while they stay well inside the safe range and Python
integers (object arrays) beyond it.

Tensor index convention (used everywhere): the basis vector ``e_i (x) f_j``
of ``V (x) W`` has index ``i * dim(W) + j``, which is what ``kron`` produces.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Sequence

import numpy as np

from .field import FieldSpec
from .kernels import (
    INT64_SAFE,
    as_object,
    int_matmul,
    max_abs,
    mod_matmul,
    shrink,
)


def _gcd_all(a: np.ndarray) -> int:
    if a.size == 0:
        return 0
    if a.dtype == object:
        return reduce(gcd, (int(x) for x in a.flat), 0)
    return int(np.gcd.reduce(np.abs(a).ravel()))


class Mat:
    """Immutable exact matrix; the column-vector convention is used for maps."""

    __slots__ = ("field", "num", "den")

    def __init__(self, field: FieldSpec, num: np.ndarray, den: int = 1, _normalized: bool = False):
        if num.ndim != 2:
            raise ValueError("Mat needs a 2-d array")
        if num.dtype != object and num.dtype != np.int64:
            num = num.astype(np.int64)
        if not _normalized:
            num, den = _normalize(field, num, den)
        num.flags.writeable = False
        self.field = field
        self.num = num
        self.den = den

    # -- construction ---------------------------------------------------
    @classmethod
    def from_rows(cls, field: FieldSpec, rows: Sequence[Sequence], cols: int | None = None) -> "Mat":
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise ValueError("ragged rows")
        vals = [[field.scalar(x) for x in r] for r in rows]
        if field.is_rational:
            den = 1
            for r in vals:
                for x in r:
                    if x.denominator != 1:
                        den = lcm(den, x.denominator)
            num = np.empty((len(rows), cols), dtype=object)
            for i, r in enumerate(vals):
                for j, x in enumerate(r):
                    num[i, j] = x.numerator * (den // x.denominator)
            return cls(field, shrink(num), den)
        return cls(field, np.array(vals, dtype=np.int64).reshape(len(rows), cols), 1)

    @classmethod
    def zeros(cls, field: FieldSpec, rows: int, cols: int) -> "Mat":
        return cls(field, np.zeros((rows, cols), dtype=np.int64), 1, _normalized=True)

    @classmethod
    def eye(cls, field: FieldSpec, n: int) -> "Mat":
        return cls(field, np.eye(n, dtype=np.int64), 1, _normalized=True)

    @classmethod
    def column(cls, field: FieldSpec, values: Sequence) -> "Mat":
        return cls.from_rows(field, [[v] for v in values], 1)

    @classmethod
    def unit_column(cls, field: FieldSpec, n: int, i: int) -> "Mat":
        a = np.zeros((n, 1), dtype=np.int64)
        a[i, 0] = 1
        return cls(field, a, 1, _normalized=True)

    @classmethod
    def from_int(cls, field: FieldSpec, a: np.ndarray) -> "Mat":
        return cls(field, np.asarray(a), 1)

    # -- basic protocol -------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return self.num.shape

    @property
    def rows(self) -> int:
        return self.num.shape[0]

    @property
    def cols(self) -> int:
        return self.num.shape[1]

    def __repr__(self):
        return f"Mat({self.field}, {self.to_lists()})"

    def __getitem__(self, key):
        if isinstance(key, tuple) and all(isinstance(k, (int, np.integer)) for k in key):
            x = int(self.num[key])
            if self.field.is_rational:
                return Fraction(x, self.den)
            return x
        sub = self.num[key]
        if sub.ndim == 1:
            # single row or column requested with a slice; keep 2-d shape
            if isinstance(key, tuple) and isinstance(key[0], (int, np.integer)):
                sub = sub.reshape(1, -1)
            else:
                sub = sub.reshape(-1, 1)
        return Mat(self.field, np.array(sub), self.den)

    def take_rows(self, idx: Sequence[int]) -> "Mat":
        return Mat(self.field, self.num[list(idx), :].reshape(len(idx), self.cols), self.den)

    def take_cols(self, idx: Sequence[int]) -> "Mat":
        return Mat(self.field, self.num[:, list(idx)].reshape(self.rows, len(idx)), self.den)

    def col(self, j: int) -> "Mat":
        return Mat(self.field, self.num[:, j : j + 1].copy(), self.den)

    def __eq__(self, other):
        if not isinstance(other, Mat):
            return NotImplemented
        return (
            self.field == other.field
            and self.shape == other.shape
            and self.den == other.den
            and bool(np.all(self.num == other.num))
        )

    def __hash__(self):
        return hash((self.field, self.shape, self.den, tuple(int(x) for x in self.num.flat)))

    def is_zero(self) -> bool:
        return not np.any(self.num != 0)

    def to_lists(self) -> list[list]:
        return [[self[i, j] for j in range(self.cols)] for i in range(self.rows)]

    def to_strings(self) -> list[list]:
        return [[self.field.format_scalar(x) for x in row] for row in self.to_lists()]

    def flat_list(self) -> list:
        return [x for row in self.to_lists() for x in row]

    def nonzero_entries(self, limit: int | None = None) -> list[tuple[int, int, str]]:
        out = []
        for i, j in zip(*np.nonzero(self.num != 0)):
            out.append((int(i), int(j), str(self.field.format_scalar(self[int(i), int(j)]))))
            if limit is not None and len(out) >= limit:
                break
        return out

    # -- arithmetic -----------------------------------------------------
    @property
    def T(self) -> "Mat":
        return Mat(self.field, self.num.T.copy(), self.den, _normalized=True)

    def _check(self, other: "Mat"):
        if self.field != other.field:
            raise ValueError(f"field mismatch: {self.field} vs {other.field}")

    def __add__(self, other: "Mat") -> "Mat":
        self._check(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        if not self.field.is_rational:
            return Mat(self.field, (self.num + other.num) % self.field.p, 1, _normalized=True)
        d = lcm(self.den, other.den)
        a = _scaled(self.num, d // self.den)
        b = _scaled(other.num, d // other.den)
        return Mat(self.field, _safe_add(a, b), d)

    def __neg__(self) -> "Mat":
        if not self.field.is_rational:
            return Mat(self.field, (-self.num) % self.field.p, 1, _normalized=True)
        return Mat(self.field, -self.num, self.den, _normalized=True)

    def __sub__(self, other: "Mat") -> "Mat":
        return self + (-other)

    def scale(self, c) -> "Mat":
        c = self.field.scalar(c)
        if not self.field.is_rational:
            return Mat(self.field, (self.num * c) % self.field.p, 1, _normalized=True)
        return Mat(self.field, _scaled(self.num, c.numerator), self.den * c.denominator)

    def __mul__(self, c) -> "Mat":
        if isinstance(c, Mat):
            raise TypeError("use @ for matrix products")
        return self.scale(c)

    __rmul__ = __mul__

    def __matmul__(self, other: "Mat") -> "Mat":
        self._check(other)
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        if not self.field.is_rational:
            return Mat(self.field, mod_matmul(self.num, other.num, self.field.p), 1, _normalized=True)
        return Mat(self.field, int_matmul(self.num, other.num), self.den * other.den)

    def kron(self, other: "Mat") -> "Mat":
        self._check(other)
        if not self.field.is_rational:
            return Mat(self.field, np.kron(self.num, other.num) % self.field.p, 1, _normalized=True)
        if max_abs(self.num) * max_abs(other.num) < INT64_SAFE:
            k = np.kron(self.num.astype(np.int64), other.num.astype(np.int64))
        else:
            k = shrink(np.kron(as_object(self.num), as_object(other.num)))
        return Mat(self.field, k, self.den * other.den)

    def rank(self) -> int:
        from .linalg import rref

        return len(rref(self)[1])


def _scaled(a: np.ndarray, c: int) -> np.ndarray:
    if c == 1:
        return a
    if a.dtype != object and max_abs(a) * abs(c) < INT64_SAFE:
        return a * c
    return shrink(as_object(a) * c)


def _safe_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.dtype != object and b.dtype != object:
        return a + b
    return shrink(as_object(a) + as_object(b))


def _normalize(field: FieldSpec, num: np.ndarray, den: int) -> tuple[np.ndarray, int]:
    if not field.is_rational:
        if den != 1:
            num = _scaled(num, pow(den, -1, field.p))
        if num.dtype == object:
            num = np.array(num % field.p, dtype=np.int64).reshape(num.shape)
        return np.mod(num, field.p), 1
    if den <= 0:
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        num, den = -num, -den
    if den == 1:
        return shrink(num), 1
    g = gcd(_gcd_all(num), den)
    if g == 0:
        return num, 1
    if g != 1:
        num = num // g
        den //= g
    return shrink(num), den


def kron(a: Mat, b: Mat) -> Mat:
    return a.kron(b)


def kron_all(*ms: Mat) -> Mat:
    return reduce(kron, ms)


def hstack(ms: Iterable[Mat], field: FieldSpec | None = None, rows: int | None = None) -> Mat:
    ms = list(ms)
    if not ms:
        return Mat.zeros(field, rows or 0, 0)
    return _stack(ms, axis=1)


def vstack(ms: Iterable[Mat], field: FieldSpec | None = None, cols: int | None = None) -> Mat:
    ms = list(ms)
    if not ms:
        return Mat.zeros(field, 0, cols or 0)
    return _stack(ms, axis=0)


def _stack(ms: list[Mat], axis: int) -> Mat:
    field = ms[0].field
    d = reduce(lcm, (m.den for m in ms), 1)
    parts = [_scaled(m.num, d // m.den) for m in ms]
    if any(p.dtype == object for p in parts):
        parts = [as_object(p) for p in parts]
    return Mat(field, np.concatenate(parts, axis=axis), d)


def mat_sum(ms: Iterable[Mat], field: FieldSpec, rows: int, cols: int) -> Mat:
    out = Mat.zeros(field, rows, cols)
    for m in ms:
        out = out + m
    return out


def block_diag(ms: Sequence[Mat]) -> Mat:
    field = ms[0].field
    rows = sum(m.rows for m in ms)
    cols = sum(m.cols for m in ms)
    out = []
    c0 = 0
    for m in ms:
        left = Mat.zeros(field, m.rows, c0)
        right = Mat.zeros(field, m.rows, cols - c0 - m.cols)
        out.append(hstack([left, m, right]))
        c0 += m.cols
    return vstack(out, field, cols) if out else Mat.zeros(field, rows, cols)


def swap_matrix(field: FieldSpec, m: int, n: int) -> Mat:
    """Permutation ``V (x) W -> W (x) V`` for ``dim V = m``, ``dim W = n``."""
    a = np.zeros((n * m, m * n), dtype=np.int64)
    for i in range(m):
        for j in range(n):
            a[j * m + i, i * n + j] = 1
    return Mat(field, a, 1, _normalized=True)

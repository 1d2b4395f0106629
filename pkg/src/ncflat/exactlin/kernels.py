"""Hot kernels: modular elimination and exact integer matrix products.

The compiled extension ``ncflat._rref`` is used when it was built;
otherwise a vectorized numpy implementation takes over.  Setting
``NCFLAT_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os
from fractions import Fraction
from math import gcd, isqrt, lcm

import numpy as np

# Large primes below 2**31 for multimodular elimination (checked in tests).
PRIMES = (
    2147483647,
    2147483629,
    2147483587,
    2147483579,
    2147483563,
    2147483549,
    2147483543,
    2147483497,
    2147483489,
    2147483477,
    2147483423,
    2147483399,
)

INT64_SAFE = 2**62
FLOAT_EXACT = 2**53


def _rref_mod_numpy(a: np.ndarray, p: int) -> list[int]:
    rows, cols = a.shape
    r = 0
    pivots = []
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        sel = r + int(nz[0])
        if sel != r:
            a[[r, sel]] = a[[sel, r]]
        inv = pow(int(a[r, c]), -1, p)
        if inv != 1:
            a[r] = a[r] * inv % p
        col = a[:, c].copy()
        col[r] = 0
        targets = np.flatnonzero(col)
        if targets.size:
            support = np.flatnonzero(a[r])
            block = np.ix_(targets, support)
            a[block] = (a[block] - np.outer(col[targets], a[r, support])) % p
        pivots.append(c)
        r += 1
    return pivots


try:
    if os.environ.get("NCFLAT_PURE_PYTHON"):
        raise ImportError("compiled kernels disabled by NCFLAT_PURE_PYTHON")
    from ncflat._rref import rref_mod as _rref_mod_compiled

    BACKEND = "compiled"
except ImportError:
    _rref_mod_compiled = None
    BACKEND = "python"


def rref_mod(a: np.ndarray, p: int, backend: str | None = None) -> tuple[np.ndarray, list[int]]:
    """RREF of an integer array modulo ``p`` (``p < 2**31``).

    Returns ``(rows, pivots)`` with only the nonzero rows kept.
    """
    work = np.ascontiguousarray(reduce_mod(a, p))
    backend = backend or BACKEND
    if backend == "compiled":
        if _rref_mod_compiled is None:
            raise RuntimeError("compiled kernel is not available")
        pivots = list(_rref_mod_compiled(work, p))
    else:
        pivots = _rref_mod_numpy(work, p)
    return work[: len(pivots)].copy(), pivots


def reduce_mod(a: np.ndarray, p: int) -> np.ndarray:
    if a.dtype == object:
        return np.array(a % p, dtype=np.int64).reshape(a.shape)
    return np.mod(a.astype(np.int64, copy=False), p)


def max_abs(a: np.ndarray) -> int:
    if a.size == 0:
        return 0
    if a.dtype == object:
        return max(abs(int(x)) for x in a.flat)
    return int(np.abs(a).max())


def shrink(a: np.ndarray) -> np.ndarray:
    """Return ``a`` as int64 when every entry fits comfortably, else object."""
    if a.dtype == object:
        if max_abs(a) < INT64_SAFE:
            return a.astype(np.int64)
        return a
    return a


def as_object(a: np.ndarray) -> np.ndarray:
    if a.dtype == object:
        return a
    out = np.empty(a.size, dtype=object)
    out[:] = [int(x) for x in a.flat]
    return out.reshape(a.shape)


def int_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact product of integer matrices, picking the fastest safe route."""
    k = a.shape[1]
    if a.dtype != object and b.dtype != object:
        bound = max_abs(a) * max_abs(b) * max(k, 1)
        if bound < FLOAT_EXACT:
            return np.rint(a.astype(np.float64) @ b.astype(np.float64)).astype(np.int64)
        if bound < INT64_SAFE:
            return a @ b
    return shrink(as_object(a) @ as_object(b))


def mod_matmul(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Product of residue matrices (entries in ``[0, p)``) reduced mod ``p``."""
    k = a.shape[1]
    if (p - 1) ** 2 * max(k, 1) < FLOAT_EXACT:
        prod = np.rint(a.astype(np.float64) @ b.astype(np.float64)).astype(np.int64)
        return prod % p
    step = max(1, (INT64_SAFE // max((p - 1) ** 2, 1)))
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for s in range(0, k, step):
        out = (out + a[:, s : s + step] @ b[s : s + step]) % p
    return out


def rational_reconstruct(x: int, n: int) -> Fraction | None:
    """Find ``a/b`` with ``a = b*x mod n`` and ``|a|, b <= sqrt(n/2)``."""
    x %= n
    bound = isqrt(n // 2)
    r0, r1 = n, x
    t0, t1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        t0, t1 = t1, t0 - q * t1
    if t1 == 0 or abs(t1) > bound:
        return None
    if t1 < 0:
        r1, t1 = -r1, -t1
    if gcd(r1, t1) != 1:
        return None
    return Fraction(r1, t1)


def rref_fraction(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Plain Gauss-Jordan over Fractions; used for small inputs and as last resort."""
    m = [list(r) for r in rows]
    nrows = len(m)
    ncols = len(m[0]) if m else 0
    r = 0
    pivots = []
    for c in range(ncols):
        if r == nrows:
            break
        sel = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if sel is None:
            continue
        m[r], m[sel] = m[sel], m[r]
        piv = m[r][c]
        if piv != 1:
            m[r] = [x / piv for x in m[r]]
        support = [j for j in range(c, ncols) if m[r][j] != 0]
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                row = m[i]
                for j in support:
                    row[j] -= f * m[r][j]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def _certify(g: np.ndarray, num: np.ndarray, den: int, pivots: list[int]) -> bool:
    # Every input row must equal the combination of RREF rows picked out by
    # its pivot entries; together with rank_Q >= rank_p this pins the row space.
    if not pivots:
        return not np.any(g != 0)
    lhs = int_matmul(g[:, pivots], num)
    rhs = g * den if g.dtype == object or max_abs(g) * den < INT64_SAFE else as_object(g) * den
    return bool(np.all(lhs == rhs))


def rref_integer(g: np.ndarray, small: int = 600) -> tuple[np.ndarray, int, list[int]]:
    """RREF over Q of an integer matrix.

    Returns ``(num, den, pivots)`` where the RREF equals ``num / den``.
    Large inputs go through elimination modulo several primes, CRT and
    rational reconstruction; the candidate is certified exactly before it
    is returned.
    """
    rows, cols = g.shape
    if rows == 0 or cols == 0 or not np.any(g != 0):
        return np.zeros((0, cols), dtype=np.int64), 1, []
    if rows * cols <= small:
        return _rref_direct(g)
    best = None
    residues: list[tuple[int, np.ndarray]] = []
    for p in PRIMES:
        red, piv = rref_mod(g, p)
        key = (len(piv), [-c for c in piv])
        if best is None or key > best:
            best = key
            pivots = piv
            residues = [(p, red)]
        elif key == best:
            residues.append((p, red))
        else:
            continue
        cand = _reconstruct(residues, pivots, cols)
        if cand is not None and _certify(g, cand[0], cand[1], pivots):
            return cand[0], cand[1], pivots
    return _rref_direct(g)


def _rref_direct(g: np.ndarray) -> tuple[np.ndarray, int, list[int]]:
    rows = [[Fraction(int(x)) for x in row] for row in g]
    red, pivots = rref_fraction(rows)
    return fractions_to_integer(red, g.shape[1])[0:2] + (pivots,)


def fractions_to_integer(rows: list[list[Fraction]], cols: int) -> tuple[np.ndarray, int]:
    den = 1
    for row in rows:
        for x in row:
            if x.denominator != 1:
                den = lcm(den, x.denominator)
    num = np.empty((len(rows), cols), dtype=object)
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            num[i, j] = x.numerator * (den // x.denominator)
    return shrink(num), den


def _reconstruct(residues, pivots, cols):
    modulus = 1
    combined = None
    for p, red in residues:
        red = red.astype(object)
        if combined is None:
            combined = red
            modulus = p
            continue
        # CRT: x = combined (mod modulus), x = red (mod p)
        inv = pow(modulus % p, -1, p)
        combined = combined + modulus * (((red - combined) * inv) % p)
        modulus *= p
    r = len(pivots)
    fracs = [[Fraction(0)] * cols for _ in range(r)]
    den = 1
    free = [c for c in range(cols) if c not in set(pivots)]
    for i in range(r):
        fracs[i][pivots[i]] = Fraction(1)
        for c in free:
            v = int(combined[i, c])
            if v == 0:
                continue
            q = rational_reconstruct(v, modulus)
            if q is None:
                return None
            fracs[i][c] = q
            if q.denominator != 1:
                den = lcm(den, q.denominator)
    num, den = fractions_to_integer(fracs, cols)
    return num, den

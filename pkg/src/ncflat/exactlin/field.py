"""Exact base fields: the rationals and prime fields F_p."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

# Keeps p**2 * (inner dimension) inside float64's exact-integer range for
# typical shapes, and p**2 inside int64 always.
MAX_PRIME = 2**26

_SCALAR_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class FieldSpec:
    """Base field: ``kind`` is ``"rationals"`` or ``"prime"``.

    ``characteristic`` is 0 for the rationals and the prime ``p`` otherwise.
    """

    kind: str = "rationals"
    characteristic: int = 0

    def __post_init__(self):
        if self.kind == "rationals":
            if self.characteristic != 0:
                raise ValueError("the rationals have characteristic 0")
        elif self.kind == "prime":
            p = self.characteristic
            if not is_prime(p):
                raise ValueError(f"characteristic {p} is not prime")
            if p >= MAX_PRIME:
                raise ValueError(f"prime {p} exceeds the supported bound {MAX_PRIME}")
        else:
            raise ValueError(f"unknown field kind {self.kind!r}")

    @property
    def is_rational(self) -> bool:
        return self.kind == "rationals"

    @property
    def p(self) -> int:
        return self.characteristic

    def __str__(self):
        return "QQ" if self.is_rational else f"GF({self.p})"

    def scalar(self, x) -> Fraction | int:
        """Coerce ``x`` (int, Fraction, or ``"p/q"`` string) to canonical form."""
        if isinstance(x, str):
            m = _SCALAR_RE.match(x)
            if m is None:
                raise ValueError(f"not an exact scalar: {x!r}")
            num, den = int(m.group(1)), int(m.group(2) or 1)
            if den == 0:
                raise ZeroDivisionError(f"zero denominator in {x!r}")
            x = Fraction(num, den)
        elif isinstance(x, bool) or not isinstance(x, (int, Fraction)):
            if hasattr(x, "numerator") and hasattr(x, "denominator"):
                x = Fraction(int(x.numerator), int(x.denominator))
            else:
                raise TypeError(f"not an exact scalar: {x!r}")
        if self.is_rational:
            return Fraction(x)
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise ZeroDivisionError(f"{x} has no image in {self}")
            return x.numerator * pow(x.denominator, -1, self.p) % self.p
        return x % self.p

    def format_scalar(self, x) -> str | int:
        """Serialization form: an int when integral, else ``"p/q"``."""
        x = self.scalar(x)
        if isinstance(x, Fraction):
            return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
        return int(x)


QQ = FieldSpec()


def GF(p: int) -> FieldSpec:
    return FieldSpec("prime", p)

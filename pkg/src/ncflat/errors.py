"""Exception types.  Each carries the exact witness that triggered it."""


class NcflatError(Exception):
    """Base class for library errors."""


class NotAssociative(NcflatError):
    def __init__(self, i, j, l, lhs=None, rhs=None):
        self.triple = (i, j, l)
        self.lhs, self.rhs = lhs, rhs
        super().__init__(f"(a{i} a{j}) a{l} != a{i} (a{j} a{l})")


class NotUnital(NcflatError):
    def __init__(self, i, side="left"):
        self.index = i
        self.side = side
        super().__init__(f"unit fails to act as identity on basis element {i} ({side})")


class UnknownPreset(NcflatError, KeyError):
    def __init__(self, name, known=()):
        self.name = name
        super().__init__(f"unknown preset {name!r}; known: {', '.join(sorted(known))}")


class ActionAbsent(NcflatError):
    def __init__(self, side):
        self.side = side
        super().__init__(f"module has no {side} action")


class ModuleAxiomError(NcflatError):
    """A module action failed unitality, associativity or commutation."""

    def __init__(self, axiom, witness):
        self.axiom = axiom
        self.witness = witness
        super().__init__(f"module axiom {axiom!r} fails at {witness}")


class NotAConnection(NcflatError):
    pass


class NotFlat(NcflatError):
    pass


class WellDefinednessFailure(NcflatError):
    def __init__(self, what, witness):
        self.what = what
        self.witness = witness
        super().__init__(f"{what} does not descend to the balanced tensor product; witness {witness}")


class DescentFailure(WellDefinednessFailure):
    pass


class DegreeCapExceeded(NcflatError):
    def __init__(self, degree, cap):
        self.degree, self.cap = degree, cap
        super().__init__(f"degree {degree} exceeds the degree cap {cap}")


class RetryExhausted(NcflatError):
    pass


class NotIdempotent(NcflatError):
    pass


class CoordinateFailure(NcflatError):
    pass


class ResultOutsideSubspace(NcflatError):
    pass

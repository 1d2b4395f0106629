from .field import GF, QQ, FieldSpec, is_prime
from .kernels import BACKEND
from .linalg import QuotientData, Subspace, image, inverse, kernel, quotient, rank, rref, solve_affine
from .matrix import Mat, block_diag, hstack, kron, kron_all, swap_matrix, vstack

__all__ = [
    "BACKEND",
    "FieldSpec",
    "GF",
    "Mat",
    "QQ",
    "QuotientData",
    "Subspace",
    "block_diag",
    "hstack",
    "image",
    "inverse",
    "is_prime",
    "kernel",
    "kron",
    "kron_all",
    "quotient",
    "rank",
    "rref",
    "solve_affine",
    "swap_matrix",
    "vstack",
]

"""Dense complex coefficient matrices and the diagonal conditional expectation.

The coefficient algebra is handled as plain complex numpy arrays; this module
adds the contracts the rest of the package relies on: tolerant equality,
inversion guarded by a condition estimate, the projection onto the diagonal
subalgebra, seeded random draws, and the JSON encoding used in reports.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "MAT_TOL",
    "COND_LIMIT",
    "SingularMatrixError",
    "eye",
    "matrix_unit",
    "approx_eq",
    "max_abs_diff",
    "inverse",
    "cond_expect_diag",
    "diag_matrix",
    "is_diagonal",
    "random_matrix",
    "random_invertible",
    "encode_matrix",
    "decode_matrix",
]

MAT_TOL = 1e-9
COND_LIMIT = 1e12


class SingularMatrixError(ValueError):
    """Condition estimate exceeds the configured inversion limit."""

    def __init__(self, cond: float):
        self.cond = cond
        super().__init__(f"condition estimate {cond:.3e} exceeds {COND_LIMIT:.0e}")


def eye(d: int) -> np.ndarray:
    return np.eye(d, dtype=np.complex128)


def matrix_unit(d: int, i: int, j: int) -> np.ndarray:
    m = np.zeros((d, d), dtype=np.complex128)
    m[i, j] = 1.0
    return m


def max_abs_diff(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) if np.size(a) else 0.0


def approx_eq(a, b, tol: float = MAT_TOL) -> bool:
    return max_abs_diff(a, b) <= tol


def inverse(b: np.ndarray) -> np.ndarray:
    b = np.asarray(b, dtype=np.complex128)
    if not np.all(np.isfinite(b)):
        raise ValueError("non-finite entries")
    cond = float(np.linalg.cond(b)) if b.size else 0.0
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularMatrixError(cond if np.isfinite(cond) else np.inf)
    return np.linalg.inv(b)


def cond_expect_diag(b: np.ndarray) -> np.ndarray:
    """Projection onto the diagonal subalgebra."""
    b = np.asarray(b, dtype=np.complex128)
    return np.diag(np.diag(b))


def diag_matrix(entries) -> np.ndarray:
    return np.diag(np.asarray(entries, dtype=np.complex128))


def is_diagonal(b, tol: float = MAT_TOL) -> bool:
    b = np.asarray(b)
    return max_abs_diff(b, cond_expect_diag(b)) <= tol


def random_matrix(rng: np.random.Generator, d: int, scale: float = 0.5) -> np.ndarray:
    return scale * (rng.uniform(-1, 1, (d, d)) + 1j * rng.uniform(-1, 1, (d, d)))

def random_invertible(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    """Unitary-conjugated diagonal with entries in [0.5, 1], scaled; invertible
    with margin."""
    diag = np.diag(rng.uniform(0.5, 1.0, d).astype(np.complex128))
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, _ = np.linalg.qr(g)
    return scale * (q @ diag @ q.conj().T)


def encode_matrix(b: np.ndarray) -> list:
    """Row-major nested lists of [re, im] pairs."""
    b = np.asarray(b, dtype=np.complex128)
    return [[[float(x.real), float(x.imag)] for x in row] for row in b]


def decode_matrix(data) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in data],
                    dtype=np.complex128)

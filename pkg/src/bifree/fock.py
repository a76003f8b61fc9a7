"""Truncated full Fock space over k orthonormal generators.

Basis vectors are words over the generators of length at most ``depth``,
with the empty word (vacuum) first.  Creation prepends or appends a letter
and annihilation removes one; words pushed past the depth cap are sent to
zero, so any moment touching at most ``depth`` letters is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

__all__ = ["FockSpace", "FockCapError"]


class FockCapError(ValueError):
    """Requested truncated dimension exceeds the configured cap."""


@dataclass
class FockSpace:
    k: int
    depth: int
    max_dim: int | None = 400
    dim: int = field(init=False)

    def __post_init__(self):
        if self.k < 1 or self.depth < 0:
            raise ValueError("need k >= 1 and depth >= 0")
        offsets = [0]
        for j in range(self.depth + 1):
            offsets.append(offsets[-1] + self.k**j)
        self._offsets = offsets
        self.dim = offsets[-1]
        if self.max_dim is not None and self.dim > self.max_dim:
            raise FockCapError(
                f"dim {self.dim} for k={self.k}, depth={self.depth} exceeds cap {self.max_dim}"
            )
        self._op_cache: dict = {}
        self._moment_cache: dict = {}
        self._uid_counter = [0]

    # basis index arithmetic: word of length j with code c sits at offset[j] + c;
    # codes read the word as base-k digits, first letter most significant.

    def vacuum_index(self) -> int:
        return 0

    def _levels(self):
        for j in range(self.depth + 1):
            yield j, self._offsets[j], self.k**j

    def _creation(self, letter: int, side: str) -> sp.csr_matrix:
        rows = []
        cols = []
        k = self.k
        for j, off, count in self._levels():
            if j == self.depth:
                break
            codes = np.arange(count, dtype=np.int64)
            src = off + codes
            if side == "l":
                dst = self._offsets[j + 1] + letter * (k**j) + codes
            else:
                dst = self._offsets[j + 1] + codes * k + letter
            rows.append(dst)
            cols.append(src)
        rows = np.concatenate(rows) if rows else np.array([], dtype=np.int64)
        cols = np.concatenate(cols) if cols else np.array([], dtype=np.int64)
        data = np.ones(len(rows), dtype=np.complex128)
        return sp.csr_matrix((data, (rows, cols)), shape=(self.dim, self.dim))

    def op(self, kind: str, letter: int) -> sp.csr_matrix:
        """kind in {'l','l*','r','r*'}; annihilators are transposes of the
        matching creators (the matrices are real 0/1)."""
        if not 0 <= letter < self.k:
            raise ValueError(f"letter {letter} out of range")
        key = (kind, letter)
        if key not in self._op_cache:
            if kind == "l":
                mat = self._creation(letter, "l")
            elif kind == "r":
                mat = self._creation(letter, "r")
            elif kind == "l*":
                mat = self._creation(letter, "l").T.tocsr()
            elif kind == "r*":
                mat = self._creation(letter, "r").T.tocsr()
            else:
                raise ValueError(f"unknown kind {kind!r}")
            self._op_cache[key] = mat
        return self._op_cache[key]

    def vacuum_state(self) -> sp.csr_matrix:
        v = sp.lil_matrix((self.dim, 1), dtype=np.complex128)
        v[0, 0] = 1.0
        return v.tocsr()

    def vacuum_expectation(self, mat: sp.spmatrix) -> complex:
        return complex(mat[0, 0])

    def next_uid(self) -> int:
        self._uid_counter[0] += 1
        return self._uid_counter[0]

"""Linear-map algebra over d x d matrices of truncated Fock operators.

An element acts on the matrix carrier T by T -> sum_i P_i T Q_i.  Every
element built here is a sum of terms whose left part multiplies entrywise
from the left with the usual block pattern and whose right part applies the
reversed block pattern (also multiplying entries from the left).  Right
parts are stored block-transposed so that both sides act on column panels
by plain sparse matrix products.

Expectations never materialise the carrier: the composed word is applied to
the d vacuum columns, which stay sparse, and the d x d coefficient matrix is
read off the vacuum components.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .fock import FockSpace

__all__ = [
    "SideMat",
    "OpElement",
    "expectation_of_word",
    "expectation",
    "op_norm_bound",
]


def _as_matrix(b) -> np.ndarray:
    b = np.asarray(b, dtype=np.complex128)
    if b.ndim == 0:
        b = b.reshape(1, 1)
    return b


def block_flip(mat: sp.spmatrix, d: int, n: int) -> sp.csr_matrix:
    """Swap the block-row and block-column indices of a (d*n) x (d*n) matrix,
    leaving the inner indices in place."""
    coo = mat.tocoo()
    i, a = coo.row // n, coo.row % n
    j, b = coo.col // n, coo.col % n
    return sp.csr_matrix(
        (coo.data, (j * n + a, i * n + b)), shape=mat.shape
    )


def panel_flip(panel: sp.spmatrix, d: int, n: int) -> sp.csr_matrix:
    """Swap the block-row index of a (d*n) x d panel with its column index."""
    coo = panel.tocoo()
    i, a = coo.row // n, coo.row % n
    j = coo.col
    return sp.csr_matrix((coo.data, (j * n + a, i)), shape=panel.shape)


class SideMat:
    """One side of a term: either a full (d*n) x (d*n) sparse matrix (right
    parts pre-flipped) or a plain d x d coefficient block acting only on the
    block indices.  The transpose is cached because the expectation engine
    multiplies with the small panel on the left."""

    __slots__ = ("kind", "mat", "uid", "_matT")

    def __init__(self, kind: str, mat, uid: int):
        self.kind = kind
        self.mat = mat
        self.uid = uid
        self._matT = None

    def is_scalar(self) -> bool:
        return self.kind == "scalar"

    def matT(self):
        if self._matT is None:
            self._matT = self.mat.T.tocsr()
        return self._matT


class OpElement:
    """Finite sum of (left part, right part) multiplier pairs."""

    __slots__ = ("space", "d", "terms", "uid", "label")

    def __init__(self, space: FockSpace, d: int, terms, label: str = ""):
        self.space = space
        self.d = d
        self.terms = tuple(terms)
        self.uid = space.next_uid()
        self.label = label

    # -- constructors -------------------------------------------------------

    @staticmethod
    def identity(space: FockSpace, d: int) -> "OpElement":
        return OpElement(space, d, [(None, None)], label="1")

    @staticmethod
    def zero(space: FockSpace, d: int) -> "OpElement":
        return OpElement(space, d, [], label="0")

    @staticmethod
    def left_scalar(space: FockSpace, d: int, b) -> "OpElement":
        """Left multiplication by a d x d coefficient matrix."""
        b = _as_matrix(b)
        key = ("Lb", d, b.tobytes())
        cached = space._op_cache.get(key)
        if cached is None:
            sm = SideMat("scalar", b, space.next_uid())
            cached = OpElement(space, d, [(sm, None)], label="L_b")
            space._op_cache[key] = cached
        return cached

    @staticmethod
    def right_scalar(space: FockSpace, d: int, b) -> "OpElement":
        """Right multiplication by a d x d coefficient matrix."""
        b = _as_matrix(b)
        key = ("Rb", d, b.tobytes())
        cached = space._op_cache.get(key)
        if cached is None:
            sm = SideMat("scalar", b, space.next_uid())
            cached = OpElement(space, d, [(None, sm)], label="R_b")
            space._op_cache[key] = cached
        return cached

    @staticmethod
    def epsilon(space: FockSpace, d: int, b1, b2) -> "OpElement":
        """Image of b1 (x) b2: left multiplication by b1 and right by b2."""
        b1 = _as_matrix(b1)
        b2 = _as_matrix(b2)
        l = SideMat("scalar", b1, space.next_uid())
        r = SideMat("scalar", b2, space.next_uid())
        return OpElement(space, d, [(l, r)], label="LR_b")

    @staticmethod
    def left_block(space: FockSpace, d: int, entries, label: str = "") -> "OpElement":
        """Left embedding of a d x d matrix of Fock-space operators.

        entries[i][j] is an n x n sparse matrix or None.
        """
        mat = _assemble_block(space, d, entries, flip=False)
        sm = SideMat("mat", mat, space.next_uid())
        return OpElement(space, d, [(sm, None)], label=label or "L(Z)")

    @staticmethod
    def right_block(space: FockSpace, d: int, entries, label: str = "") -> "OpElement":
        """Right embedding of a d x d matrix of Fock-space operators."""
        mat = _assemble_block(space, d, entries, flip=True)
        sm = SideMat("mat", mat, space.next_uid())
        return OpElement(space, d, [(None, sm)], label=label or "R(Z)")

    @staticmethod
    def left_fock(space: FockSpace, kind: str, letter: int) -> "OpElement":
        """Scalar-coefficient left creation/annihilation operator."""
        return OpElement.left_block(space, 1, [[space.op(kind, letter)]],
                                    label=f"{kind}{letter}")

    @staticmethod
    def right_fock(space: FockSpace, kind: str, letter: int) -> "OpElement":
        return OpElement.right_block(space, 1, [[space.op(kind, letter)]],
                                     label=f"{kind}{letter}")

    # -- structure ----------------------------------------------------------

    def is_pure_left(self) -> bool:
        return all(r is None for _, r in self.terms)

    def is_pure_right(self) -> bool:
        return all(l is None for l, _ in self.terms)

    def side_tag(self) -> str | None:
        if self.is_pure_left():
            return "l"
        if self.is_pure_right():
            return "r"
        return None

    # -- algebra ------------------------------------------------------------

    def __add__(self, other: "OpElement") -> "OpElement":
        if other == 0:
            return self
        self._check_compatible(other)
        terms = list(self.terms) + list(other.terms)
        return _simplify(self.space, self.d, terms,
                         label=f"({self.label}+{other.label})")

    __radd__ = __add__

    def __sub__(self, other: "OpElement") -> "OpElement":
        return self + (-1.0) * other

    def __rmul__(self, scalar) -> "OpElement":
        if isinstance(scalar, OpElement):
            return NotImplemented
        terms = []
        for l, r in self.terms:
            if l is not None:
                terms.append((_scale(self.space, l, scalar), r))
            elif r is not None:
                terms.append((l, _scale(self.space, r, scalar)))
            else:
                b = np.eye(self.d, dtype=np.complex128) * scalar
                terms.append((SideMat("scalar", b, self.space.next_uid()), None))
        return OpElement(self.space, self.d, terms, label=self.label)

    def __mul__(self, other) -> "OpElement":
        if not isinstance(other, OpElement):
            return NotImplemented
        self._check_compatible(other)
        terms = []
        for (l1, r1), (l2, r2) in itertools.product(self.terms, other.terms):
            if not _merge_legal(r1, l2):
                raise ValueError(
                    "product would interleave non-commuting left and right parts; "
                    "multiply in the operator word instead"
                )
            terms.append((_compose_left(self.space, self.d, l1, l2),
                          _compose_right(self.space, self.d, r1, r2)))
        return _simplify(self.space, self.d, terms,
                         label=f"{self.label}*{other.label}")

    def _check_compatible(self, other: "OpElement"):
        if self.space is not other.space or self.d != other.d:
            raise ValueError("operands live on different carriers")

    def __repr__(self):
        return f"OpElement({self.label or self.uid}, {len(self.terms)} terms)"


def _scale(space, sm: SideMat, scalar) -> SideMat:
    return SideMat(sm.kind, sm.mat * scalar, space.next_uid())


def _merge_legal(r1: SideMat | None, l2: SideMat | None) -> bool:
    if r1 is None or l2 is None:
        return True
    return r1.is_scalar() or l2.is_scalar()


def _promote_left(space, d, sm: SideMat) -> sp.csr_matrix:
    if sm.kind == "mat":
        return sm.mat
    return sp.kron(sp.csr_matrix(sm.mat), sp.identity(space.dim, format="csr"),
                   format="csr")


def _promote_right(space, d, sm: SideMat) -> sp.csr_matrix:
    if sm.kind == "mat":
        return sm.mat
    # flipped form of kron(b, I) is kron(b.T, I)
    return sp.kron(sp.csr_matrix(sm.mat.T), sp.identity(space.dim, format="csr"),
                   format="csr")


def _compose_left(space, d, a: SideMat | None, b: SideMat | None) -> SideMat | None:
    if a is None:
        return b
    if b is None:
        return a
    if a.is_scalar() and b.is_scalar():
        return SideMat("scalar", a.mat @ b.mat, space.next_uid())
    m = _promote_left(space, d, a) @ _promote_left(space, d, b)
    return SideMat("mat", m.tocsr(), space.next_uid())


def _compose_right(space, d, a: SideMat | None, b: SideMat | None) -> SideMat | None:
    # flipped right parts compose in word order
    if a is None:
        return b
    if b is None:
        return a
    if a.is_scalar() and b.is_scalar():
        # R_a then R_b composes to right multiplication by b @ a on panels,
        # handled at application time; store the composed coefficient
        return SideMat("scalar", b.mat @ a.mat, space.next_uid())
    m = _promote_right(space, d, a) @ _promote_right(space, d, b)
    return SideMat("mat", m.tocsr(), space.next_uid())


def _simplify(space, d, terms, label="") -> OpElement:
    """Collapse pure one-sided term lists into a single term."""
    terms = list(terms)
    if len(terms) > 1:
        if all(r is None for _, r in terms):
            mats = [
                _promote_left(space, d, l) if l is not None
                else sp.identity(d * space.dim, format="csr", dtype=np.complex128)
                for l, _ in terms
            ]
            total = mats[0]
            for m in mats[1:]:
                total = total + m
            return OpElement(space, d,
                             [(SideMat("mat", total.tocsr(), space.next_uid()), None)],
                             label=label)
        if all(l is None for l, _ in terms):
            mats = [
                _promote_right(space, d, r) if r is not None
                else sp.identity(d * space.dim, format="csr", dtype=np.complex128)
                for _, r in terms
            ]
            total = mats[0]
            for m in mats[1:]:
                total = total + m
            return OpElement(space, d,
                             [(None, SideMat("mat", total.tocsr(), space.next_uid()))],
                             label=label)
    return OpElement(space, d, terms, label=label)


def _assemble_block(space: FockSpace, d: int, entries, flip: bool) -> sp.csr_matrix:
    n = space.dim
    grid = [[None] * d for _ in range(d)]
    for i in range(d):
        for j in range(d):
            e = entries[i][j]
            if e is None:
                continue
            if flip:
                grid[j][i] = e  # block transpose, entries unchanged
            else:
                grid[i][j] = e
    if all(all(c is None for c in row) for row in grid):
        return sp.csr_matrix((d * n, d * n), dtype=np.complex128)
    empty = sp.csr_matrix((n, n), dtype=np.complex128)
    grid = [[c if c is not None else empty for c in row] for row in grid]
    return sp.bmat(grid, format="csr", dtype=np.complex128)


# ---------------------------------------------------------------------------
# expectation engine
#
# Panels are stored transposed, shape d x (d*n): row j holds the carrier
# column that started from the j-th vacuum seed.  Keeping the small, very
# sparse panel as the left factor of every product makes each application
# cost only the touched rows of the (pre-transposed) operator.


def _seed_panel_t(space: FockSpace, d: int) -> sp.csr_matrix:
    n = space.dim
    rows = np.arange(d)
    cols = np.arange(d) * n
    data = np.ones(d, dtype=np.complex128)
    return sp.csr_matrix((data, (rows, cols)), shape=(d, d * n))


def _panel_flip_t(panel: sp.spmatrix, d: int, n: int) -> sp.coo_matrix:
    """Swap the panel row index with the block part of the column index."""
    coo = panel.tocoo()
    i, a = coo.col // n, coo.col % n
    return sp.coo_matrix((coo.data, (i, coo.row * n + a)), shape=panel.shape)


def _mix_blocks_t(panel: sp.spmatrix, b: np.ndarray, n: int, axis: str):
    """Multiply the d x d coefficient b into the panel: axis 'col' mixes the
    block part of the column index (left multiplication on the carrier),
    axis 'row' mixes the row index (right multiplication)."""
    coo = panel.tocoo()
    d = b.shape[0]
    rows, cols, data = [], [], []
    if axis == "col":
        m, a = coo.col // n, coo.col % n
        for i in range(d):
            coef = b[i, m]
            keep = coef != 0
            rows.append(coo.row[keep])
            cols.append(i * n + a[keep])
            data.append(coo.data[keep] * coef[keep])
    else:
        for j in range(d):
            coef = b[coo.row, j]
            keep = coef != 0
            rows.append(np.full(int(keep.sum()), j, dtype=coo.row.dtype))
            cols.append(coo.col[keep])
            data.append(coo.data[keep] * coef[keep])
    rows = np.concatenate(rows) if rows else np.array([], dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.array([], dtype=np.int64)
    data = np.concatenate(data) if data else np.array([], dtype=np.complex128)
    out = sp.coo_matrix((data, (rows, cols)), shape=panel.shape)
    out.sum_duplicates()
    return out


def _apply_left_t(space, d, sm: SideMat, panel):
    n = space.dim
    if sm.kind == "mat":
        return sp.csr_matrix(panel) @ sm.matT()
    b = sm.mat
    if d == 1:
        return panel * complex(b[0, 0])
    return _mix_blocks_t(panel, b, n, "col")


def _apply_right_t(space, d, sm: SideMat, panel):
    n = space.dim
    if sm.kind == "scalar":
        if d == 1:
            return panel * complex(sm.mat[0, 0])
        return _mix_blocks_t(panel, sm.mat, n, "row")
    flipped = _panel_flip_t(panel, d, n)
    moved = sp.csr_matrix(flipped) @ sm.matT()
    return _panel_flip_t(moved, d, n)


def expectation_of_word(word) -> np.ndarray:
    """Expectation of a product of elements, in the order given.

    Returns the d x d coefficient matrix of vacuum matrix elements.
    """
    word = [w for w in word if w is not None]
    if not word:
        raise ValueError("empty word")
    space = word[0].space
    d = word[0].d
    key = ("moment", d, tuple(op.uid for op in word))
    cached = space._moment_cache.get(key)
    if cached is not None:
        return cached
    n = space.dim
    out = np.zeros((d, d), dtype=np.complex128)
    for choice in itertools.product(*(op.terms for op in word)):
        panel = _seed_panel_t(space, d)
        # innermost factor is the last element of the word
        for l, r in reversed(choice):
            if r is not None:
                panel = _apply_right_t(space, d, r, panel)
            if l is not None:
                panel = _apply_left_t(space, d, l, panel)
        coo = sp.coo_matrix(panel)
        vac = coo.col % n == 0
        i = coo.col[vac] // n
        j = coo.row[vac]
        np.add.at(out, (i, j), coo.data[vac])
    space._moment_cache[key] = out
    return out


def expectation(op: OpElement) -> np.ndarray:
    return expectation_of_word([op])


def op_norm_bound(op: OpElement) -> float:
    """Cheap upper bound on the operator norm: sum over terms of the
    geometric mean of the 1- and inf-norms of each side."""
    total = 0.0
    for l, r in op.terms:
        factor = 1.0
        for sm in (l, r):
            if sm is None:
                continue
            if sm.kind == "scalar":
                m = np.asarray(sm.mat)
                n1 = np.abs(m).sum(axis=0).max()
                ninf = np.abs(m).sum(axis=1).max()
            else:
                m = sm.mat
                absm = abs(m)
                n1 = absm.sum(axis=0).max()
                ninf = absm.sum(axis=1).max()
            factor *= float(np.sqrt(n1 * ninf))
        total += factor
    return total

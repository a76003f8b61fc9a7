"""Two-faced operator families on truncated Fock models.

A family bundles named left and named right elements together with the
expectation context they live in.  Model builders construct the concrete
families the checks and transform verifiers run on; each builder is
reproducible from its JSON descriptor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matrices as mx
from .fock import FockSpace
from .operators import OpElement, expectation_of_word

__all__ = [
    "OperatorExpectation",
    "TwoFacedFamily",
    "Model",
    "build_model",
    "scalar_pairs_model",
    "matrix_lift_model",
    "creation_pair_model",
    "diag_pair_model",
    "transform_model",
]


class OperatorExpectation:
    """Moment evaluator for decorated words of operator elements.

    Entries are (op, tag, pre, suf); a left-tagged entry is decorated by left
    coefficient multipliers, a right-tagged entry by right ones.  None means
    no decoration.
    """

    def __init__(self, space: FockSpace, d: int):
        self.space = space
        self.d = d
        self.unit = OpElement.identity(space, d)

    def entry_key(self, op: OpElement):
        return op.uid

    def decoration(self, tag: str, b) -> OpElement:
        if tag == "l":
            return OpElement.left_scalar(self.space, self.d, b)
        return OpElement.right_scalar(self.space, self.d, b)

    def moment(self, entries) -> np.ndarray:
        word = []
        for op, tag, pre, suf in entries:
            if pre is not None:
                word.append(self.decoration(tag, pre))
            word.append(op)
            if suf is not None:
                word.append(self.decoration(tag, suf))
        return expectation_of_word(word)

    def expect(self, op: OpElement) -> np.ndarray:
        return expectation_of_word([op])


@dataclass
class TwoFacedFamily:
    """Named left and right elements sharing one expectation context."""

    ctx: OperatorExpectation
    left: dict[str, OpElement]
    right: dict[str, OpElement]
    name: str = ""

    @property
    def d(self) -> int:
        return self.ctx.d

    def op(self, key: str) -> OpElement:
        if key in self.left:
            return self.left[key]
        return self.right[key]

    def side_of(self, key: str) -> str:
        return "l" if key in self.left else "r"

    def probe(self, rng: np.random.Generator, samples: int = 3) -> float:
        """Worst residual of the defining expectation compatibilities:
        E(L_{b1} R_{b2} Z) = b1 E(Z) b2 and E(Z L_b) = E(Z R_b)."""
        space, d = self.ctx.space, self.ctx.d
        worst = 0.0
        ops = list(self.left.values()) + list(self.right.values())
        for op in ops:
            ez = self.ctx.expect(op)
            for _ in range(samples):
                b1 = mx.random_matrix(rng, d)
                b2 = mx.random_matrix(rng, d)
                eps = OpElement.epsilon(space, d, b1, b2)
                lhs = expectation_of_word([eps, op])
                worst = max(worst, mx.max_abs_diff(lhs, b1 @ ez @ b2))
                lb = OpElement.left_scalar(space, d, b1)
                rb = OpElement.right_scalar(space, d, b1)
                worst = max(
                    worst,
                    mx.max_abs_diff(
                        expectation_of_word([op, lb]), expectation_of_word([op, rb])
                    ),
                )
        return worst


@dataclass
class Model:
    """A collection of families on one expectation context, plus the JSON
    descriptor that rebuilds it."""

    ctx: OperatorExpectation
    families: list
    descriptor: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)


def _fock(k: int, depth: int) -> FockSpace:
    return FockSpace(k, depth, max_dim=None)


def _scalar_pair(ctx: OperatorExpectation, letter: int, name: str,
                 shift_left=None, shift_right=None) -> TwoFacedFamily:
    sp_ = ctx.space
    x = OpElement.left_fock(sp_, "l", letter) + OpElement.left_fock(sp_, "l*", letter)
    y = OpElement.right_fock(sp_, "r", letter) + OpElement.right_fock(sp_, "r*", letter)
    if shift_left is not None:
        x = x + OpElement.left_scalar(sp_, 1, shift_left)
    if shift_right is not None:
        y = y + OpElement.right_scalar(sp_, 1, shift_right)
    return TwoFacedFamily(ctx, {"X": x}, {"Y": y}, name=name)


def scalar_pairs_model(pairs: int = 2, depth: int = 6, shared: bool = False,
                       seed: int = 0) -> Model:
    """Semicircular scalar pairs on disjoint generators; bi-free by
    construction.  With shared=True every pair rides the same generator,
    which breaks bi-freeness (negative control)."""
    k = 1 if shared else pairs
    space = _fock(k, depth)
    ctx = OperatorExpectation(space, 1)
    fams = [
        _scalar_pair(ctx, 0 if shared else i, name=f"pair{i}") for i in range(pairs)
    ]
    return Model(ctx, fams, descriptor={
        "kind": "scalar_pairs", "pairs": pairs, "depth": depth,
        "shared": shared, "seed": seed,
    })


def matrix_lift_model(d: int = 2, depth: int = 5, pairs: int = 2,
                      seed: int = 0) -> Model:
    """Lift scalar pairs on disjoint generators to d x d matrices over the
    scalar algebra via the left/right block embeddings."""
    space = _fock(pairs, depth)
    ctx = OperatorExpectation(space, d)
    fams = []
    for kdx in range(pairs):
        l_ = space.op("l", kdx)
        ls = space.op("l*", kdx)
        r_ = space.op("r", kdx)
        rs = space.op("r*", kdx)
        left_entries = [[None] * d for _ in range(d)]
        right_entries = [[None] * d for _ in range(d)]
        for i in range(d):
            for j in range(d):
                if i == j:
                    left_entries[i][j] = l_ + ls
                    right_entries[i][j] = r_ + rs
                elif i < j:
                    left_entries[i][j] = l_
                    right_entries[i][j] = r_
                else:
                    left_entries[i][j] = ls
                    right_entries[i][j] = rs
        fams.append(TwoFacedFamily(
            ctx,
            {"Z": OpElement.left_block(space, d, left_entries, label=f"L(M{kdx})")},
            {"W": OpElement.right_block(space, d, right_entries, label=f"R(M{kdx})")},
            name=f"lift{kdx}",
        ))
    return Model(ctx, fams, descriptor={
        "kind": "matrix_lift", "d": d, "depth": depth, "pairs": pairs, "seed": seed,
    })


@dataclass
class MatrixPair:
    """A pair of families of d x d matrices with scalar-model entries.

    lifted: left/right embeddings at coefficient dimension d.
    entries: the same matrices entrywise as scalar elements (or None for a
    zero entry), for entrywise cumulant work.
    signatures: optional per-entry (letter, +-1) raising/lowering labels, or
    "any" for entries without a single-letter structure; used to prune
    cumulants that vanish by letter counting.
    """

    model: Model
    left_names: list
    right_names: list
    lifted: dict
    entries: dict
    d: int
    scalar_ctx: OperatorExpectation
    signatures: dict = field(default_factory=dict)


def creation_pair_model(d: int = 2, num_k: int = 2, depth: int = 6,
                        perturbed: bool = False, seed: int = 0) -> MatrixPair:
    """Matrices of left/right creation and annihilation operators on d*d*num_k
    orthonormal generators.  The (i,j) entry of the k-th creation matrix
    raises generator (k;i,j); annihilation matrices are arranged transposed.

    perturbed=True plants an extra annihilator in the (0,1) entry of the
    first left creation matrix, coupling mismatched entries.
    """
    space = _fock(num_k * d * d, depth)
    ctx = OperatorExpectation(space, d)
    sctx = OperatorExpectation(space, 1)

    def letter(k, i, j):
        return k * d * d + i * d + j

    lifted = {}
    entries = {}
    signatures = {}
    left_names = []
    right_names = []
    for k in range(num_k):
        cre_l = [[space.op("l", letter(k, i, j)) for j in range(d)] for i in range(d)]
        ann_l = [[space.op("l*", letter(k, j, i)) for j in range(d)] for i in range(d)]
        cre_r = [[space.op("r", letter(k, i, j)) for j in range(d)] for i in range(d)]
        ann_r = [[space.op("r*", letter(k, j, i)) for j in range(d)] for i in range(d)]
        cre_sig = [[(letter(k, i, j), +1) for j in range(d)] for i in range(d)]
        ann_sig = [[(letter(k, j, i), -1) for j in range(d)] for i in range(d)]
        if perturbed and k == 0:
            cre_l[0][1] = cre_l[0][1] + space.op("l*", letter(0, 0, 0))
            cre_r[0][1] = cre_r[0][1] + space.op("r*", letter(0, 0, 0))
            cre_sig = [[c for c in row] for row in cre_sig]
            cre_sig[0][1] = "any"
        for name, grid, side in [
            (f"c{k}", cre_l, "l"), (f"a{k}", ann_l, "l"),
            (f"C{k}", cre_r, "r"), (f"A{k}", ann_r, "r"),
        ]:
            signatures[name] = cre_sig if name.lower().startswith("c") else ann_sig
            if side == "l":
                lifted[name] = OpElement.left_block(space, d, grid, label=f"L[{name}]")
                left_names.append(name)
            else:
                lifted[name] = OpElement.right_block(space, d, grid, label=f"R[{name}]")
                right_names.append(name)
            ent = [[None] * d for _ in range(d)]
            for i in range(d):
                for j in range(d):
                    make = OpElement.left_block if side == "l" else OpElement.right_block
                    ent[i][j] = make(space, 1, [[grid[i][j]]], label=f"{name}[{i}{j}]")
            entries[name] = ent
    fam = TwoFacedFamily(ctx, {n: lifted[n] for n in left_names},
                         {n: lifted[n] for n in right_names}, name="creation")
    model = Model(ctx, [fam], descriptor={
        "kind": "creation_pair", "d": d, "num_k": num_k, "depth": depth,
        "perturbed": perturbed, "seed": seed,
    })
    return MatrixPair(model, left_names, right_names, lifted, entries, d, sctx,
                      signatures=signatures)


def diag_pair_model(d: int = 2, depth: int = 6, shared: bool = False,
                    seed: int = 0) -> MatrixPair:
    """Diagonal matrices diag(X_1..X_d), diag(Y_1..Y_d) with (X_k, Y_k)
    semicircular pairs on disjoint generators (shared=False) or all on one
    generator (shared=True, breaking bi-freeness of the slots)."""
    space = _fock(1 if shared else d, depth)
    ctx = OperatorExpectation(space, d)
    sctx = OperatorExpectation(space, 1)
    zl = [[None] * d for _ in range(d)]
    zr = [[None] * d for _ in range(d)]
    for i in range(d):
        g = 0 if shared else i
        zl[i][i] = space.op("l", g) + space.op("l*", g)
        zr[i][i] = space.op("r", g) + space.op("r*", g)
    lifted = {
        "Zl": OpElement.left_block(space, d, zl, label="L[diag]"),
        "Zr": OpElement.right_block(space, d, zr, label="R[diag]"),
    }
    entries = {
        "Zl": [[OpElement.left_block(space, 1, [[zl[i][j]]]) if zl[i][j] is not None
                else None for j in range(d)] for i in range(d)],
        "Zr": [[OpElement.right_block(space, 1, [[zr[i][j]]]) if zr[i][j] is not None
                else None for j in range(d)] for i in range(d)],
    }
    fam = TwoFacedFamily(ctx, {"Zl": lifted["Zl"]}, {"Zr": lifted["Zr"]}, name="diag")
    model = Model(ctx, [fam], descriptor={
        "kind": "diag_pair", "d": d, "depth": depth, "shared": shared, "seed": seed,
    })
    return MatrixPair(model, ["Zl"], ["Zr"], lifted, entries, d, sctx)


def transform_model(d: int = 2, order: int = 6, seed: int = 3,
                    pairs: int = 2, depth: int | None = None,
                    scale: float = 0.3) -> Model:
    """Shifted semicircular pairs for the transform verifiers.

    Each pair rides its own generator; the shifts are lifted coefficient
    matrices I + 0.1 * (random hermitian), so every mean is invertible with
    margin.  The semicircular part is scaled down so that the norm of each
    element times the norm of its inverse mean stays small; that ratio sets
    the decay rate of every series the verifiers truncate.  Depth defaults
    to 2 * order + 2, enough for products of two elements per series slot.
    """
    if depth is None:
        depth = 2 * order + 2
    space = _fock(pairs, depth)
    ctx = OperatorExpectation(space, d)
    rng = np.random.default_rng(seed)
    fams = []
    for i in range(pairs):
        h = mx.random_matrix(rng, d, scale=0.1)
        cl = np.eye(d) + (h + h.conj().T) / 2
        h = mx.random_matrix(rng, d, scale=0.1)
        cr = np.eye(d) + (h + h.conj().T) / 2
        x = scale * (OpElement.left_block(space, d, _scalar_diag(space, d, "l", i))
                     + OpElement.left_block(space, d, _scalar_diag(space, d, "l*", i)))
        x = x + OpElement.left_scalar(space, d, cl)
        y = scale * (OpElement.right_block(space, d, _scalar_diag(space, d, "r", i))
                     + OpElement.right_block(space, d, _scalar_diag(space, d, "r*", i)))
        y = y + OpElement.right_scalar(space, d, cr)
        fams.append(TwoFacedFamily(ctx, {"X": x}, {"Y": y}, name=f"pair{i}"))
    return Model(ctx, fams, descriptor={
        "kind": "transform", "d": d, "order": order, "seed": seed,
        "pairs": pairs, "depth": depth, "scale": scale,
    })


def _scalar_diag(space, d, kind, letter):
    op = space.op(kind, letter)
    return [[op if i == j else None for j in range(d)] for i in range(d)]


_BUILDERS = {
    "scalar_pairs": scalar_pairs_model,
    "matrix_lift": matrix_lift_model,
    "creation_pair": creation_pair_model,
    "diag_pair": diag_pair_model,
    "transform": transform_model,
}


def build_model(descriptor: dict):
    """Rebuild a model (or matrix pair) from its JSON descriptor."""
    desc = dict(descriptor)
    kind = desc.pop("kind")
    if kind not in _BUILDERS:
        raise ValueError(f"unknown model kind {kind!r}; have {sorted(_BUILDERS)}")
    return _BUILDERS[kind](**desc)

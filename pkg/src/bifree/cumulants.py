"""Bi-multiplicative moment and cumulant evaluation.

The moment function on a partition is the unique bi-multiplicative extension
of the plain expectation: it is computed here by pulling everything back to
the flat (reading-order) picture, repeatedly extracting an interval block,
evaluating it, and splicing the resulting coefficient onto the neighbouring
entry.  Cumulants are Moebius sums of partitioned moments over refinements;
the same reduction run with full-cumulant leaves gives the fast path.

The engine is generic over an expectation context: any object with a ``d``
attribute and a ``moment(entries)`` method, where entries are
``(op, tag, pre, suf)`` with side tag 'l' or 'r' and optional d x d
decorations.  Operator models and table-specified families both implement
that protocol.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import matrices as mx
from .moebius import mobius, refinements
from .partitions import BncPartition, ChiShape, HatEmbedding, enumerate_bnc, join

__all__ = [
    "entry",
    "entries_shape",
    "eval_moment_full",
    "eval_moment_pi",
    "eval_cumulant_pi",
    "eval_cumulant_full",
    "moments_from_cumulants",
    "cumulant_of_products",
    "kappa_Z_omega",
    "omega_shape",
    "verify_interchange",
    "verify_tail_swap",
    "CumulantSpec",
    "SpecifiedExpectation",
    "SpecifiedFamily",
    "UNIT",
    "ZERO",
]


def entry(op, tag: str, pre=None, suf=None):
    if tag not in ("l", "r"):
        raise ValueError("tag must be 'l' or 'r'")
    return (op, tag, pre, suf)


def entries_shape(entries) -> ChiShape:
    return ChiShape(tuple(e[1] for e in entries))


def _comb(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a @ b


def _fingerprint(ctx, entries):
    out = []
    for op, tag, pre, suf in entries:
        out.append((
            ctx.entry_key(op),
            tag,
            None if pre is None else np.asarray(pre).tobytes(),
            None if suf is None else np.asarray(suf).tobytes(),
        ))
    return tuple(out)


def _ctx_cache(ctx, name):
    cache = getattr(ctx, name, None)
    if cache is None:
        cache = {}
        setattr(ctx, name, cache)
    return cache


# ---------------------------------------------------------------------------
# the reduction engine


def _to_flat(shape: ChiShape, entries):
    """records per rank: (pos, op, tag, fpre, fsuf) in flat coordinates.

    Left entries keep their decorations; right entries swap them, which is
    the translation making the flat picture an ordinary multiplicative one.
    """
    rank = shape.rank
    recs = {}
    for pos, (op, tag, pre, suf) in enumerate(entries):
        if tag == "l":
            recs[rank[pos]] = (pos, op, tag, pre, suf)
        else:
            recs[rank[pos]] = (pos, op, tag, suf, pre)
    return recs


def _leaf_entries(recs, block):
    """Decorated sub-word of one block, back in operator conventions and in
    original position order."""
    items = sorted((recs[r] for r in block), key=lambda rec: rec[0])
    out = []
    for pos, op, tag, fpre, fsuf in items:
        if tag == "l":
            out.append((op, tag, fpre, fsuf))
        else:
            out.append((op, tag, fsuf, fpre))
    return tuple(out)


def _components(blocks):
    """Group blocks into runs whose rank spans overlap, in rank order."""
    spans = sorted(((min(b), max(b), b) for b in blocks), key=lambda s: s[0])
    comps = []
    cur = []
    cur_end = -1
    for lo, hi, b in spans:
        if cur and lo > cur_end:
            comps.append(cur)
            cur = []
            cur_end = -1
        cur.append(b)
        cur_end = max(cur_end, hi)
    if cur:
        comps.append(cur)
    return comps


def _reduce(d, recs, blocks, leaf, attach="pred"):
    """Evaluate the bi-multiplicative extension over the given flat blocks."""
    comps = _components(blocks)
    if len(comps) > 1:
        value = None
        for comp in comps:
            value = _comb(value, _reduce(d, recs, comp, leaf, attach))
        return value if value is not None else mx.eye(d)
    blocks = comps[0]
    if len(blocks) == 1:
        return leaf(recs, blocks[0])
    present = sorted(r for b in blocks for r in b)
    first, last = present[0], present[-1]
    intervals = []
    pos_of = {r: i for i, r in enumerate(present)}
    for b in blocks:
        idxs = sorted(pos_of[r] for r in b)
        if idxs[-1] - idxs[0] + 1 == len(idxs) and first not in b and last not in b:
            intervals.append(b)
    if not intervals:
        raise RuntimeError("no extractable interval block; partition not nested")
    block = min(intervals, key=min)
    value = leaf(recs, block)
    recs = dict(recs)
    lo, hi = min(block), max(block)
    if attach == "pred":
        target = max(r for r in present if r < lo and r not in block)
        pos, op, tag, fpre, fsuf = recs[target]
        recs[target] = (pos, op, tag, fpre, _comb(fsuf, value))
    else:
        target = min(r for r in present if r > hi and r not in block)
        pos, op, tag, fpre, fsuf = recs[target]
        recs[target] = (pos, op, tag, _comb(value, fpre), fsuf)
    rest = [b for b in blocks if b is not block]
    return _reduce(d, recs, rest, leaf, attach)


# ---------------------------------------------------------------------------
# moment and cumulant functions


def eval_moment_full(ctx, entries) -> np.ndarray:
    """Expectation of the decorated word in its given order."""
    return ctx.moment(tuple(entries))


def eval_moment_pi(ctx, part: BncPartition, entries, attach="pred") -> np.ndarray:
    entries = tuple(entries)
    shape = entries_shape(entries)
    if part.shape != shape:
        raise ValueError("partition shape does not match entry tags")
    key = (part.blocks, _fingerprint(ctx, entries), attach)
    cache = _ctx_cache(ctx, "_moment_pi_cache")
    if key in cache:
        return cache[key]
    recs = _to_flat(shape, entries)
    blocks = [frozenset(shape.rank[p] for p in blk) for blk in part.blocks]

    def leaf(rs, block):
        return ctx.moment(_leaf_entries(rs, block))

    out = _reduce(ctx.d, recs, blocks, leaf, attach)
    cache[key] = out
    return out


def eval_cumulant_pi(ctx, part: BncPartition, entries, method: str = "auto",
                     attach="pred") -> np.ndarray:
    """Cumulant on a partition.

    method 'mobius' runs the defining sum over refinements; 'reduce' expands
    bi-multiplicatively with full cumulants as leaves; 'auto' uses the
    Moebius sum on the one-block partition and the reduction otherwise.
    """
    entries = tuple(entries)
    shape = entries_shape(entries)
    if part.shape != shape:
        raise ValueError("partition shape does not match entry tags")
    if method == "auto":
        method = "mobius" if len(part.blocks) == 1 else "reduce"
    key = (part.blocks, _fingerprint(ctx, entries), method, attach)
    cache = _ctx_cache(ctx, "_kappa_cache")
    if key in cache:
        return cache[key]
    if method == "mobius":
        total = None
        for sigma in refinements(part):
            mu = mobius(sigma, part)
            if mu == 0:
                continue
            term = eval_moment_pi(ctx, sigma, entries, attach)
            total = term * mu if total is None else total + term * mu
        out = total if total is not None else np.zeros((ctx.d, ctx.d), complex)
    elif method == "reduce":
        recs = _to_flat(shape, entries)
        blocks = [frozenset(shape.rank[p] for p in blk) for blk in part.blocks]

        def leaf(rs, block):
            sub = _leaf_entries(rs, block)
            subshape = entries_shape(sub)
            return eval_cumulant_pi(ctx, BncPartition.maximal(subshape), sub,
                                    method="mobius", attach=attach)

        out = _reduce(ctx.d, recs, blocks, leaf, attach)
    else:
        raise ValueError(f"unknown method {method!r}")
    cache[key] = out
    return out


def eval_cumulant_full(ctx, entries, attach="pred") -> np.ndarray:
    entries = tuple(entries)
    shape = entries_shape(entries)
    return eval_cumulant_pi(ctx, BncPartition.maximal(shape), entries,
                            method="mobius", attach=attach)


def moments_from_cumulants(ctx, part: BncPartition, entries) -> np.ndarray:
    """Recover the partitioned moment as the sum of cumulants over all
    refinements; inverse of the Moebius sum."""
    entries = tuple(entries)
    total = None
    for pi in refinements(part):
        term = eval_cumulant_pi(ctx, pi, entries, method="reduce")
        total = term if total is None else total + term
    return total if total is not None else np.zeros((ctx.d, ctx.d), complex)


# ---------------------------------------------------------------------------
# cumulants of products


@dataclass
class ProductsCheck:
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def residual(self) -> float:
        return mx.max_abs_diff(self.lhs, self.rhs)


def cumulant_of_products(ctx, emb: HatEmbedding, inner_ops) -> ProductsCheck:
    """Grouped-argument cumulant against the join-filtered sum.

    inner_ops are undecorated elements matching the inner shape; groups are
    multiplied in the operator algebra for the left side.
    """
    inner_shape = emb.inner
    if len(inner_ops) != inner_shape.n:
        raise ValueError("inner op count does not match embedding")
    grouped = []
    for p in range(emb.outer.n):
        ops = [inner_ops[q] for q in emb.group(p)]
        prod = ops[0]
        for op in ops[1:]:
            prod = prod * op
        grouped.append(entry(prod, emb.outer.tags[p]))
    lhs = eval_cumulant_full(ctx, grouped)
    zero_hat = emb.zero_hat()
    top = BncPartition.maximal(inner_shape)
    inner_entries = tuple(entry(op, t) for op, t in zip(inner_ops, inner_shape.tags))
    rhs = None
    for sigma in enumerate_bnc(inner_shape):
        if join(sigma, zero_hat) != top:
            continue
        term = eval_cumulant_pi(ctx, sigma, inner_entries, method="reduce")
        rhs = term if rhs is None else rhs + term
    return ProductsCheck(lhs, rhs if rhs is not None else np.zeros((ctx.d, ctx.d)))


# ---------------------------------------------------------------------------
# word-indexed cumulants with one coefficient per adjacent slot


def omega_shape(family, omega) -> ChiShape:
    return ChiShape(tuple(family.side_of(k) for k in omega))


def _omega_entries(family, omega, bs):
    """Decorated tuple for the word-indexed cumulant/moment conventions.

    All-left and all-right words put each coefficient as a prefix on the
    following element.  Mixed words leave the first element and the first
    element of the later-starting side bare, shift prefixes accordingly, and
    attach the final coefficient as a suffix on the last element.
    """
    n = len(omega)
    if len(bs) != max(n - 1, 0):
        raise ValueError("need one coefficient per adjacent slot")
    tags = [family.side_of(k) for k in omega]
    ops = [family.op(k) for k in omega]
    sides = set(tags)
    if len(sides) == 1 or n == 1:
        ents = [entry(ops[0], tags[0])]
        for p in range(1, n):
            ents.append(entry(ops[p], tags[p], pre=bs[p - 1]))
        return tuple(ents)
    k_l = tags.index("l") + 1
    k_r = tags.index("r") + 1
    k0 = max(k_l, k_r)
    ents = []
    for p in range(1, n + 1):
        if p == 1 or p == k0:
            pre = None
        elif p < k0:
            pre = bs[p - 2]
        else:
            pre = bs[p - 3] if p > k0 else None
        suf = bs[n - 2] if p == n else None
        ents.append(entry(ops[p - 1], tags[p - 1], pre=pre, suf=suf))
    return tuple(ents)


def kappa_Z_omega(family, omega, bs) -> np.ndarray:
    """Word-indexed cumulant with one coefficient per adjacent slot."""
    ents = _omega_entries(family, omega, bs)
    return eval_cumulant_full(family.ctx, ents)


def mu_Z_omega(family, omega, bs) -> np.ndarray:
    """The matching word-indexed moment."""
    ents = _omega_entries(family, omega, bs)
    return eval_moment_full(family.ctx, ents)


# ---------------------------------------------------------------------------
# interchange and tail-swap checks


@dataclass
class SwapReport:
    hypothesis_residual: float
    residual: float
    hypothesis_ok: bool

    def ok(self, tol: float) -> bool:
        return self.hypothesis_ok and self.residual <= tol


def _hypothesis_probe(ctx, probes, mid1, mid2, rng, samples: int = 4) -> float:
    """Worst over random sandwiches of | E(Z mid1 Z') - E(Z mid2 Z') |."""
    worst = 0.0
    pool = list(probes)
    for _ in range(samples):
        nl = rng.integers(0, 3)
        nr = rng.integers(0, 3)
        front = [pool[rng.integers(len(pool))] for _ in range(nl)] if pool else []
        back = [pool[rng.integers(len(pool))] for _ in range(nr)] if pool else []
        m1 = ctx.moment(tuple(front + mid1 + back))
        m2 = ctx.moment(tuple(front + mid2 + back))
        worst = max(worst, mx.max_abs_diff(m1, m2))
    return worst


def verify_interchange(ctx, left_entries, x_op, y_op, right_entries, rng,
                       probes=(), hyp_tol: float = 1e-9) -> SwapReport:
    """Adjacent left/right arguments with interchangeable expectations give
    equal cumulants after swapping them and their tags."""
    x_ent = entry(x_op, "l")
    y_ent = entry(y_op, "r")
    hyp = _hypothesis_probe(
        ctx,
        [entry(p, t) for p, t in probes],
        [x_ent, y_ent],
        [y_ent, x_ent],
        rng,
    )
    lhs = eval_cumulant_full(ctx, tuple(left_entries) + (x_ent, y_ent) + tuple(right_entries))
    rhs = eval_cumulant_full(ctx, tuple(left_entries) + (y_ent, x_ent) + tuple(right_entries))
    return SwapReport(hyp, mx.max_abs_diff(lhs, rhs), hyp <= hyp_tol)


def verify_tail_swap(ctx, lead_entries, x_op, y_op, rng, probes=(),
                     hyp_tol: float = 1e-9) -> SwapReport:
    """A trailing left argument may be retagged right when E(Z X) = E(Z Y)."""
    x_ent = entry(x_op, "l")
    y_ent = entry(y_op, "r")
    hyp = _hypothesis_probe(
        ctx,
        [entry(p, t) for p, t in probes],
        [x_ent],
        [y_ent],
        rng,
        samples=6,
    )
    lhs = eval_cumulant_full(ctx, tuple(lead_entries) + (x_ent,))
    rhs = eval_cumulant_full(ctx, tuple(lead_entries) + (y_ent,))
    return SwapReport(hyp, mx.max_abs_diff(lhs, rhs), hyp <= hyp_tol)


# ---------------------------------------------------------------------------
# families with table-specified cumulants

UNIT = "__unit__"
ZERO = "__zero__"


@dataclass
class CumulantSpec:
    """Finitely supported table of word-indexed cumulants.

    theta(omega, bs) returns the cumulant for the word omega over the index
    sets, multilinear in the len(omega)-1 coefficient slots; words longer
    than max_order must evaluate to zero.
    """

    d: int
    left_keys: tuple
    right_keys: tuple
    theta: callable
    max_order: int

    def side_of(self, key: str) -> str:
        if key in self.left_keys:
            return "l"
        if key in self.right_keys:
            return "r"
        raise KeyError(key)

    def validate(self, rng, samples: int = 6, tol: float = 1e-9) -> None:
        """Spot-check multilinearity of the table in each slot."""
        keys = list(self.left_keys) + list(self.right_keys)
        for _ in range(samples):
            n = int(rng.integers(2, max(self.max_order, 2) + 1))
            omega = tuple(keys[rng.integers(len(keys))] for _ in range(n))
            slot = int(rng.integers(n - 1))
            bs = [mx.random_matrix(rng, self.d) for _ in range(n - 1)]
            b2 = mx.random_matrix(rng, self.d)
            alpha = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
            mixed = list(bs)
            mixed[slot] = alpha * bs[slot] + b2
            lhs = self.theta(omega, tuple(mixed))
            one = self.theta(omega, tuple(bs))
            two = list(bs)
            two[slot] = b2
            rhs = alpha * one + self.theta(omega, tuple(two))
            if mx.max_abs_diff(lhs, rhs) > tol:
                raise ValueError("cumulant table is not multilinear in its slots")


def _slot_positions(tags):
    """Map each flat between-slot (after flat rank j, 1-based) to the index of
    the coefficient occupying it in the word-indexed conventions."""
    n = len(tags)
    shape = ChiShape(tuple(tags))
    markers = [[None, None] for _ in range(n)]  # operator-side pre, suf markers
    sides = set(tags)
    if len(sides) == 1 or n == 1:
        for p in range(1, n):
            markers[p][0] = p - 1  # coefficient index occupying prefix of p
    else:
        k_l = tags.index("l")
        k_r = tags.index("r")
        k0 = max(k_l, k_r)  # 0-based position of the later-starting side
        for p in range(1, n):
            if p == k0:
                continue
            markers[p][0] = (p - 1) if p < k0 else (p - 2)
        markers[n - 1][1] = n - 2
    # translate to flat records
    fpre = [None] * n
    fsuf = [None] * n
    for p in range(n):
        if tags[p] == "l":
            fpre[p], fsuf[p] = markers[p]
        else:
            fsuf[p], fpre[p] = markers[p]
    perm = shape.permutation
    slots = []
    for j in range(n - 1):
        a = fsuf[perm[j]]
        b = fpre[perm[j + 1]]
        if a is not None and b is not None:
            raise AssertionError("two coefficients in one slot")
        slots.append(a if a is not None else b)
    if any(s is None for s in slots) or fpre[perm[0]] is not None or \
            fsuf[perm[-1]] is not None:
        raise AssertionError("slot layout does not match the word conventions")
    return slots


class SpecifiedExpectation:
    """Expectation determined by a cumulant table through one fixed
    bi-multiplicative reduction schedule."""

    def __init__(self, spec: CumulantSpec):
        self.spec = spec
        self.d = spec.d
        self._cache: dict = {}

    def entry_key(self, op):
        return op

    def side_of(self, key):
        return self.spec.side_of(key)

    # -- the table on one block --------------------------------------------

    def _theta_full(self, recs, block):
        items = sorted((recs[r] for r in block), key=lambda rec: rec[0])
        d = self.d
        syms = [op for _, op, _, _, _ in items]
        if all(s == UNIT for s in syms):
            value = mx.eye(d)
            for _, _, _, fp, fs in items:
                piece = _comb(fp, fs)
                if piece is not None:
                    value = value @ piece
            return value
        if any(s == UNIT or s == ZERO for s in syms):
            # units inside non-trivial blocks vanish in cumulants; zeros kill
            if any(s == ZERO for s in syms):
                return np.zeros((d, d), complex)
            return np.zeros((d, d), complex)
        tags = [t for _, _, t, _, _ in items]
        order = {pos: i for i, (pos, *_rest) in enumerate(items)}
        n = len(items)
        if n > self.spec.max_order:
            return np.zeros((d, d), complex)
        omega = tuple(syms)
        if n == 1:
            pos, op, tag, fp, fs = items[0]
            core = self.spec.theta(omega, ())
            return _comb(_comb(fp, core), fs)
        # flat structure within the block
        sub_shape = ChiShape(tuple(tags))
        perm = sub_shape.permutation
        fpre = [it[3] for it in items]
        fsuf = [it[4] for it in items]
        slots = []
        for j in range(n - 1):
            a = fsuf[perm[j]]
            b = fpre[perm[j + 1]]
            slots.append(_comb(a, b) if (a is not None or b is not None) else None)
        placement = _slot_positions(tuple(tags))
        args = [None] * (n - 1)
        for j, argidx in enumerate(placement):
            args[argidx] = slots[j] if slots[j] is not None else mx.eye(d)
        core = self.spec.theta(omega, tuple(args))
        edge_l = fpre[perm[0]]
        edge_r = fsuf[perm[-1]]
        return _comb(_comb(edge_l, core), edge_r)

    # -- the moment ----------------------------------------------------------

    def moment(self, entries) -> np.ndarray:
        entries = self._normalize(entries)
        if entries is None:
            return np.zeros((self.d, self.d), complex)
        key = _fingerprint(self, entries)
        if key in self._cache:
            return self._cache[key]
        if len(entries) == 1 and entries[0][0] == UNIT:
            pre = entries[0][2]
            value = pre if pre is not None else mx.eye(self.d)
            self._cache[key] = value
            return value
        shape = entries_shape(entries)
        recs = _to_flat(shape, entries)
        total = None
        for part in enumerate_bnc(shape):
            blocks = [frozenset(shape.rank[p] for p in blk) for blk in part.blocks]
            term = _reduce(self.d, recs, blocks, self._theta_full, "pred")
            total = term if total is None else total + term
        self._cache[key] = total
        return total

    def _normalize(self, entries):
        """Rewrite a decorated word into the canonical form with one
        coefficient before each element and a single trailing coefficient,
        by floating side multipliers past the elements of the other side.
        Returns None when a zero element occurs."""
        pend_l = None
        pend_r = None
        out = []
        for op, tag, pre, suf in entries:
            if op == ZERO:
                return None
            if op == UNIT:
                if tag == "l":
                    pend_l = _comb(pend_l, _comb(pre, suf))
                else:
                    pend_r = _comb(_comb(suf, pre), pend_r)
                continue
            if tag == "l":
                out.append([op, tag, _comb(pend_l, pre)])
                pend_l = suf
            else:
                out.append([op, tag, _comb(pre, pend_r)])
                pend_r = suf
        tail = _comb(pend_l, pend_r)
        if not out:
            return ((UNIT, "l", tail, None),)
        ents = [(op, tag, pre, None) for op, tag, pre in out[:-1]]
        op, tag, pre = out[-1]
        ents.append((op, tag, pre, tail))
        return tuple(ents)


@dataclass
class SpecifiedFamily:
    """Family facade over a specified expectation, mirroring the operator
    families' surface."""

    ctx: SpecifiedExpectation
    left: dict
    right: dict
    name: str = ""

    @staticmethod
    def from_spec(spec: CumulantSpec, name: str = "") -> "SpecifiedFamily":
        ctx = SpecifiedExpectation(spec)
        return SpecifiedFamily(
            ctx,
            {k: k for k in spec.left_keys},
            {k: k for k in spec.right_keys},
            name=name,
        )

    @property
    def d(self) -> int:
        return self.ctx.d

    def op(self, key):
        return key

    def side_of(self, key):
        return self.ctx.side_of(key)

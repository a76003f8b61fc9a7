"""Bi-non-crossing partition lattices.

Positions carry a side tag, 'l' or 'r'.  Reading the left positions in
increasing order and then the right positions in decreasing order defines a
permutation of the positions; a partition is bi-non-crossing when it becomes
non-crossing after relabelling through that permutation.  Everything in this
module works on that reordered ("flat") picture and pushes results back.

Positions are 0-based internally.  CLI-facing formatting uses the 1-based
``1_l .. n_l, 1_r .. m_r`` labels for two-sided shapes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache, reduce

__all__ = [
    "ChiShape",
    "BncPartition",
    "HatEmbedding",
    "MalformedPartitionError",
    "NotBiNonCrossingError",
    "EnumerationBoundError",
    "enumerate_nc",
    "is_noncrossing",
    "enumerate_bnc",
    "is_bnc",
    "refines",
    "join",
    "meet",
    "kreweras",
    "enumerate_bnc_prime",
    "enumerate_bnc_vs",
    "enumerate_bnc_T",
    "enumerate_bnc_T_oprime",
    "enumerate_bnc_S",
    "enumerate_bnc_S_oprime",
    "catalan",
    "DEFAULT_ENUMERATION_BOUND",
]

DEFAULT_ENUMERATION_BOUND = 12


class MalformedPartitionError(ValueError):
    """Blocks overlap, are empty, or do not cover all positions."""


class NotBiNonCrossingError(ValueError):
    """A partition fails the bi-non-crossing test for its shape."""


class EnumerationBoundError(ValueError):
    """Requested enumeration exceeds the configured size bound."""


def catalan(n: int) -> int:
    c = 1
    for i in range(n):
        c = c * 2 * (2 * i + 1) // (i + 2)
    return c


# ---------------------------------------------------------------------------
# shapes


@dataclass(frozen=True)
class ChiShape:
    """A sequence of side tags with its derived reordering permutation."""

    tags: tuple[str, ...]

    def __post_init__(self):
        if any(t not in ("l", "r") for t in self.tags):
            raise ValueError("tags must be 'l' or 'r'")

    @staticmethod
    def from_string(s: str) -> "ChiShape":
        return ChiShape(tuple(s))

    @staticmethod
    def two_sided(n: int, m: int) -> "ChiShape":
        """n left tags followed by m right tags."""
        return ChiShape(("l",) * n + ("r",) * m)

    @staticmethod
    def all_left(n: int) -> "ChiShape":
        return ChiShape(("l",) * n)

    @staticmethod
    def all_right(n: int) -> "ChiShape":
        return ChiShape(("r",) * n)

    @property
    def n(self) -> int:
        return len(self.tags)

    @property
    def permutation(self) -> tuple[int, ...]:
        """Position read at each slot: lefts ascending, then rights descending."""
        lefts = [i for i, t in enumerate(self.tags) if t == "l"]
        rights = [i for i, t in enumerate(self.tags) if t == "r"]
        return tuple(lefts + rights[::-1])

    @property
    def rank(self) -> tuple[int, ...]:
        """rank[p] = slot at which position p is read (inverse permutation)."""
        inv = [0] * self.n
        for slot, pos in enumerate(self.permutation):
            inv[pos] = slot
        return tuple(inv)

    def to_flat(self, positions) -> frozenset[int]:
        rank = self.rank
        return frozenset(rank[p] for p in positions)

    def from_flat(self, slots) -> tuple[int, ...]:
        perm = self.permutation
        return tuple(sorted(perm[s] for s in slots))

    def label(self, p: int) -> str:
        """1-based side label of position p, e.g. '2_l'."""
        side = self.tags[p]
        k = sum(1 for q in range(p + 1) if self.tags[q] == side)
        return f"{k}_{side}"

    def __str__(self):
        return "".join(self.tags)


# ---------------------------------------------------------------------------
# non-crossing partitions of a flat range


@lru_cache(maxsize=None)
def enumerate_nc(n: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """All non-crossing partitions of range(n), each as a tuple of sorted blocks
    ordered by minimum.  There are catalan(n) of them."""
    if n == 0:
        return ((),)
    results = []

    def first_blocks(start: int):
        # increasing sequences starting at `start`; yields (block, gap segments)
        block = [start]
        segments = []

        def extend(prev: int):
            yield tuple(block), tuple(segments) + ((prev + 1, n),)
            for nxt in range(prev + 1, n):
                block.append(nxt)
                segments.append((prev + 1, nxt))
                yield from extend(nxt)
                segments.pop()
                block.pop()

        yield from extend(start)

    for block, segments in first_blocks(0):
        gap_parts = []
        for a, b in segments:
            size = b - a
            shifted = [
                tuple(tuple(x + a for x in blk) for blk in p) for p in enumerate_nc(size)
            ]
            gap_parts.append(shifted)
        for combo in itertools.product(*gap_parts):
            blocks = [block]
            for part in combo:
                blocks.extend(part)
            blocks.sort(key=lambda b: b[0])
            results.append(tuple(blocks))
    return tuple(results)


def is_noncrossing(blocks) -> bool:
    """Stack test on blocks of integers in their natural order."""
    owner = {}
    maxima = {}
    for i, blk in enumerate(blocks):
        for x in blk:
            owner[x] = i
        maxima[i] = max(blk)
    stack = []
    opened = set()
    for x in sorted(owner):
        b = owner[x]
        if stack and stack[-1] == b:
            pass
        elif b in opened:
            return False
        else:
            stack.append(b)
            opened.add(b)
        if x == maxima[b]:
            if stack[-1] != b:
                return False
            stack.pop()
    return True


# ---------------------------------------------------------------------------
# bi-non-crossing partitions


@dataclass(frozen=True)
class BncPartition:
    """A bi-non-crossing partition, stored canonically.

    Blocks are tuples of positions sorted by the shape's reading order, and the
    blocks themselves are sorted by the reading rank of their first element.
    """

    shape: ChiShape
    blocks: tuple[tuple[int, ...], ...]

    @staticmethod
    def make(shape: ChiShape, blocks) -> "BncPartition":
        """Validate and canonicalize; raises on malformed or crossing input."""
        seen = set()
        cleaned = []
        for blk in blocks:
            blk = tuple(blk)
            if not blk:
                raise MalformedPartitionError("empty block")
            for x in blk:
                if x in seen:
                    raise MalformedPartitionError(f"position {x} repeated")
                seen.add(x)
            cleaned.append(blk)
        if seen != set(range(shape.n)):
            raise MalformedPartitionError("blocks do not cover all positions")
        part = BncPartition._canonical(shape, cleaned)
        flat = [sorted(shape.rank[p] for p in blk) for blk in part.blocks]
        if not is_noncrossing(flat):
            raise NotBiNonCrossingError(f"{part.blocks} crosses for shape {shape}")
        return part

    @staticmethod
    def _canonical(shape: ChiShape, blocks) -> "BncPartition":
        rank = shape.rank
        blks = tuple(
            sorted(
                (tuple(sorted(b, key=lambda p: rank[p])) for b in blocks),
                key=lambda b: rank[b[0]],
            )
        )
        return BncPartition(shape, blks)

    @staticmethod
    def from_flat(shape: ChiShape, flat_blocks) -> "BncPartition":
        perm = shape.permutation
        return BncPartition._canonical(
            shape, [[perm[s] for s in blk] for blk in flat_blocks]
        )

    def flat_blocks(self) -> tuple[tuple[int, ...], ...]:
        rank = self.shape.rank
        return tuple(
            sorted(
                (tuple(sorted(rank[p] for p in blk)) for blk in self.blocks),
                key=lambda b: b[0],
            )
        )

    @staticmethod
    def minimal(shape: ChiShape) -> "BncPartition":
        return BncPartition._canonical(shape, [[p] for p in range(shape.n)])

    @staticmethod
    def maximal(shape: ChiShape) -> "BncPartition":
        return BncPartition._canonical(shape, [list(range(shape.n))])

    def block_of(self, p: int) -> tuple[int, ...]:
        for blk in self.blocks:
            if p in blk:
                return blk
        raise KeyError(p)

    def __len__(self):
        return len(self.blocks)

    def __str__(self):
        parts = []
        for blk in self.blocks:
            parts.append("{" + ",".join(self.shape.label(p) for p in blk) + "}")
        return " ".join(parts)


def is_bnc(shape: ChiShape, blocks) -> bool:
    try:
        BncPartition.make(shape, blocks)
    except NotBiNonCrossingError:
        return False
    return True


def enumerate_bnc(shape: ChiShape, bound: int = DEFAULT_ENUMERATION_BOUND):
    """All bi-non-crossing partitions for the shape, by pushing the flat
    non-crossing enumeration forward through the reading permutation."""
    if shape.n > bound:
        raise EnumerationBoundError(f"n={shape.n} exceeds bound {bound}")
    return [BncPartition.from_flat(shape, flat) for flat in enumerate_nc(shape.n)]


# ---------------------------------------------------------------------------
# lattice structure


def refines(pi: BncPartition, sigma: BncPartition) -> bool:
    if pi.shape != sigma.shape:
        raise ValueError("shape mismatch")
    owner = {}
    for i, blk in enumerate(sigma.blocks):
        for x in blk:
            owner[x] = i
    return all(len({owner[x] for x in blk}) == 1 for blk in pi.blocks)


def meet(pi: BncPartition, sigma: BncPartition) -> BncPartition:
    """Common refinement; always bi-non-crossing."""
    if pi.shape != sigma.shape:
        raise ValueError("shape mismatch")
    owner = {}
    for i, blk in enumerate(sigma.blocks):
        for x in blk:
            owner[x] = i
    blocks = []
    for blk in pi.blocks:
        groups: dict[int, list[int]] = {}
        for x in blk:
            groups.setdefault(owner[x], []).append(x)
        blocks.extend(groups.values())
    return BncPartition.make(pi.shape, blocks)


def _merge_to_partition(n: int, blocks) -> list[set[int]]:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for blk in blocks:
        it = iter(blk)
        r = find(next(it))
        for x in it:
            parent[find(x)] = r
    groups: dict[int, set[int]] = {}
    for x in range(n):
        groups.setdefault(find(x), set()).add(x)
    return list(groups.values())


def join(pi: BncPartition, sigma: BncPartition) -> BncPartition:
    """Least upper bound in the bi-non-crossing lattice.

    The set-partition join is formed first; if it crosses, crossing block
    pairs are merged to a fixpoint, which lands on the least bi-non-crossing
    coarsening.
    """
    if pi.shape != sigma.shape:
        raise ValueError("shape mismatch")
    shape = pi.shape
    merged = _merge_to_partition(shape.n, list(pi.blocks) + list(sigma.blocks))
    rank = shape.rank
    while True:
        flat = [sorted(rank[p] for p in blk) for blk in merged]
        pair = _crossing_pair(flat)
        if pair is None:
            break
        i, j = pair
        merged[i] |= merged[j]
        del merged[j]
    return BncPartition.make(shape, merged)


def _crossing_pair(flat_blocks):
    for i, a in enumerate(flat_blocks):
        for j, b in enumerate(flat_blocks):
            if i >= j:
                continue
            if _blocks_cross(a, b):
                return i, j
    return None


def _blocks_cross(a, b) -> bool:
    # a, b sorted integer lists; crossing iff u1 < v1 < u2 < v2 pattern exists
    for u1, u2 in itertools.combinations(a, 2):
        for v1, v2 in itertools.combinations(b, 2):
            if u1 < v1 < u2 < v2 or v1 < u1 < v2 < u2:
                return True
    return False


# ---------------------------------------------------------------------------
# Kreweras complement


def kreweras(blocks, n: int | None = None) -> tuple[tuple[int, ...], ...]:
    """Kreweras complement of a non-crossing partition of range(n).

    Interleave primed copies 0' .. (n-1)' after the originals and take the
    coarsest partition of the primes that keeps the union non-crossing.
    """
    blocks = tuple(tuple(sorted(b)) for b in blocks)
    if n is None:
        n = sum(len(b) for b in blocks)
    if not is_noncrossing(blocks):
        raise NotBiNonCrossingError("input partition is crossing")
    # interleaved line: original k at 2k, primed k at 2k+1
    base = [tuple(2 * x for x in b) for b in blocks]
    comp = [[2 * k + 1] for k in range(n)]
    merged = True
    while merged:
        merged = False
        for i in range(len(comp)):
            for j in range(i + 1, len(comp)):
                trial = base + [tuple(sorted(comp[i] + comp[j]))]
                trial += [tuple(c) for k, c in enumerate(comp) if k not in (i, j)]
                if is_noncrossing(trial):
                    comp[i] = sorted(comp[i] + comp[j])
                    del comp[j]
                    merged = True
                    break
            if merged:
                break
    return tuple(
        sorted((tuple((x - 1) // 2 for x in c) for c in comp), key=lambda b: b[0])
    )


# ---------------------------------------------------------------------------
# special families


def _sigma_join_is_full(part: BncPartition, sigma_blocks) -> bool:
    shape = part.shape
    merged = _merge_to_partition(shape.n, list(part.blocks) + list(sigma_blocks))
    return len(merged) == 1


@lru_cache(maxsize=None)
def enumerate_bnc_prime(side: str, n: int):
    """Pinched-chain partitions on 2n points of one side.

    Generated from non-crossing partitions of the odd-labelled points having
    the first point as a singleton, each completed by its Kreweras complement
    on the even-labelled points.  The same position sets arise for either
    side; only the ambient shape changes.
    """
    if side not in ("l", "r"):
        raise ValueError("side must be 'l' or 'r'")
    if n < 1:
        return []
    shape = ChiShape.two_sided(2 * n, 0) if side == "l" else ChiShape.two_sided(0, 2 * n)
    out = []
    # 1-based odd positions = 0-based 0, 2, .., 2n-2; evens fill the rest
    for inner in enumerate_nc(n - 1):
        odd_part = [(0,)] + [tuple(2 * (x + 1) for x in blk) for blk in inner]
        comp = kreweras([tuple(p // 2 for p in blk) for blk in odd_part], n)
        even_part = [tuple(2 * x + 1 for x in blk) for blk in comp]
        out.append(BncPartition.make(shape, odd_part + even_part))
    return out


def bnc_prime_sigma(n: int):
    """Interval pairing {0,1},{2,3},.. on 2n points (flat picture)."""
    return [(2 * k, 2 * k + 1) for k in range(n)]


@lru_cache(maxsize=None)
def enumerate_bnc_vs(n: int, m: int, bound: int = DEFAULT_ENUMERATION_BOUND):
    """Vertically split partitions: no block mixes left and right positions."""
    shape = ChiShape.two_sided(n, m)
    tags = shape.tags
    out = []
    for part in enumerate_bnc(shape, bound):
        if all(len({tags[p] for p in blk}) == 1 for blk in part.blocks):
            out.append(part)
    return out


def _no_parity_mix(blk_labels) -> bool:
    # labels are 1-based side indices; even and odd labels must not meet
    parities = {k % 2 for k in blk_labels}
    return len(parities) <= 1


@lru_cache(maxsize=None)
def enumerate_bnc_T(n: int, m: int, cls: str | None = None,
                    bound: int = DEFAULT_ENUMERATION_BOUND):
    """Partitions on n left and 2m right points whose join with the
    right-interval pairing is full and whose blocks never mix even- and
    odd-indexed right points.  cls selects 'e' or 'o' by the parity of the
    right points sharing a block with the first left point."""
    shape = ChiShape.two_sided(n, 2 * m)
    sigma = [(p,) for p in range(n)] + [
        (n + 2 * k, n + 2 * k + 1) for k in range(m)
    ]
    out = []
    for part in enumerate_bnc(shape, bound):
        ok = True
        for blk in part.blocks:
            rlabels = [p - n + 1 for p in blk if p >= n]
            if not _no_parity_mix(rlabels):
                ok = False
                break
        if not ok or not _sigma_join_is_full(part, sigma):
            continue
        if cls is None:
            out.append(part)
            continue
        blk1 = part.block_of(0)
        rlabels = [p - n + 1 for p in blk1 if p >= n]
        if not rlabels:
            continue
        parity = "e" if rlabels[0] % 2 == 0 else "o"
        if parity == cls:
            out.append(part)
    return out


@lru_cache(maxsize=None)
def enumerate_bnc_T_oprime(n: int, m: int, bound: int = DEFAULT_ENUMERATION_BOUND):
    """Variant on n left and 2m+1 right points: first right point unpaired,
    later right points paired (2,3),(4,5),..; join full; no parity mixing."""
    shape = ChiShape.two_sided(n, 2 * m + 1)
    sigma = [(p,) for p in range(n)] + [(n,)] + [
        (n + 2 * k + 1, n + 2 * k + 2) for k in range(m)
    ]
    out = []
    for part in enumerate_bnc(shape, bound):
        ok = True
        for blk in part.blocks:
            rlabels = [p - n + 1 for p in blk if p >= n]
            if not _no_parity_mix(rlabels):
                ok = False
                break
        if ok and _sigma_join_is_full(part, sigma):
            out.append(part)
    return out


def _top_mixed_block(part: BncPartition):
    """Mixed block (both sides) of least reading rank, or None."""
    shape = part.shape
    tags = shape.tags
    rank = shape.rank
    mixed = [b for b in part.blocks if len({tags[p] for p in b}) == 2]
    if not mixed:
        return None
    return min(mixed, key=lambda b: min(rank[p] for p in b))


@lru_cache(maxsize=None)
def enumerate_bnc_S(n: int, m: int, cls: str | None = None,
                    bound: int = DEFAULT_ENUMERATION_BOUND):
    """Partitions on 2n left and 2m right points, joined to full by the
    both-side interval pairing, never mixing even- and odd-indexed points on
    or across the sides.  cls selects 'e'/'o' by the index parity of the top
    mixed block."""
    shape = ChiShape.two_sided(2 * n, 2 * m)
    sigma = [(2 * k, 2 * k + 1) for k in range(n)] + [
        (2 * n + 2 * k, 2 * n + 2 * k + 1) for k in range(m)
    ]
    out = []
    for part in enumerate_bnc(shape, bound):
        ok = True
        for blk in part.blocks:
            labels = [p + 1 if p < 2 * n else p - 2 * n + 1 for p in blk]
            if not _no_parity_mix(labels):
                ok = False
                break
        if not ok or not _sigma_join_is_full(part, sigma):
            continue
        if cls is None:
            out.append(part)
            continue
        top = _top_mixed_block(part)
        if top is None:
            continue
        p0 = top[0]
        label = p0 + 1 if p0 < 2 * n else p0 - 2 * n + 1
        parity = "e" if label % 2 == 0 else "o"
        if parity == cls:
            out.append(part)
    return out


@lru_cache(maxsize=None)
def enumerate_bnc_S_oprime(n: int, m: int, cls: str | None = None,
                           bound: int = DEFAULT_ENUMERATION_BOUND):
    """Variant on 2n+1 left and 2m+1 right points: first left and first right
    point paired with each other, later points pair along each side.  cls in
    {'0','r','l','lr'} splits by whether the blocks of the first left and
    first right point reach across."""
    shape = ChiShape.two_sided(2 * n + 1, 2 * m + 1)
    nl = 2 * n + 1
    sigma = [(0, nl)] + [(2 * k + 1, 2 * k + 2) for k in range(n)] + [
        (nl + 2 * k + 1, nl + 2 * k + 2) for k in range(m)
    ]
    out = []
    for part in enumerate_bnc(shape, bound):
        ok = True
        for blk in part.blocks:
            labels = [p + 1 if p < nl else p - nl + 1 for p in blk]
            if not _no_parity_mix(labels):
                ok = False
                break
        if not ok or not _sigma_join_is_full(part, sigma):
            continue
        if cls is None:
            out.append(part)
            continue
        vl = part.block_of(0)
        vr = part.block_of(nl)
        l_has_right = any(p >= nl for p in vl)
        r_has_left = any(p < nl for p in vr)
        if cls == "0":
            keep = not l_has_right and not r_has_left
        elif cls == "r":
            keep = not l_has_right and r_has_left
        elif cls == "l":
            keep = l_has_right and not r_has_left
        elif cls == "lr":
            keep = vl == vr
        else:
            raise ValueError(f"unknown class {cls!r}")
        if keep:
            out.append(part)
    return out


# ---------------------------------------------------------------------------
# grouping embeddings


@dataclass(frozen=True)
class HatEmbedding:
    """Replace each position of an outer shape by a run of inner positions.

    cuts = (k0=0, k1, .., km=n); outer position p covers inner positions
    k(p) .. k(p+1)-1, all tagged with p's side.
    """

    outer: ChiShape
    cuts: tuple[int, ...]
    inner: ChiShape = field(init=False)

    def __post_init__(self):
        m = self.outer.n
        if len(self.cuts) != m + 1 or self.cuts[0] != 0:
            raise ValueError("cuts must be (0, k1, .., km)")
        if any(self.cuts[i] >= self.cuts[i + 1] for i in range(m)):
            raise ValueError("cuts must be strictly increasing")
        tags = []
        for p in range(m):
            tags.extend([self.outer.tags[p]] * (self.cuts[p + 1] - self.cuts[p]))
        object.__setattr__(self, "inner", ChiShape(tuple(tags)))

    def group(self, p: int) -> tuple[int, ...]:
        return tuple(range(self.cuts[p], self.cuts[p + 1]))

    def embed(self, part: BncPartition) -> BncPartition:
        if part.shape != self.outer:
            raise ValueError("partition is not on the outer shape")
        blocks = [
            tuple(q for p in blk for q in self.group(p)) for blk in part.blocks
        ]
        return BncPartition.make(self.inner, blocks)

    def zero_hat(self) -> BncPartition:
        """Image of the all-singletons outer partition."""
        return self.embed(BncPartition.minimal(self.outer))

"""Moebius function of the bi-non-crossing lattice, in exact integers.

The fast path pulls both arguments back to ordinary non-crossing partitions
and multiplies the classical interval factors; a recursive evaluation of the
defining sum is kept as an independent oracle for tests.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

from .partitions import (
    BncPartition,
    ChiShape,
    catalan,
    enumerate_nc,
    refines,
)

__all__ = [
    "mobius",
    "mobius_nc",
    "refinements",
    "mobius_recursive_oracle",
    "mobius_column_sum_check",
]


@lru_cache(maxsize=None)
def _signed_catalan(k: int) -> int:
    """Moebius value of the full interval on k points."""
    return (-1) ** (k - 1) * catalan(k - 1)


def _induced(blocks, universe):
    """Relabel a partition of a sorted universe onto range(len(universe))."""
    index = {x: i for i, x in enumerate(universe)}
    return tuple(tuple(index[x] for x in blk) for blk in blocks)


def mobius_nc(sub, top, n: int) -> int:
    """mu on the non-crossing lattice of range(n); 0 unless sub refines top."""
    owner = {}
    for i, blk in enumerate(top):
        for x in blk:
            owner[x] = i
    groups: dict[int, list[tuple[int, ...]]] = {i: [] for i in range(len(top))}
    for blk in sub:
        tops = {owner[x] for x in blk}
        if len(tops) != 1:
            return 0
        groups[tops.pop()].append(tuple(blk))
    value = 1
    for i, blk in enumerate(top):
        universe = sorted(blk)
        inner = _induced(groups[i], universe)
        value *= _mobius_to_full(_canon(inner), len(universe))
    return value


def _canon(blocks):
    return tuple(sorted((tuple(sorted(b)) for b in blocks), key=lambda b: b[0]))


@lru_cache(maxsize=None)
def _mobius_to_full(sub, n: int) -> int:
    """mu(sub, 1_n) in NC(n).

    The interval [sub, 1_n] is a product of full non-crossing lattices, one
    per block of the Kreweras complement of sub, so mu is the product of
    full-interval values at those block sizes.
    """
    if len(sub) == 1:
        return 1
    from .partitions import kreweras

    comp = kreweras(sub, n)
    value = 1
    for blk in comp:
        value *= _signed_catalan(len(blk))
    return value


def mobius(pi: BncPartition, sigma: BncPartition) -> int:
    """Moebius value between two partitions of one shape (exact integer)."""
    if pi.shape != sigma.shape:
        raise ValueError("shape mismatch")
    return mobius_nc(pi.flat_blocks(), sigma.flat_blocks(), pi.shape.n)


# ---------------------------------------------------------------------------
# refinement enumeration (used for cumulant sums and for the oracle)


def refinements(part: BncPartition):
    """All bi-non-crossing refinements, as the blockwise product of
    non-crossing partitions of each block."""
    shape = part.shape
    flat = part.flat_blocks()
    per_block = []
    for blk in flat:
        universe = sorted(blk)
        opts = [
            tuple(tuple(universe[i] for i in b) for b in p)
            for p in enumerate_nc(len(universe))
        ]
        per_block.append(opts)
    out = []
    for combo in itertools.product(*per_block):
        blocks = [b for p in combo for b in p]
        out.append(BncPartition.from_flat(shape, blocks))
    return out


def flat_refinements(flat_blocks):
    """Same as :func:`refinements` but purely on flat block tuples."""
    per_block = []
    for blk in flat_blocks:
        universe = sorted(blk)
        opts = [
            _canon(tuple(tuple(universe[i] for i in b) for b in p))
            for p in enumerate_nc(len(universe))
        ]
        per_block.append(opts)
    for combo in itertools.product(*per_block):
        yield _canon([b for p in combo for b in p])


# ---------------------------------------------------------------------------
# recursive oracle


def mobius_recursive_oracle(pi: BncPartition, sigma: BncPartition) -> int:
    """mu from the defining recursion over the interval, independent of the
    fast path.  Exponential; intended for exhaustive small-n testing."""
    if pi.shape != sigma.shape:
        raise ValueError("shape mismatch")
    if not refines(pi, sigma):
        return 0
    return _oracle(pi.flat_blocks(), sigma.flat_blocks())


def _flat_refines(a, b) -> bool:
    owner = {}
    for i, blk in enumerate(b):
        for x in blk:
            owner[x] = i
    return all(len({owner[x] for x in blk}) == 1 for blk in a)


@lru_cache(maxsize=None)
def _oracle(pi_flat, sigma_flat) -> int:
    if pi_flat == sigma_flat:
        return 1
    # sum over tau with pi <= tau <= sigma, tau != pi, of mu(tau, sigma) = -mu(pi, sigma)
    total = 0
    for tau in flat_refinements(sigma_flat):
        if tau != pi_flat and _flat_refines(pi_flat, tau):
            total += _oracle(tau, sigma_flat)
    return -total


def mobius_column_sum_check(sigma: BncPartition) -> bool:
    """Defining recursions hold on every interval below sigma: both the
    row and column sums of mu over [pi, sigma] collapse to the indicator."""
    subs = [p.flat_blocks() for p in refinements(sigma)]
    top = sigma.flat_blocks()
    n = sigma.shape.n
    mu_to_top = {s: mobius_nc(s, top, n) for s in subs}
    for pi in subs:
        col = sum(mu_to_top[t] for t in subs if _flat_refines(pi, t))
        if col != (1 if pi == top else 0):
            return False
        row = sum(
            mobius_nc(pi, t, n) for t in subs if _flat_refines(pi, t)
        )
        if row != (1 if pi == top else 0):
            return False
    return True

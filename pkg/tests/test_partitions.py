"""Lattice layer tests, anchored on independent brute-force oracles."""

import itertools

import pytest

from bifree.partitions import (
    BncPartition,
    ChiShape,
    EnumerationBoundError,
    HatEmbedding,
    MalformedPartitionError,
    NotBiNonCrossingError,
    catalan,
    enumerate_bnc,
    enumerate_bnc_prime,
    enumerate_bnc_S,
    enumerate_bnc_T,
    enumerate_bnc_vs,
    enumerate_nc,
    is_bnc,
    is_noncrossing,
    join,
    kreweras,
    meet,
    refines,
)


def brute_partitions(n):
    """All set partitions of range(n) by restricted growth strings."""
    if n == 0:
        yield ()
        return
    rgs = [0] * n

    def rec(i, maxv):
        if i == n:
            blocks = {}
            for x, b in enumerate(rgs):
                blocks.setdefault(b, []).append(x)
            yield tuple(tuple(b) for b in blocks.values())
            return
        for v in range(maxv + 2):
            rgs[i] = v
            yield from rec(i + 1, max(maxv, v))

    yield from rec(1, 0)


def brute_noncrossing(blocks):
    flat = [tuple(sorted(b)) for b in blocks]
    for a, b in itertools.combinations(flat, 2):
        for u1, u2 in itertools.combinations(a, 2):
            for v1, v2 in itertools.combinations(b, 2):
                if u1 < v1 < u2 < v2 or v1 < u1 < v2 < u2:
                    return False
    return True


# --- shapes -----------------------------------------------------------------


def test_permutation_flop_example():
    # left positions 1,2,3,6 and right 4,5 read as (1,2,3,6,5,4)
    shape = ChiShape.from_string("lllrrl")
    assert tuple(p + 1 for p in shape.permutation) == (1, 2, 3, 6, 5, 4)


def test_permutation_all_left_identity():
    shape = ChiShape.all_left(4)
    assert shape.permutation == (0, 1, 2, 3)


def test_permutation_all_right_reversal():
    shape = ChiShape.all_right(3)
    assert shape.permutation == (2, 1, 0)


def test_rank_inverts_permutation():
    shape = ChiShape.from_string("lrlrr")
    for slot, pos in enumerate(shape.permutation):
        assert shape.rank[pos] == slot


# --- membership -------------------------------------------------------------


def test_flop_partition_is_bnc_but_crossing():
    shape = ChiShape.from_string("lllrrl")
    blocks = [(0, 3), (1, 4), (2, 5)]
    assert not brute_noncrossing(blocks)
    assert is_bnc(shape, blocks)


def test_classic_crossing_rejected_all_left():
    shape = ChiShape.all_left(4)
    assert not is_bnc(shape, [(0, 2), (1, 3)])


def test_singletons_always_valid():
    for tags in itertools.product("lr", repeat=5):
        shape = ChiShape(tags)
        assert is_bnc(shape, [(p,) for p in range(5)])


def test_malformed_partitions_raise():
    shape = ChiShape.all_left(3)
    with pytest.raises(MalformedPartitionError):
        BncPartition.make(shape, [(0, 1), (1, 2)])
    with pytest.raises(MalformedPartitionError):
        BncPartition.make(shape, [(0, 1)])
    with pytest.raises(NotBiNonCrossingError):
        BncPartition.make(ChiShape.all_left(4), [(0, 2), (1, 3)])


def test_membership_matches_brute_force():
    for tags in [("l",) * 5, ("l", "r", "l", "r", "l"), ("r", "l", "l", "r", "r")]:
        shape = ChiShape(tags)
        rank = shape.rank
        for part in brute_partitions(5):
            flat = [tuple(sorted(rank[p] for p in b)) for b in part]
            assert is_bnc(shape, part) == brute_noncrossing(flat)
            assert is_noncrossing(flat) == brute_noncrossing(flat)


# --- enumeration ------------------------------------------------------------


def test_nc_counts_are_catalan():
    for n in range(8):
        assert len(enumerate_nc(n)) == catalan(n)


def test_nc_enumeration_no_duplicates_and_noncrossing():
    for n in range(1, 7):
        parts = enumerate_nc(n)
        assert len(set(parts)) == len(parts)
        for p in parts:
            assert brute_noncrossing(p)


def test_bnc_count_catalan_all_shapes_up_to_6():
    for n in range(1, 7):
        for tags in itertools.product("lr", repeat=n):
            assert len(enumerate_bnc(ChiShape(tags))) == catalan(n)


def test_enumerate_bnc_n1():
    parts = enumerate_bnc(ChiShape.all_left(1))
    assert len(parts) == 1 and parts[0].blocks == ((0,),)


def test_flop_member_in_enumeration():
    shape = ChiShape.from_string("lllrrl")
    target = BncPartition.make(shape, [(0, 3), (1, 4), (2, 5)])
    assert target in enumerate_bnc(shape)


def test_enumeration_bound():
    with pytest.raises(EnumerationBoundError):
        enumerate_bnc(ChiShape.all_left(13))


# --- lattice ----------------------------------------------------------------


def test_join_meet_units():
    shape = ChiShape.from_string("llrlr")
    zero = BncPartition.minimal(shape)
    one = BncPartition.maximal(shape)
    for part in enumerate_bnc(shape):
        assert join(zero, part) == part
        assert meet(one, part) == part


def test_join_escapes_to_one():
    shape = ChiShape.all_left(4)
    a = BncPartition.make(shape, [(0, 2), (1,), (3,)])
    b = BncPartition.make(shape, [(1, 3), (0,), (2,)])
    assert join(a, b) == BncPartition.maximal(shape)


def test_join_is_least_upper_bound_brute():
    shape = ChiShape.from_string("lrlr")
    parts = enumerate_bnc(shape)
    for a, b in itertools.product(parts, repeat=2):
        j = join(a, b)
        uppers = [p for p in parts if refines(a, p) and refines(b, p)]
        least = [u for u in uppers if all(refines(u, v) or u == v for v in uppers)]
        # the least upper bound exists and is unique in a lattice
        assert any(refines(j, u) or j == u for u in uppers)
        assert j in uppers
        for u in uppers:
            assert refines(j, u) or j == u
        assert least and j == least[0]


def test_meet_refines_both_join_coarsens_both():
    shape = ChiShape.from_string("rllrl")
    parts = enumerate_bnc(shape)
    for a, b in itertools.product(parts[:20], parts[:20]):
        m = meet(a, b)
        j = join(a, b)
        assert refines(m, a) and refines(m, b)
        assert refines(a, j) and refines(b, j)


def test_pushforward_is_lattice_isomorphism():
    # order preserved both ways between flat and shaped pictures, n <= 6
    for tags in [("l", "r", "l", "r", "l", "r"), ("r", "r", "l", "l", "r", "l")]:
        shape = ChiShape(tags)
        parts = enumerate_bnc(shape)
        flats = [p.flat_blocks() for p in parts]

        def flat_refines(a, b):
            owner = {}
            for i, blk in enumerate(b):
                for x in blk:
                    owner[x] = i
            return all(len({owner[x] for x in blk}) == 1 for blk in a)

        import random

        rng = random.Random(0)
        pairs = [(rng.randrange(len(parts)), rng.randrange(len(parts))) for _ in range(200)]
        for i, j in pairs:
            assert refines(parts[i], parts[j]) == flat_refines(flats[i], flats[j])


# --- Kreweras ---------------------------------------------------------------


def test_kreweras_worked_example():
    # complement of {1,6},{2},{3,4,5},{7} is {1,2,5},{3},{4},{6,7} (1-based)
    pi = [(0, 5), (1,), (2, 3, 4), (6,)]
    expected = ((0, 1, 4), (2,), (3,), (5, 6))
    assert kreweras(pi, 7) == expected


def test_kreweras_of_discrete_is_full():
    for n in range(1, 6):
        assert kreweras([(i,) for i in range(n)], n) == (tuple(range(n)),)


def test_kreweras_block_count_complementary():
    for n in range(1, 7):
        for p in enumerate_nc(n):
            assert len(p) + len(kreweras(p, n)) == n + 1


def test_kreweras_rejects_crossing():
    with pytest.raises(NotBiNonCrossingError):
        kreweras([(0, 2), (1, 3)], 4)


# --- special families -------------------------------------------------------


def _sigma_pairs(n, offset=0):
    return [(offset + 2 * k, offset + 2 * k + 1) for k in range(n)]


def brute_prime_family(n):
    """Independent predicate filter for the pinched-chain family."""
    from bifree.partitions import _merge_to_partition

    shape = ChiShape.two_sided(2 * n, 0)
    out = []
    for part in enumerate_bnc(shape):
        blocks = part.blocks
        if (0,) not in blocks:
            continue
        if any(len({p % 2 for p in blk}) == 2 for blk in blocks):
            continue
        merged = _merge_to_partition(2 * n, list(blocks) + _sigma_pairs(n))
        if len(merged) != 1:
            continue
        out.append(part)
    return out


def test_prime_family_n1_forced():
    parts = enumerate_bnc_prime("l", 1)
    assert len(parts) == 1
    assert parts[0].blocks == ((0,), (1,))


def test_prime_family_n2():
    parts = enumerate_bnc_prime("l", 2)
    assert len(parts) == 1
    assert set(parts[0].blocks) == {(0,), (2,), (1, 3)}


def test_prime_family_matches_brute_filter():
    for n in range(1, 5):
        got = {p.blocks for p in enumerate_bnc_prime("l", n)}
        want = {p.blocks for p in brute_prime_family(n)}
        assert got == want
        # same position sets on the right side
        got_r = {p.blocks for p in enumerate_bnc_prime("r", n)}
        assert {frozenset(map(frozenset, b)) for b in got_r} == {
            frozenset(map(frozenset, b)) for b in want
        }


def test_vs_family_1_1():
    parts = enumerate_bnc_vs(1, 1)
    assert len(parts) == 1
    assert parts[0].blocks == ((0,), (1,))


def test_vs_family_is_predicate_filter():
    for n, m in [(2, 1), (1, 2), (2, 2)]:
        shape = ChiShape.two_sided(n, m)
        want = [
            p
            for p in enumerate_bnc(shape)
            if all(len({shape.tags[x] for x in b}) == 1 for b in p.blocks)
        ]
        assert enumerate_bnc_vs(n, m) == want


def test_T_classes_partition_family():
    for n, m in [(1, 1), (2, 1), (1, 2), (2, 2)]:
        full = {p.blocks for p in enumerate_bnc_T(n, m)}
        e = {p.blocks for p in enumerate_bnc_T(n, m, "e")}
        o = {p.blocks for p in enumerate_bnc_T(n, m, "o")}
        assert e | o == full
        assert not (e & o)


def test_S_classes_partition_family():
    for n, m in [(1, 1), (2, 1), (1, 2)]:
        full = {p.blocks for p in enumerate_bnc_S(n, m)}
        e = {p.blocks for p in enumerate_bnc_S(n, m, "e")}
        o = {p.blocks for p in enumerate_bnc_S(n, m, "o")}
        assert e | o == full
        assert not (e & o)


def test_S_oprime_classes_partition_family():
    from bifree.partitions import enumerate_bnc_S_oprime

    for n, m in [(0, 0), (1, 0), (0, 1), (1, 1)]:
        full = {p.blocks for p in enumerate_bnc_S_oprime(n, m)}
        split = [
            {p.blocks for p in enumerate_bnc_S_oprime(n, m, c)}
            for c in ("0", "r", "l", "lr")
        ]
        union = set()
        for s in split:
            assert not (union & s)
            union |= s
        assert union == full


# --- hat embedding ----------------------------------------------------------


def test_hat_trivial_cuts_identity():
    shape = ChiShape.from_string("lrl")
    emb = HatEmbedding(shape, (0, 1, 2, 3))
    for p in enumerate_bnc(shape):
        assert emb.embed(p).blocks == p.blocks


def test_hat_full_block():
    outer = ChiShape.from_string("ll")
    emb = HatEmbedding(outer, (0, 2, 4))
    top = BncPartition.maximal(outer)
    assert emb.embed(top).blocks == ((0, 1, 2, 3),)


def test_hat_preserves_refinement():
    outer = ChiShape.from_string("lrl")
    emb = HatEmbedding(outer, (0, 2, 3, 5))
    parts = enumerate_bnc(outer)
    for a in parts:
        for b in parts:
            if refines(a, b):
                assert refines(emb.embed(a), emb.embed(b))


def test_hat_inner_tags():
    outer = ChiShape.from_string("lr")
    emb = HatEmbedding(outer, (0, 2, 5))
    assert str(emb.inner) == "llrrr"

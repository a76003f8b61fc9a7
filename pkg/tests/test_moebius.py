"""Moebius function tests: fast path against the recursive oracle."""

import itertools

import pytest

from bifree.moebius import (
    mobius,
    mobius_column_sum_check,
    mobius_recursive_oracle,
    refinements,
)
from bifree.partitions import (
    BncPartition,
    ChiShape,
    catalan,
    enumerate_bnc,
    refines,
)


def test_mu_equal_partitions_is_one():
    shape = ChiShape.from_string("lrll")
    for p in enumerate_bnc(shape):
        assert mobius(p, p) == 1


def test_mu_zero_unless_refines():
    shape = ChiShape.from_string("lrl")
    parts = enumerate_bnc(shape)
    for a, b in itertools.product(parts, repeat=2):
        if not refines(a, b):
            assert mobius(a, b) == 0


def test_mu_two_points():
    shape = ChiShape.from_string("lr")
    assert mobius(BncPartition.minimal(shape), BncPartition.maximal(shape)) == -1


def test_mu_bottom_to_top_signed_catalan():
    for n in range(1, 7):
        shape = ChiShape.two_sided(n - n // 2, n // 2)
        v = mobius(BncPartition.minimal(shape), BncPartition.maximal(shape))
        assert v == (-1) ** (n - 1) * catalan(n - 1)
    # concrete n=4 value
    shape = ChiShape.all_left(4)
    assert mobius(BncPartition.minimal(shape), BncPartition.maximal(shape)) == -5


def test_fast_path_equals_recursive_oracle_exhaustive():
    for tags in [
        ("l",) * 4,
        ("l", "r", "l", "r"),
        ("r", "l", "r", "l", "l"),
        ("l", "l", "r", "r", "l"),
    ]:
        shape = ChiShape(tags)
        parts = enumerate_bnc(shape)
        for a, b in itertools.product(parts, repeat=2):
            assert mobius(a, b) == mobius_recursive_oracle(a, b)


def test_column_sums():
    shape = ChiShape.from_string("llrl")
    for sigma in enumerate_bnc(shape):
        assert mobius_column_sum_check(sigma)


def test_column_sum_trivial_bottom():
    shape = ChiShape.from_string("rlr")
    assert mobius_column_sum_check(BncPartition.minimal(shape))


def test_refinements_are_exactly_the_finer_partitions():
    shape = ChiShape.from_string("lrlr")
    parts = enumerate_bnc(shape)
    for sigma in parts:
        got = {p.blocks for p in refinements(sigma)}
        want = {p.blocks for p in parts if refines(p, sigma)}
        assert got == want


def test_mobius_inversion_roundtrip():
    import random

    rng = random.Random(7)
    shape = ChiShape.from_string("lrllr")
    parts = enumerate_bnc(shape)
    f = {p.blocks: rng.randint(-20, 20) for p in parts}
    g = {}
    for sigma in parts:
        g[sigma.blocks] = sum(f[p.blocks] for p in refinements(sigma))
    for sigma in parts:
        back = sum(g[p.blocks] * mobius(p, sigma) for p in refinements(sigma))
        assert back == f[sigma.blocks]


def test_shape_mismatch_raises():
    with pytest.raises(ValueError):
        mobius(
            BncPartition.minimal(ChiShape.from_string("lr")),
            BncPartition.minimal(ChiShape.from_string("rl")),
        )

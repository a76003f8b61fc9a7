"""Cumulant engine tests.

The two worked decoration-transport identities from the background theory are
used as ground truth for the reduction, together with brute-force Moebius
sums and round trips.
"""

import itertools

import numpy as np
import pytest

import bifree.matrices as mx
from bifree.cumulants import (
    cumulant_of_products,
    entries_shape,
    entry,
    eval_cumulant_full,
    eval_cumulant_pi,
    eval_moment_full,
    eval_moment_pi,
    kappa_Z_omega,
    moments_from_cumulants,
    verify_interchange,
    verify_tail_swap,
)
from bifree.families import scalar_pairs_model, transform_model
from bifree.operators import OpElement, expectation_of_word
from bifree.partitions import (
    BncPartition,
    ChiShape,
    HatEmbedding,
    enumerate_bnc,
)

from conftest import random_left_op, random_op, random_right_op


def test_moment_pi_full_is_plain_expectation(small_ctx):
    rng = np.random.default_rng(0)
    space, d = small_ctx.space, small_ctx.d
    ents = tuple(
        entry(random_op(space, d, rng, t), t) for t in ("l", "r", "l")
    )
    shape = entries_shape(ents)
    top = BncPartition.maximal(shape)
    assert mx.approx_eq(
        eval_moment_pi(small_ctx, top, ents),
        eval_moment_full(small_ctx, ents),
        1e-12,
    )


def test_moment_pi_singletons_factorize_left(small_ctx):
    rng = np.random.default_rng(1)
    space, d = small_ctx.space, small_ctx.d
    b = [mx.random_matrix(rng, d) for _ in range(4)]
    z1 = random_left_op(space, d, rng)
    z2 = random_left_op(space, d, rng)
    ents = (entry(z1, "l", b[0], b[1]), entry(z2, "l", b[2], b[3]))
    shape = entries_shape(ents)
    bottom = BncPartition.minimal(shape)
    got = eval_moment_pi(small_ctx, bottom, ents)
    want = (
        expectation_of_word(
            [OpElement.left_scalar(space, d, b[0]), z1,
             OpElement.left_scalar(space, d, b[1])]
        )
        @ expectation_of_word(
            [OpElement.left_scalar(space, d, b[2]), z2,
             OpElement.left_scalar(space, d, b[3])]
        )
    )
    assert mx.approx_eq(got, want, 1e-12)


def test_decoration_transport_worked_example(small_ctx):
    """Moving coefficients through a length-four mixed word: prefixes of the
    top left and top right entries exit; the others migrate to the adjacent
    slot in reading order."""
    rng = np.random.default_rng(2)
    space, d = small_ctx.space, small_ctx.d
    b = [mx.random_matrix(rng, d) for _ in range(5)]
    z1 = random_left_op(space, d, rng)
    z2 = random_right_op(space, d, rng)
    z3 = random_left_op(space, d, rng)
    z4 = random_right_op(space, d, rng)
    lhs_entries = (
        entry(z1, "l", pre=b[0]),
        entry(z2, "r", pre=b[1]),
        entry(z3, "l", pre=b[2]),
        entry(z4, "r", pre=b[3], suf=b[4]),
    )
    rhs_entries = (
        entry(z1, "l", suf=b[2]),
        entry(z2, "r", suf=b[3]),
        entry(z3, "l", suf=b[4]),
        entry(z4, "r"),
    )
    shape = entries_shape(lhs_entries)
    top = BncPartition.maximal(shape)
    for evaluator in (eval_moment_pi, eval_cumulant_pi):
        lhs = evaluator(small_ctx, top, lhs_entries)
        rhs = b[0] @ evaluator(small_ctx, top, rhs_entries) @ b[1]
        assert mx.approx_eq(lhs, rhs, 1e-11)


def test_ten_point_reduction_worked_example(small_ctx):
    """Block-by-block reduction of a ten-argument partitioned moment."""
    rng = np.random.default_rng(3)
    space, d = small_ctx.space, small_ctx.d
    tags = ("l", "l", "l", "r", "r", "l", "l", "r", "r", "r")
    ops = [random_op(space, d, rng, t) for t in tags]
    ents = tuple(entry(op, t) for op, t in zip(ops, tags))
    shape = entries_shape(ents)
    part = BncPartition.make(
        shape, [(0,), (2,), (3,), (7,), (1, 4, 5, 8), (6, 9)]
    )
    got = eval_moment_pi(small_ctx, part, ents)

    def mom(*idx_tags):
        return eval_moment_full(
            small_ctx, tuple(entry(ops[i], t, p, s) for i, t, p, s in idx_tags)
        )

    e3 = mom((2, "l", None, None))
    e8 = mom((7, "r", None, None))
    e710 = mom((6, "l", None, None), (9, "r", None, None))
    mid = eval_moment_full(
        small_ctx,
        (
            entry(ops[1], "l", suf=e3),
            entry(ops[4], "r", suf=e8),
            entry(ops[5], "l"),
            entry(ops[8], "r", suf=e710),
        ),
    )
    want = mom((0, "l", None, None)) @ mid @ mom((3, "r", None, None))
    assert mx.approx_eq(got, want, 1e-11)


def test_schedule_independence(small_ctx):
    rng = np.random.default_rng(4)
    space, d = small_ctx.space, small_ctx.d
    for tags in [("l", "l", "l", "l"), ("l", "r", "l", "r"), ("r", "l", "l", "r", "r")]:
        ents = tuple(
            entry(
                random_op(space, d, rng, t), t,
                mx.random_matrix(rng, d), mx.random_matrix(rng, d),
            )
            for t in tags
        )
        shape = entries_shape(ents)
        for part in enumerate_bnc(shape):
            a = eval_moment_pi(small_ctx, part, ents, attach="pred")
            b = eval_moment_pi(small_ctx, part, ents, attach="succ")
            assert mx.approx_eq(a, b, 1e-11)


def test_cumulant_n1_is_expectation(small_ctx):
    rng = np.random.default_rng(5)
    z = random_left_op(small_ctx.space, small_ctx.d, rng)
    ents = (entry(z, "l"),)
    assert mx.approx_eq(
        eval_cumulant_full(small_ctx, ents),
        eval_moment_full(small_ctx, ents),
        1e-12,
    )


def test_cumulant_n2_left(small_ctx):
    rng = np.random.default_rng(6)
    space, d = small_ctx.space, small_ctx.d
    z1 = random_left_op(space, d, rng)
    z2 = random_left_op(space, d, rng)
    ents = (entry(z1, "l"), entry(z2, "l"))
    got = eval_cumulant_full(small_ctx, ents)
    want = expectation_of_word([z1, z2]) - expectation_of_word([z1]) @ expectation_of_word([z2])
    assert mx.approx_eq(got, want, 1e-12)


def test_vanishing_with_scalar_entries(small_ctx):
    rng = np.random.default_rng(7)
    space, d = small_ctx.space, small_ctx.d
    for tags in [("l", "l"), ("l", "r", "l"), ("r", "l", "r", "l")]:
        for q in range(len(tags)):
            ents = []
            for k, t in enumerate(tags):
                if k == q:
                    b = mx.random_matrix(rng, d)
                    op = (OpElement.left_scalar(space, d, b) if t == "l"
                          else OpElement.right_scalar(space, d, b))
                    ents.append(entry(op, t))
                else:
                    ents.append(entry(random_op(space, d, rng, t), t))
            got = eval_cumulant_full(small_ctx, tuple(ents))
            assert np.max(np.abs(got)) < 1e-10


def test_mobius_equals_reduce_on_all_partitions(small_ctx):
    rng = np.random.default_rng(8)
    space, d = small_ctx.space, small_ctx.d
    tags = ("l", "r", "l", "r")
    ents = tuple(
        entry(random_op(space, d, rng, t), t, mx.random_matrix(rng, d), None)
        for t in tags
    )
    shape = entries_shape(ents)
    for part in enumerate_bnc(shape):
        a = eval_cumulant_pi(small_ctx, part, ents, method="mobius")
        b = eval_cumulant_pi(small_ctx, part, ents, method="reduce")
        assert mx.approx_eq(a, b, 1e-10)


def test_moment_cumulant_round_trip(small_ctx):
    rng = np.random.default_rng(9)
    space, d = small_ctx.space, small_ctx.d
    for tags in [("l", "l", "r"), ("r", "l", "r", "l")]:
        ents = tuple(entry(random_op(space, d, rng, t), t) for t in tags)
        shape = entries_shape(ents)
        for part in enumerate_bnc(shape):
            direct = eval_moment_pi(small_ctx, part, ents)
            rebuilt = moments_from_cumulants(small_ctx, part, ents)
            assert mx.approx_eq(direct, rebuilt, 1e-10)


def test_cumulant_of_products_trivial_grouping(small_ctx):
    rng = np.random.default_rng(10)
    space, d = small_ctx.space, small_ctx.d
    tags = ("l", "r", "l")
    ops = [random_op(space, d, rng, t) for t in tags]
    emb = HatEmbedding(ChiShape(tags), (0, 1, 2, 3))
    chk = cumulant_of_products(small_ctx, emb, ops)
    assert chk.residual < 1e-11


def test_cumulant_of_products_all_left(small_ctx):
    rng = np.random.default_rng(11)
    space, d = small_ctx.space, small_ctx.d
    ops = [random_left_op(space, d, rng) for _ in range(4)]
    emb = HatEmbedding(ChiShape.all_left(2), (0, 2, 4))
    chk = cumulant_of_products(small_ctx, emb, ops)
    assert chk.residual < 1e-10


def test_cumulant_of_products_mixed(small_ctx):
    rng = np.random.default_rng(12)
    space, d = small_ctx.space, small_ctx.d
    inner_tags = ("l", "l", "r", "r")
    ops = [random_op(space, d, rng, t) for t in inner_tags]
    emb = HatEmbedding(ChiShape(("l", "r")), (0, 2, 4))
    chk = cumulant_of_products(small_ctx, emb, ops)
    assert chk.residual < 1e-10


def test_kappa_omega_single_left():
    model = scalar_pairs_model(pairs=1, depth=6)
    fam = model.families[0]
    got = kappa_Z_omega(fam, ("X",), ())
    want = fam.ctx.expect(fam.op("X"))
    assert mx.approx_eq(got, want, 1e-13)


def test_kappa_omega_mixed_two_matches_hand_built():
    model = transform_model(d=2, order=3, seed=1, pairs=1)
    fam = model.families[0]
    ctx = fam.ctx
    rng = np.random.default_rng(13)
    b1 = mx.random_matrix(rng, 2)
    got = kappa_Z_omega(fam, ("X", "Y"), (b1,))
    # by the convention the single coefficient rides as a suffix on the last
    # element, and the second element is the bare later-starting side
    ents = (entry(fam.op("X"), "l"), entry(fam.op("Y"), "r", suf=b1))
    want = eval_cumulant_full(ctx, ents)
    assert mx.approx_eq(got, want, 1e-12)


def test_kappa_omega_linear_in_slots():
    model = transform_model(d=2, order=3, seed=2, pairs=1)
    fam = model.families[0]
    rng = np.random.default_rng(14)
    omega = ("X", "Y", "X")
    b1, b2, c = (mx.random_matrix(rng, 2) for _ in range(3))
    alpha = 0.7 - 0.2j
    base = kappa_Z_omega(fam, omega, (b1, b2))
    bumped = kappa_Z_omega(fam, omega, (alpha * b1 + c, b2))
    other = kappa_Z_omega(fam, omega, (c, b2))
    assert mx.approx_eq(bumped, alpha * base + other, 1e-11)


def test_interchange_scalar_pair(small_ctx):
    rng = np.random.default_rng(15)
    space, d = small_ctx.space, small_ctx.d
    z = mx.random_matrix(rng, d)
    x = OpElement.left_scalar(space, d, 0.3 * np.eye(d))
    y = OpElement.right_scalar(space, d, 0.3 * np.eye(d))
    lead = (entry(random_left_op(space, d, rng), "l"),)
    tail = (entry(random_right_op(space, d, rng), "r"),)
    rep = verify_interchange(
        small_ctx, lead, x, y, tail, rng,
        probes=[(random_left_op(space, d, rng), "l"),
                (random_right_op(space, d, rng), "r")],
    )
    assert rep.hypothesis_ok and rep.residual < 1e-10


def test_interchange_negative_control(small_ctx):
    rng = np.random.default_rng(16)
    space, d = small_ctx.space, small_ctx.d
    x = random_left_op(space, d, rng)
    y = random_right_op(space, d, rng)
    lead = (entry(random_left_op(space, d, rng), "l"),)
    rep = verify_interchange(
        small_ctx, lead, x, y, (), rng,
        probes=[(random_left_op(space, d, rng), "l")],
    )
    assert not rep.hypothesis_ok


def test_tail_swap_lifted_scalar():
    """A left and a right embedding of the same diagonal scalar element have
    matching trailing expectations, so the trailing tag may flip."""
    model = transform_model(d=2, order=3, seed=4, pairs=1)
    ctx = model.ctx
    space, d = ctx.space, ctx.d
    rng = np.random.default_rng(17)
    base = space.op("l", 0) + space.op("l*", 0)
    baser = space.op("r", 0) + space.op("r*", 0)
    x = OpElement.left_block(space, d, [[base, None], [None, base]])
    y = OpElement.right_block(space, d, [[baser, None], [None, baser]])
    fam = model.families[0]
    lead = (entry(fam.op("X"), "l"), entry(fam.op("Y"), "r"))
    rep = verify_tail_swap(
        ctx, lead, x, y, rng,
        probes=[(fam.op("X"), "l"), (fam.op("Y"), "r")],
    )
    assert rep.hypothesis_ok and rep.residual < 1e-9

"""Structure-check tests on small models, positive and negative controls."""

import numpy as np
import pytest

import bifree.matrices as mx
from bifree.checks import (
    check_bifree,
    check_bifree_over_D,
    check_r_cyclic,
    diagonal_cumulant_formula,
    matrix_cumulant_expand,
    ConditionalExpectationError,
)
from bifree.cumulants import CumulantSpec, SpecifiedFamily, entry, eval_cumulant_full
from bifree.families import (
    MatrixPair,
    creation_pair_model,
    diag_pair_model,
    matrix_lift_model,
    scalar_pairs_model,
)
from bifree.partitions import ChiShape


def test_scalar_pairs_bifree():
    model = scalar_pairs_model(pairs=2, depth=6)
    rep = check_bifree(model.families, max_order=4, tol=1e-9, seed=1)
    assert rep.passed, rep.witness


def test_shared_generator_fails():
    model = scalar_pairs_model(pairs=2, depth=6, shared=True)
    rep = check_bifree(model.families, max_order=3, tol=1e-9, seed=1)
    assert not rep.passed
    assert rep.worst >= 0.5


def test_matrix_lift_bifree():
    model = matrix_lift_model(d=2, depth=5)
    rep = check_bifree(model.families, max_order=3, tol=1e-8, seed=2)
    assert rep.passed, (rep.worst, rep.witness)


def test_creation_pair_r_cyclic():
    pair = creation_pair_model(d=2, num_k=1, depth=4)
    rep = check_r_cyclic(pair, max_order=3, tol=1e-9)
    assert rep.passed, rep.witness


def test_creation_pair_perturbed_fails_r_cyclic():
    pair = creation_pair_model(d=2, num_k=1, depth=4, perturbed=True)
    rep = check_r_cyclic(pair, max_order=2, tol=1e-9)
    assert not rep.passed
    assert rep.worst >= 0.1


def test_diag_pair_r_cyclic():
    pair = diag_pair_model(d=2, depth=4)
    rep = check_r_cyclic(pair, max_order=3, tol=1e-9)
    assert rep.passed, rep.witness


def test_diag_pair_shared_generator_not_r_cyclic():
    pair = diag_pair_model(d=2, depth=4, shared=True)
    rep = check_r_cyclic(pair, max_order=2, tol=1e-9)
    assert not rep.passed


def _r_diagonal_pair():
    """Off-diagonal 2x2 matrices over a table-specified alternating family."""

    def theta(omega, bs):
        tags = tuple("l" if k in ("X", "Xs") else "r" for k in omega)
        perm = ChiShape(tags).permutation
        seq = [omega[p] for p in perm]
        n = len(seq)
        value = {2: 1.0, 4: 0.25}.get(n, 0.0)
        stars = [k.endswith("s") for k in seq]
        letters = [k[0] for k in seq]
        if any(stars[i] == stars[i + 1] for i in range(n - 1)):
            value = 0.0
        if letters != sorted(letters):  # X-run then Y-run
            value = 0.0
        out = np.array([[value]], dtype=complex)
        for b in bs:
            out = out * complex(np.asarray(b).reshape(1, 1)[0, 0])
        return out

    spec = CumulantSpec(d=1, left_keys=("X", "Xs"), right_keys=("Y", "Ys"),
                        theta=theta, max_order=4)
    fam = SpecifiedFamily.from_spec(spec, name="r-diagonal")
    entries = {
        "Zl": [[None, "X"], ["Xs", None]],
        "Zr": [[None, "Y"], ["Ys", None]],
    }
    return MatrixPair(
        model=None, left_names=["Zl"], right_names=["Zr"],
        lifted={}, entries=entries, d=2, scalar_ctx=fam.ctx,
    )


def test_r_diagonal_pair_is_r_cyclic():
    pair = _r_diagonal_pair()
    rep = check_r_cyclic(pair, max_order=4, tol=1e-12)
    assert rep.passed, rep.witness
    # sanity: the underlying family has a nonzero on-pattern cumulant
    fam_ctx = pair.scalar_ctx
    val = eval_cumulant_full(
        fam_ctx, (entry("X", "l"), entry("Xs", "l"))
    )
    assert abs(val[0, 0] - 1.0) < 1e-12


def test_creation_pair_bifree_over_diag():
    pair = creation_pair_model(d=2, num_k=1, depth=4)
    rep = check_bifree_over_D(pair.model.families[0], max_order=2, tol=1e-8, seed=3)
    assert rep.passed, (rep.worst, rep.witness)


def test_perturbed_pair_fails_over_diag():
    pair = creation_pair_model(d=2, num_k=1, depth=4, perturbed=True)
    rep = check_bifree_over_D(pair.model.families[0], max_order=2, tol=1e-8, seed=3)
    assert not rep.passed
    assert rep.worst >= 0.1


def test_bad_projection_rejected():
    pair = creation_pair_model(d=2, num_k=1, depth=3)

    def bad(b):
        return 0.5 * b  # not idempotent

    with pytest.raises(ConditionalExpectationError):
        check_bifree_over_D(pair.model.families[0], F=bad, max_order=1)


def test_matrix_cumulant_expand_first_order():
    pair = creation_pair_model(d=2, num_k=1, depth=3)
    lhs, rhs = matrix_cumulant_expand(pair, ("c0",))
    assert mx.approx_eq(lhs, rhs, 1e-12)


def test_matrix_cumulant_expand_orders_2_3():
    pair = creation_pair_model(d=2, num_k=1, depth=4)
    for omega in [("a0", "c0"), ("A0", "c0"), ("a0", "C0"), ("a0", "c0", "c0")]:
        lhs, rhs = matrix_cumulant_expand(pair, omega)
        assert mx.approx_eq(lhs, rhs, 1e-10), omega


def test_matrix_units_chain_rule():
    pair = creation_pair_model(d=2, num_k=1, depth=3)
    # mismatched inner indices kill the unit product
    from bifree.checks import _matrix_units_product

    perm = ChiShape(("l", "l")).permutation
    out = _matrix_units_product(2, perm, (0, 1), (1, 0))
    assert np.any(out)
    out2 = _matrix_units_product(2, perm, (0, 0), (1, 1))
    assert not np.any(out2)


def test_diagonal_formula_identity_decorations():
    pair = creation_pair_model(d=2, num_k=1, depth=4)
    ones = [np.ones(2)] * 2
    for omega in [("a0", "c0"), ("a0", "C0")]:
        lhs, rhs = diagonal_cumulant_formula(pair, omega, ones, ones)
        assert mx.approx_eq(lhs, rhs, 1e-10), omega


def test_diagonal_formula_random_decorations():
    rng = np.random.default_rng(4)
    pair = creation_pair_model(d=2, num_k=1, depth=4)
    for omega in [("a0", "c0"), ("A0", "c0"), ("a0", "c0", "c0")]:
        lams = [rng.uniform(0.5, 1.5, 2) + 1j * rng.uniform(-0.2, 0.2, 2)
                for _ in omega]
        gams = [rng.uniform(0.5, 1.5, 2) + 1j * rng.uniform(-0.2, 0.2, 2)
                for _ in omega]
        lhs, rhs = diagonal_cumulant_formula(pair, omega, lams, gams)
        assert mx.approx_eq(lhs, rhs, 1e-9), omega


def test_diagonal_formula_all_left_matches_restricted():
    rng = np.random.default_rng(5)
    pair = creation_pair_model(d=2, num_k=1, depth=4)
    omega = ("a0", "c0")
    lams = [rng.uniform(0.5, 1.5, 2) for _ in omega]
    gams = [rng.uniform(0.5, 1.5, 2) for _ in omega]
    lhs, rhs = diagonal_cumulant_formula(pair, omega, lams, gams)
    assert mx.approx_eq(lhs, rhs, 1e-10)
    assert mx.is_diagonal(lhs, 1e-10)

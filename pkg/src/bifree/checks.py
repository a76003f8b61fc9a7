"""Decision procedures for the structural theorems.

Each check enumerates the finitely many cumulants the relevant criterion
constrains, evaluates them on the model, and reports the worst residual with
a witness.  Random coefficient draws make the multilinear conditions
effective: a failed draw is a definitive failure, passing draws are evidence.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import matrices as mx
from .cumulants import (
    entry,
    eval_cumulant_full,
    eval_cumulant_pi,
    kappa_Z_omega,
)
from .partitions import BncPartition, ChiShape, enumerate_bnc

__all__ = [
    "CheckReport",
    "check_bifree",
    "check_bifree_over_D",
    "check_r_cyclic",
    "matrix_cumulant_expand",
    "diagonal_cumulant_formula",
    "ConditionalExpectationError",
]


class ConditionalExpectationError(ValueError):
    """The supplied projection fails the conditional-expectation probes."""


@dataclass
class CheckReport:
    name: str
    tol: float
    max_order: int
    worst: float = 0.0
    witness: dict | None = None
    cells: int = 0
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.worst <= self.tol

    def record(self, value: float, **witness):
        self.cells += 1
        if value > self.worst:
            self.worst = value
            self.witness = witness or None

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "tolerance": self.tol,
            "max_order": self.max_order,
            "worst_residual": self.worst,
            "cells": self.cells,
            "pass": bool(self.passed),
        }
        if self.witness:
            out["witness"] = {k: repr(v) for k, v in self.witness.items()}
        if self.details:
            out["details"] = self.details
        return out


# ---------------------------------------------------------------------------
# bi-freeness of families


def check_bifree(families, max_order: int = 5, tol: float = 1e-9,
                 seed: int = 0, draws: int = 3) -> CheckReport:
    """Mixed cumulants across families must vanish on decorated generators.

    Enumerates every side pattern, every non-constant family assignment, and
    every generator choice up to max_order; each cell is probed with
    coefficient draws on both sides of every argument.
    """
    rng = np.random.default_rng(seed)
    ctx = families[0].ctx
    d = ctx.d
    report = CheckReport("bifree", tol, max_order)
    for n in range(2, max_order + 1):
        for tags in itertools.product("lr", repeat=n):
            pools = []
            for eps in itertools.product(range(len(families)), repeat=n):
                if len(set(eps)) == 1:
                    continue
                pools.append(eps)
            for eps in pools:
                gen_options = []
                for k in range(n):
                    fam = families[eps[k]]
                    names = fam.left if tags[k] == "l" else fam.right
                    gen_options.append([(fam, name) for name in names])
                for combo in itertools.product(*gen_options):
                    for trial in range(draws):
                        # first draw undecorated, the rest with coefficients
                        # around every argument
                        ents = tuple(
                            entry(
                                fam.op(name), tags[k],
                                None if trial == 0 else mx.random_matrix(rng, d),
                                None if trial == 0 else mx.random_matrix(rng, d),
                            )
                            for k, (fam, name) in enumerate(combo)
                        )
                        val = eval_cumulant_full(ctx, ents)
                        report.record(
                            float(np.max(np.abs(val))),
                            tags="".join(tags), eps=eps,
                            gens=[name for _, name in combo],
                        )
    return report


# ---------------------------------------------------------------------------
# bi-freeness from the scalars over a subalgebra


def _probe_conditional_expectation(F, d: int, rng, tol: float = 1e-12):
    eye = mx.eye(d)
    if mx.max_abs_diff(F(eye), eye) > tol:
        raise ConditionalExpectationError("projection does not fix the unit")
    for _ in range(4):
        b = mx.random_matrix(rng, d)
        if mx.max_abs_diff(F(F(b)), F(b)) > tol:
            raise ConditionalExpectationError("projection is not idempotent")
        d1, d2 = F(mx.random_matrix(rng, d)), F(mx.random_matrix(rng, d))
        if mx.max_abs_diff(F(d1 @ b @ d2), d1 @ F(b) @ d2) > tol:
            raise ConditionalExpectationError("projection is not a bimodule map")
        # faithfulness witness: F(b* b) must not vanish for nonzero b
        if np.max(np.abs(b)) > 1e-9 and np.max(np.abs(F(b.conj().T @ b))) < 1e-14:
            raise ConditionalExpectationError("projection fails the faithfulness probe")


class _ProjectedContext:
    """Expectation context for the subalgebra-valued theory: the same
    operators with the projected expectation."""

    def __init__(self, base, F):
        self.base = base
        self.F = F
        self.d = base.d

    def entry_key(self, op):
        return ("proj", self.base.entry_key(op))

    def moment(self, entries):
        return self.F(self.base.moment(entries))


def check_bifree_over_D(family, F=mx.cond_expect_diag, max_order: int = 3,
                        tol: float = 1e-8, seed: int = 0, draws: int = 3,
                        also_d_valued: bool = True) -> CheckReport:
    """Projection compatibility of the word-indexed cumulants.

    For every word and random coefficients b, the full-algebra cumulant must
    equal the projection of the cumulant at projected coefficients; with
    also_d_valued the subalgebra-valued cumulant (computed from the projected
    expectation) at projected coefficients is compared as well.
    """
    rng = np.random.default_rng(seed)
    ctx = family.ctx
    d = ctx.d
    _probe_conditional_expectation(F, d, rng)
    proj_ctx = _ProjectedContext(ctx, F)
    proj_family = _FamilyView(proj_ctx, family)
    keys = list(family.left) + list(family.right)
    report = CheckReport("bifree-over-D", tol, max_order)
    for n in range(1, max_order + 1):
        for omega in itertools.product(keys, repeat=n):
            for _ in range(draws if n > 1 else 1):
                bs = tuple(mx.random_matrix(rng, d) for _ in range(n - 1))
                fbs = tuple(F(b) for b in bs)
                lhs = kappa_Z_omega(family, omega, bs)
                rhs = F(kappa_Z_omega(family, omega, fbs))
                report.record(
                    float(np.max(np.abs(lhs - rhs))),
                    omega=omega, condition="projected",
                )
                if also_d_valued:
                    dval = kappa_Z_omega(proj_family, omega, fbs)
                    report.record(
                        float(np.max(np.abs(lhs - dval))),
                        omega=omega, condition="subalgebra-valued",
                    )
    return report


class _FamilyView:
    """The same named operators under a different expectation context."""

    def __init__(self, ctx, family):
        self.ctx = ctx
        self._family = family
        self.left = family.left
        self.right = family.right

    def op(self, key):
        return self._family.op(key)

    def side_of(self, key):
        return self._family.side_of(key)


# ---------------------------------------------------------------------------
# R-cyclicity


def _chain_holds(perm, i_idx, j_idx) -> bool:
    n = len(perm)
    for t in range(n - 1):
        if j_idx[perm[t]] != i_idx[perm[t + 1]]:
            return False
    return j_idx[perm[n - 1]] == i_idx[perm[0]]


def _entry_balance_ok(signatures, omega, i_idx, j_idx) -> bool:
    """Conservative letter-balance filter: a cumulant of single raising and
    lowering entries vanishes unless every letter is raised as often as it
    is lowered."""
    counts: dict = {}
    for q, name in enumerate(omega):
        sig = signatures.get(name)
        if sig is None:
            return True  # unknown structure; cannot filter
        cell = sig[i_idx[q]][j_idx[q]]
        if cell == "any":
            return True
        letter, delta = cell
        counts[letter] = counts.get(letter, 0) + delta
    return all(v == 0 for v in counts.values())


def check_r_cyclic(pair, max_order: int = 4, tol: float = 1e-9) -> CheckReport:
    """Entrywise scalar cumulants must vanish whenever the index chain is
    broken in reading order.

    pair is a MatrixPair: entries[name][i][j] is the scalar element in the
    (i, j) slot (None for zero); signatures, when the model provides them,
    prune tuples whose cumulant vanishes for letter-count reasons.
    """
    d = pair.d
    sctx = pair.scalar_ctx
    names = list(pair.left_names) + list(pair.right_names)
    sides = {name: ("l" if name in pair.left_names else "r") for name in names}
    signatures = getattr(pair, "signatures", {})
    report = CheckReport("r-cyclic", tol, max_order)
    for n in range(1, max_order + 1):
        for omega in itertools.product(names, repeat=n):
            tags = tuple(sides[k] for k in omega)
            perm = ChiShape(tags).permutation
            for i_idx in itertools.product(range(d), repeat=n):
                for j_idx in itertools.product(range(d), repeat=n):
                    if _chain_holds(perm, i_idx, j_idx):
                        continue
                    ents = []
                    dead = False
                    for q, name in enumerate(omega):
                        op = pair.entries[name][i_idx[q]][j_idx[q]]
                        if op is None:
                            dead = True
                            break
                        ents.append(entry(op, tags[q]))
                    if dead:
                        continue
                    if signatures and not _entry_balance_ok(
                            signatures, omega, i_idx, j_idx):
                        continue
                    val = eval_cumulant_full(sctx, tuple(ents))
                    report.record(
                        float(abs(val[0, 0])),
                        omega=omega, i=i_idx, j=j_idx,
                    )
    return report


# ---------------------------------------------------------------------------
# entrywise expansions


def _matrix_units_product(d: int, perm, i_idx, j_idx) -> np.ndarray:
    out = mx.eye(d)
    for t in perm:
        out = out @ mx.matrix_unit(d, i_idx[t], j_idx[t])
        if not np.any(out):
            return out
    return out


def matrix_cumulant_expand(pair, omega, tol_zero: float = 0.0) -> tuple:
    """Full-matrix cumulant against the entrywise expansion.

    Returns (matrix-level value, entrywise sum).  The entrywise sum weights
    each scalar cumulant of entry operators by the reading-order product of
    matrix units.
    """
    d = pair.d
    sctx = pair.scalar_ctx
    fam = pair.model.families[0]
    tags = tuple(fam.side_of(k) for k in omega)
    n = len(omega)
    perm = ChiShape(tags).permutation
    lhs = eval_cumulant_full(
        fam.ctx, tuple(entry(fam.op(k), t) for k, t in zip(omega, tags))
    )
    signatures = getattr(pair, "signatures", {})
    rhs = np.zeros((d, d), complex)
    for i_idx in itertools.product(range(d), repeat=n):
        for j_idx in itertools.product(range(d), repeat=n):
            units = _matrix_units_product(d, perm, i_idx, j_idx)
            if not np.any(units):
                continue
            ents = []
            dead = False
            for q, name in enumerate(omega):
                op = pair.entries[name][i_idx[q]][j_idx[q]]
                if op is None:
                    dead = True
                    break
                ents.append(entry(op, tags[q]))
            if dead:
                continue
            if signatures and not _entry_balance_ok(signatures, omega, i_idx, j_idx):
                continue
            val = eval_cumulant_full(sctx, tuple(ents))[0, 0]
            rhs = rhs + val * units
    return lhs, rhs


def diagonal_cumulant_formula(pair, omega, lambdas, gammas) -> tuple:
    """Diagonal-valued cumulant of diagonally decorated matrices against the
    closed-chain entrywise sum.

    lambdas and gammas are length-n sequences of diagonal vectors; left
    arguments are decorated L(Lambda) Z L(Gamma), right arguments
    R(Gamma) Z R(Lambda).  Returns (engine value, entrywise sum).
    """
    d = pair.d
    sctx = pair.scalar_ctx
    fam = pair.model.families[0]
    tags = tuple(fam.side_of(k) for k in omega)
    n = len(omega)
    perm = ChiShape(tags).permutation
    proj_ctx = _ProjectedContext(fam.ctx, mx.cond_expect_diag)
    ents = []
    for q, name in enumerate(omega):
        lam = mx.diag_matrix(lambdas[q])
        gam = mx.diag_matrix(gammas[q])
        if tags[q] == "l":
            ents.append(entry(fam.op(name), "l", lam, gam))
        else:
            ents.append(entry(fam.op(name), "r", gam, lam))
    lhs = eval_cumulant_full(proj_ctx, tuple(ents))
    signatures = getattr(pair, "signatures", {})
    rhs = np.zeros((d, d), complex)
    for i_idx in itertools.product(range(d), repeat=n):
        for j_idx in itertools.product(range(d), repeat=n):
            ok = all(
                j_idx[perm[t]] == i_idx[perm[t + 1]] for t in range(n - 1)
            ) and j_idx[perm[n - 1]] == i_idx[perm[0]]
            if not ok:
                continue
            sent = []
            dead = False
            for q, name in enumerate(omega):
                op = pair.entries[name][i_idx[q]][j_idx[q]]
                if op is None:
                    dead = True
                    break
                sent.append(entry(op, tags[q]))
            if dead:
                continue
            if signatures and not _entry_balance_ok(signatures, omega, i_idx, j_idx):
                continue
            val = eval_cumulant_full(sctx, tuple(sent))[0, 0]
            coef = complex(np.prod([lambdas[q][i_idx[q]] for q in range(n)]))
            coef *= complex(np.prod([gammas[q][j_idx[q]] for q in range(n)]))
            a = i_idx[perm[0]]
            rhs[a, a] += coef * val
    return lhs, rhs

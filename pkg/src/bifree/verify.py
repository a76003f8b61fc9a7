"""Identity verifiers for the transform layer.

Every verifier evaluates both sides of one displayed identity at concrete
points, through independent routes wherever the structure allows, and
returns the residual next to the tail tolerance assembled from the series it
actually ran.  Inputs marked "pair of contexts" expect constructions that
are bi-free by model design (disjoint generators).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matrices as mx
from .cumulants import entry, eval_cumulant_pi
from .operators import OpElement, expectation_of_word
from .partitions import (
    enumerate_bnc_S,
    enumerate_bnc_S_oprime,
    enumerate_bnc_T,
    enumerate_bnc_T_oprime,
)
from .series import (
    Inversion,
    SeriesContext,
    cumulant_series,
    invert_phi,
    invert_psi,
    kappa_series,
    moment_series,
    psi_pinched,
    s_partial,
    s_transform,
    t_transform,
    two_face_cumulant,
    two_face_moment,
)

__all__ = [
    "ResidualReport",
    "verify_left_relations",
    "verify_right_relations",
    "verify_two_face_degenerations",
    "verify_central_agreement",
    "verify_r_transform",
    "verify_r_additivity",
    "verify_inversion_contracts",
    "verify_phi_psi_equivalence",
    "verify_psi_move_around",
    "verify_s_lemmata",
    "verify_free_s",
    "verify_t_property",
    "verify_t_cases",
    "verify_s_property",
    "verify_s_cases",
]

TAIL_SAFETY = 8.0
TAIL_FLOOR = 1e-12


@dataclass
class ResidualReport:
    name: str
    residual: float
    tail_tol: float
    data: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.residual <= self.tail_tol

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "residual": self.residual,
            "tail_tol": self.tail_tol,
            "pass": bool(self.passed),
        }
        out.update({k: v for k, v in self.data.items() if isinstance(v, (int, float, str))})
        return out


def _tau(*tails, safety: float = TAIL_SAFETY, floor: float = TAIL_FLOOR) -> float:
    return safety * float(sum(tails)) + floor


def _report(name, lhs, rhs, *tails, **data) -> ResidualReport:
    res = mx.max_abs_diff(np.asarray(lhs), np.asarray(rhs))
    return ResidualReport(name, float(res), _tau(*tails), data)


# ---------------------------------------------------------------------------
# one-face relations


def verify_left_relations(sc: SeriesContext, b) -> list[ResidualReport]:
    d = sc.d
    G = moment_series(sc, "l", "G", b)
    M = moment_series(sc, "l", "M", b)
    C = cumulant_series(sc, "l", "C", b)
    R = cumulant_series(sc, "l", "R", b)
    C_at = cumulant_series(sc, "l", "C", M.value @ b)
    return [
        _report("left:G=Mb", G.value, M.value @ b, G.tail, M.tail),
        _report("left:C=1+bR", C.value, mx.eye(d) + b @ R.value, C.tail, R.tail),
        _report("left:M=C(Mb)", M.value, C_at.value, M.tail, C_at.tail),
    ]


def verify_right_relations(sc: SeriesContext, d_) -> list[ResidualReport]:
    d = sc.d
    G = moment_series(sc, "r", "G", d_)
    M = moment_series(sc, "r", "M", d_)
    C = cumulant_series(sc, "r", "C", d_)
    R = cumulant_series(sc, "r", "R", d_)
    C_at = cumulant_series(sc, "r", "C", d_ @ M.value)
    return [
        _report("right:G=dM", G.value, d_ @ M.value, G.tail, M.tail),
        _report("right:C=1+Rd", C.value, mx.eye(d) + R.value @ d_, C.tail, R.tail),
        _report("right:M=C(dM)", M.value, C_at.value, M.tail, C_at.tail),
    ]


def verify_two_face_degenerations(sc: SeriesContext, b, c, d_) -> list[ResidualReport]:
    zero = np.zeros((sc.d, sc.d), complex)
    Ml = moment_series(sc, "l", "M", b)
    Mr = moment_series(sc, "r", "M", d_)
    Cl = cumulant_series(sc, "l", "C", b)
    Cr = cumulant_series(sc, "r", "C", d_)
    Mb0 = two_face_moment(sc, b, c, zero)
    M0d = two_face_moment(sc, zero, c, d_)
    Cb0 = two_face_cumulant(sc, b, c, zero)
    C0d = two_face_cumulant(sc, zero, c, d_)
    M00 = two_face_moment(sc, zero, c, zero)
    return [
        _report("degenerate:M(b,c,0)", Mb0.value, Ml.value @ c, Mb0.tail, Ml.tail),
        _report("degenerate:M(0,c,d)", M0d.value, c @ Mr.value, M0d.tail, Mr.tail),
        _report("degenerate:C(b,c,0)", Cb0.value, Cl.value @ c, Cb0.tail, Cl.tail),
        _report("degenerate:C(0,c,d)", C0d.value, c @ Cr.value, C0d.tail, Cr.tail),
        _report("degenerate:M(0,c,0)", M00.value, c, M00.tail),
    ]


def verify_central_agreement(sc: SeriesContext, b, c, d_) -> ResidualReport:
    """The trailing central coefficient may ride on either side."""
    lb = OpElement.left_scalar(sc.ctx.space, sc.d, b)
    rd = OpElement.right_scalar(sc.ctx.space, sc.d, d_)
    lc = OpElement.left_scalar(sc.ctx.space, sc.d, c)
    rc = OpElement.right_scalar(sc.ctx.space, sc.d, c)
    worst = 0.0
    for n in range(0, sc.order + 1):
        for m in range(0, sc.order + 1 - n):
            wl = expectation_of_word([lb, sc.x] * n + [rd, sc.y] * m + [lc])
            wr = expectation_of_word([lb, sc.x] * n + [rd, sc.y] * m + [rc])
            worst = max(worst, mx.max_abs_diff(wl, wr))
    return ResidualReport("central:LcRc", worst, TAIL_FLOOR)


# ---------------------------------------------------------------------------
# the additive transform


def verify_r_transform(sc: SeriesContext, b, c, d_) -> ResidualReport:
    Ml = moment_series(sc, "l", "M", b)
    Mr = moment_series(sc, "r", "M", d_)
    Mxy = two_face_moment(sc, b, c, d_)
    Carg = two_face_cumulant(sc, Ml.value @ b, Mxy.value, d_ @ Mr.value)
    lhs = Ml.value @ Mxy.value + Mxy.value @ Mr.value
    rhs = Ml.value @ c @ Mr.value + Carg.value
    return _report("r-transform", lhs, rhs, Ml.tail, Mr.tail, Mxy.tail, Carg.tail)


def verify_r_additivity(sc1: SeriesContext, sc2: SeriesContext, b, c, d_) -> ResidualReport:
    sc_sum = sc1.with_elements(sc1.x + sc2.x, sc1.y + sc2.y, name="sum")
    csum = two_face_cumulant(sc_sum, b, c, d_)
    c1 = two_face_cumulant(sc1, b, c, d_)
    c2 = two_face_cumulant(sc2, b, c, d_)
    lhs = csum.value - c
    rhs = (c1.value - c) + (c2.value - c)
    return _report("r-additivity", lhs, rhs, csum.tail, c1.tail, c2.tail)


# ---------------------------------------------------------------------------
# inversion and the one-sided multiplicative transform


def verify_inversion_contracts(sc: SeriesContext, rng, points: int = 3) -> list[ResidualReport]:
    out = []
    for side in ("l", "r"):
        ex = sc.ex if side == "l" else sc.ey
        scale = sc.rho * 0.5 * float(np.linalg.norm(ex, 2))
        for k in range(points):
            v = mx.random_invertible(rng, sc.d, scale=scale)
            inv = invert_phi(sc, side, v)
            phi = cumulant_series(sc, side, "Phi", inv.point)
            out.append(_report(
                f"invert:{side}:round-trip-{k}", phi.value, v, phi.tail, inv.tail,
            ))
            out.append(ResidualReport(
                f"invert:{side}:fixed-point-{k}", inv.fixed_point_residual, 1e-10,
            ))
            u = mx.random_invertible(rng, sc.d, scale=sc.rho * 0.5)
            phi_u = cumulant_series(sc, side, "Phi", u)
            back = invert_phi(sc, side, phi_u.value)
            out.append(_report(
                f"invert:{side}:reverse-{k}", back.point, u, phi_u.tail, back.tail,
            ))
        inv0 = invert_phi(sc, side, np.zeros((sc.d, sc.d), complex))
        out.append(_report(
            f"invert:{side}:theta-at-zero", inv0.theta, mx.inverse(ex), inv0.tail,
        ))
    return out


def verify_phi_psi_equivalence(sc: SeriesContext, b, d_) -> list[ResidualReport]:
    """The two compositional definitions of the one-sided transform agree."""
    eye = mx.eye(sc.d)
    out = []
    s_l = s_transform(sc, "l", b, route="theta")
    psi_inv = invert_psi(sc, "l", b)
    via_psi = (eye + b) @ mx.inverse(np.asarray(b, complex)) @ psi_inv.point
    out.append(_report("s-def:left", s_l, via_psi, psi_inv.fixed_point_residual,
                       cumulant_series(sc, "l", "R", b).tail))
    s_r = s_transform(sc, "r", d_, route="theta")
    psi_inv_r = invert_psi(sc, "r", d_)
    via_psi_r = psi_inv_r.point @ mx.inverse(np.asarray(d_, complex)) @ (eye + d_)
    out.append(_report("s-def:right", s_r, via_psi_r, psi_inv_r.fixed_point_residual,
                       cumulant_series(sc, "r", "R", d_).tail))
    out.append(_report(
        "s-def:literal-left", s_l, s_transform(sc, "l", b, route="literal"), 0.0,
    ))
    out.append(_report(
        "s-def:literal-right", s_r, s_transform(sc, "r", d_, route="literal"), 0.0,
    ))
    return out


# ---------------------------------------------------------------------------
# pinched series identities


def _lb_el(sc, b):
    return OpElement.left_scalar(sc.ctx.space, sc.d, b)


def _rb_el(sc, b):
    return OpElement.right_scalar(sc.ctx.space, sc.d, b)


def verify_psi_move_around(sc1: SeriesContext, sc2: SeriesContext, b, d_) -> list[ResidualReport]:
    x1, y1 = sc1.x, sc1.y
    x2, y2 = sc2.x, sc2.y
    lb, rd = _lb_el(sc1, b), _rb_el(sc1, d_)
    pl1 = psi_pinched(sc1, "l", x2 * lb, x1)
    pl2 = psi_pinched(sc1, "l", x2, lb * x1)
    pr1 = psi_pinched(sc1, "r", y2 * rd, y1)
    pr2 = psi_pinched(sc1, "r", y2, rd * y1)
    return [
        _report("psi:move-around-left", pl1.value, pl2.value @ b, pl1.tail, pl2.tail),
        _report("psi:move-around-right", pr1.value, d_ @ pr2.value, pr1.tail, pr2.tail),
    ]


def verify_s_lemmata(sc1: SeriesContext, sc2: SeriesContext, b, d_) -> list[ResidualReport]:
    """The four pinched-series lemmas, the two displayed consequences, and
    the product-inverse identity used by the mixed transform, on both sides."""
    out = []
    x1, y1, x2, y2 = sc1.x, sc1.y, sc2.x, sc2.y
    lb, rd = _lb_el(sc1, b), _rb_el(sc1, d_)
    prod = sc1.with_elements(x1 * x2, y1 * y2, name="prod")

    # left side
    phi_prod = cumulant_series(prod, "l", "Phi", b)
    psi_ab = psi_pinched(sc1, "l", lb * x1, x2)
    psi_ba = psi_pinched(sc1, "l", x2, lb * x1)
    out.append(_report("s-lem-1:left", phi_prod.value,
                       psi_ab.value @ psi_ba.value,
                       phi_prod.tail, psi_ab.tail, psi_ba.tail))
    phi2_at = cumulant_series(sc2, "l", "Phi", psi_ab.value)
    out.append(_report("s-lem-2:left", phi_prod.value, phi2_at.value,
                       phi_prod.tail, phi2_at.tail))
    psi_swap = psi_pinched(sc1, "l", x2 * lb, x1)
    phi1_at = cumulant_series(sc1, "l", "Phi", psi_swap.value)
    out.append(_report("s-lem-3:left",
                       psi_ba.value @ psi_ab.value, phi1_at.value,
                       psi_ba.tail, psi_ab.tail, phi1_at.tail))
    inv2 = invert_phi(sc2, "l", phi_prod.value)
    out.append(_report("pinched-to-inverse:left", psi_ab.value, inv2.point,
                       psi_ab.tail, inv2.tail, phi_prod.tail))
    out.append(_report("inverse-times-pinched:left",
                       inv2.point @ psi_ba.value, phi_prod.value,
                       inv2.tail, psi_ba.tail, phi_prod.tail))
    # the remaining two need the inverse at the sample point itself
    inv_prod = invert_phi(prod, "l", b)
    s2 = s_transform(sc2, "l", b)
    psi4 = psi_pinched(sc1, "l", x2, _lb_el(sc1, inv_prod.point) * x1)
    out.append(_report("s-lem-4:left", psi4.value, mx.inverse(s2),
                       psi4.tail, inv_prod.tail))
    psi5 = psi_pinched(sc1, "l", x2 * _lb_el(sc1, inv_prod.point), x1)
    inv1_at = invert_phi(sc1, "l", mx.inverse(s2) @ b @ s2)
    out.append(_report("s-lem-T:left", psi5.value, inv1_at.point,
                       psi5.tail, inv1_at.tail, inv_prod.tail))

    # right side
    phi_prod_r = cumulant_series(prod, "r", "Phi", d_)
    psi_ab_r = psi_pinched(sc1, "r", rd * y1, y2)
    psi_ba_r = psi_pinched(sc1, "r", y2, rd * y1)
    out.append(_report("s-lem-1:right", phi_prod_r.value,
                       psi_ba_r.value @ psi_ab_r.value,
                       phi_prod_r.tail, psi_ab_r.tail, psi_ba_r.tail))
    phi2_at_r = cumulant_series(sc2, "r", "Phi", psi_ab_r.value)
    out.append(_report("s-lem-2:right", phi_prod_r.value, phi2_at_r.value,
                       phi_prod_r.tail, phi2_at_r.tail))
    psi_swap_r = psi_pinched(sc1, "r", y2 * rd, y1)
    phi1_at_r = cumulant_series(sc1, "r", "Phi", psi_swap_r.value)
    out.append(_report("s-lem-3:right",
                       psi_ab_r.value @ psi_ba_r.value, phi1_at_r.value,
                       psi_ab_r.tail, psi_ba_r.tail, phi1_at_r.tail))
    inv2_r = invert_phi(sc2, "r", phi_prod_r.value)
    out.append(_report("pinched-to-inverse:right", psi_ab_r.value, inv2_r.point,
                       psi_ab_r.tail, inv2_r.tail, phi_prod_r.tail))
    out.append(_report("inverse-times-pinched:right",
                       psi_ba_r.value @ inv2_r.point, phi_prod_r.value,
                       inv2_r.tail, psi_ba_r.tail, phi_prod_r.tail))
    inv_prod_r = invert_phi(prod, "r", d_)
    s2r = s_transform(sc2, "r", d_)
    psi4_r = psi_pinched(sc1, "r", y2, _rb_el(sc1, inv_prod_r.point) * y1)
    out.append(_report("s-lem-4:right", psi4_r.value, mx.inverse(s2r),
                       psi4_r.tail, inv_prod_r.tail))
    psi5_r = psi_pinched(sc1, "r", y2 * _rb_el(sc1, inv_prod_r.point), y1)
    inv1_at_r = invert_phi(sc1, "r", s2r @ d_ @ mx.inverse(s2r))
    out.append(_report("s-lem-T:right", psi5_r.value, inv1_at_r.point,
                       psi5_r.tail, inv1_at_r.tail, inv_prod_r.tail))
    return out


def verify_free_s(sc1: SeriesContext, sc2: SeriesContext, b, d_) -> list[ResidualReport]:
    prod = sc1.with_elements(sc1.x * sc2.x, sc1.y * sc2.y, name="prod")
    out = []
    s_prod = s_transform(prod, "l", b)
    s2 = s_transform(sc2, "l", b)
    s1_at = s_transform(sc1, "l", mx.inverse(s2) @ b @ s2)
    inv_tail = invert_phi(prod, "l", b).tail + invert_phi(sc2, "l", b).tail
    out.append(_report("free-s:left", s_prod, s2 @ s1_at, inv_tail))
    s_prod_r = s_transform(prod, "r", d_)
    s2r = s_transform(sc2, "r", d_)
    s1r_at = s_transform(sc1, "r", s2r @ d_ @ mx.inverse(s2r))
    inv_tail_r = invert_phi(prod, "r", d_).tail + invert_phi(sc2, "r", d_).tail
    out.append(_report("free-s:right", s_prod_r, s1r_at @ s2r, inv_tail_r))
    return out


# ---------------------------------------------------------------------------
# the mixed partial transforms


def verify_t_property(sc1: SeriesContext, sc2: SeriesContext, b, c, d_) -> ResidualReport:
    comb = sc1.with_elements(sc1.x + sc2.x, sc1.y * sc2.y, name="comb")
    lhs = t_transform(comb, b, c, d_)
    s2r = s_transform(sc2, "r", d_)
    s2r_i = mx.inverse(s2r)
    t2 = t_transform(sc2, b, c, d_)
    rhs = t_transform(sc1, b, t2.value @ s2r_i, s2r @ d_ @ s2r_i)
    return _report("t-property", lhs.value, rhs.value @ s2r,
                   lhs.tail, rhs.tail, t2.tail)


def verify_s_property(sc1: SeriesContext, sc2: SeriesContext, b, c, d_) -> ResidualReport:
    comb = sc1.with_elements(sc1.x * sc2.x, sc1.y * sc2.y, name="comb")
    lhs = s_partial(comb, b, c, d_)
    s2l = s_transform(sc2, "l", b)
    s2r = s_transform(sc2, "r", d_)
    s2l_i, s2r_i = mx.inverse(s2l), mx.inverse(s2r)
    s2_mid = s_partial(sc2, b, c, d_)
    inner = s_partial(sc1, s2l_i @ b @ s2l, s2l_i @ s2_mid.value @ s2r_i,
                      s2r @ d_ @ s2r_i)
    return _report("s-property", lhs.value, s2l @ inner.value @ s2r,
                   lhs.tail, inner.tail, s2_mid.tail)


# ---------------------------------------------------------------------------
# split sums over the dedicated partition families


def _t_entries(sc1, sc2, b, c, d_, n, m):
    xsum = sc1.x + sc2.x
    ents = [entry(xsum, "l", pre=b) for _ in range(n)]
    for j in range(m):
        ents.append(entry(sc1.y, "r", pre=d_))
        ents.append(entry(sc2.y, "r", suf=c if j == m - 1 else None))
    return tuple(ents)


def _family_sum(ctx, parts, ents):
    d = ctx.d
    total = np.zeros((d, d), complex)
    for part in parts:
        total = total + eval_cumulant_pi(ctx, part, ents, method="reduce")
    return total


def _psi_T(sc1, sc2, b, c, d_, cls, order) -> np.ndarray:
    total = np.zeros((sc1.d, sc1.d), complex)
    for n in range(1, order):
        for m in range(1, order + 1 - n):
            parts = enumerate_bnc_T(n, m, cls)
            total = total + _family_sum(sc1.ctx, parts, _t_entries(sc1, sc2, b, c, d_, n, m))
    return total


def _psi_T_oprime(sc1, sc2, b, c, d_, order) -> np.ndarray:
    xsum = sc1.x + sc2.x
    total = np.zeros((sc1.d, sc1.d), complex)
    for n in range(1, order + 1):
        for m in range(0, order + 1 - n):
            ents = [entry(xsum, "l", pre=b) for _ in range(n)]
            for j in range(m):
                ents.append(entry(sc2.y, "r"))
                ents.append(entry(sc1.y, "r", pre=d_))
            ents.append(entry(sc2.y, "r", suf=c))
            parts = enumerate_bnc_T_oprime(n, m)
            total = total + _family_sum(sc1.ctx, parts, tuple(ents))
    return total


def verify_t_cases(sc1: SeriesContext, sc2: SeriesContext, b, c, d_) -> list[ResidualReport]:
    """The three split identities behind the mixed additive transform."""
    order = sc1.order
    psi_r_12 = psi_pinched(sc1, "r", _rb_el(sc1, d_) * sc1.y, sc2.y)
    psi_r_21 = psi_pinched(sc1, "r", sc2.y, _rb_el(sc1, d_) * sc1.y)
    k2 = kappa_series(sc2, b, c, psi_r_12.value)
    out = []
    psi_e = _psi_T(sc1, sc2, b, c, d_, "e", order)
    out.append(_report("t-case-1", psi_e, k2.value,
                       k2.tail, psi_r_12.tail))
    psi_op = _psi_T_oprime(sc1, sc2, b, c, d_, order)
    out.append(_report("t-case-2", psi_op,
                       k2.value @ mx.inverse(psi_r_12.value),
                       k2.tail, psi_r_12.tail))
    psi_o = _psi_T(sc1, sc2, b, c, d_, "o", order)
    arg_c = psi_op + c @ psi_r_21.value
    arg_d = d_ @ psi_r_21.value
    k1 = kappa_series(sc1, b, arg_c, arg_d)
    rhs = k1.value @ mx.inverse(arg_d) @ d_
    out.append(_report("t-case-3", psi_o, rhs, k1.tail, psi_r_21.tail))
    return out


def _s_entries(sc1, sc2, b, c, d_, n, m):
    ents = []
    for _ in range(n):
        ents.append(entry(sc1.x, "l", pre=b))
        ents.append(entry(sc2.x, "l"))
    for j in range(m):
        ents.append(entry(sc1.y, "r", pre=d_))
        ents.append(entry(sc2.y, "r", suf=c if j == m - 1 else None))
    return tuple(ents)


def _psi_S(sc1, sc2, b, c, d_, cls, order) -> np.ndarray:
    total = np.zeros((sc1.d, sc1.d), complex)
    for n in range(1, order):
        for m in range(1, order + 1 - n):
            parts = enumerate_bnc_S(n, m, cls)
            total = total + _family_sum(sc1.ctx, parts, _s_entries(sc1, sc2, b, c, d_, n, m))
    return total


def _psi_S_oprime(sc1, sc2, b, c, d_, cls, order) -> np.ndarray:
    total = np.zeros((sc1.d, sc1.d), complex)
    for n in range(0, order + 1):
        for m in range(0, order + 1 - n):
            ents = [entry(sc2.x, "l")]
            for _ in range(n):
                ents.append(entry(sc1.x, "l", pre=b))
                ents.append(entry(sc2.x, "l"))
            for _ in range(m):
                ents.append(entry(sc2.y, "r"))
                ents.append(entry(sc1.y, "r", pre=d_))
            ents.append(entry(sc2.y, "r", suf=c))
            parts = enumerate_bnc_S_oprime(n, m, cls)
            total = total + _family_sum(sc1.ctx, parts, tuple(ents))
    return total


def verify_s_cases(sc1: SeriesContext, sc2: SeriesContext, b, c, d_) -> list[ResidualReport]:
    """The six split identities behind the two-sided multiplicative
    transform."""
    order = sc1.order
    lb, rd = _lb_el(sc1, b), _rb_el(sc1, d_)
    psi_l_12 = psi_pinched(sc1, "l", lb * sc1.x, sc2.x)
    psi_l_21 = psi_pinched(sc1, "l", sc2.x, lb * sc1.x)
    psi_r_12 = psi_pinched(sc1, "r", rd * sc1.y, sc2.y)
    psi_r_21 = psi_pinched(sc1, "r", sc2.y, rd * sc1.y)
    psi_l_inv = mx.inverse(psi_l_12.value)
    psi_r_inv = mx.inverse(psi_r_12.value)
    k2 = kappa_series(sc2, psi_l_12.value, c, psi_r_12.value)
    base_tails = (k2.tail, psi_l_12.tail, psi_r_12.tail)
    out = []
    psi_e = _psi_S(sc1, sc2, b, c, d_, "e", order)
    out.append(_report("s-case-1", psi_e, k2.value, *base_tails))
    phi2l = cumulant_series(sc2, "l", "Phi", psi_l_12.value)
    phi2r = cumulant_series(sc2, "r", "Phi", psi_r_12.value)
    psi_o0 = _psi_S_oprime(sc1, sc2, b, c, d_, "0", order)
    out.append(_report(
        "s-case-2", psi_o0,
        psi_l_inv @ phi2l.value @ c @ phi2r.value @ psi_r_inv,
        phi2l.tail, phi2r.tail, psi_l_12.tail, psi_r_12.tail,
    ))
    psi_or = _psi_S_oprime(sc1, sc2, b, c, d_, "r", order)
    out.append(_report(
        "s-case-3", psi_or,
        psi_l_21.value @ k2.value @ psi_r_inv,
        *base_tails, psi_l_21.tail,
    ))
    psi_ol = _psi_S_oprime(sc1, sc2, b, c, d_, "l", order)
    out.append(_report(
        "s-case-4", psi_ol,
        psi_l_inv @ k2.value @ psi_r_21.value,
        *base_tails, psi_r_21.tail,
    ))
    psi_olr = _psi_S_oprime(sc1, sc2, b, c, d_, "lr", order)
    out.append(_report(
        "s-case-5", psi_olr,
        psi_l_inv @ k2.value @ psi_r_inv,
        *base_tails,
    ))
    psi_o = _psi_S(sc1, sc2, b, c, d_, "o", order)
    psi_oprime = psi_o0 + psi_or + psi_ol + psi_olr
    arg_b = psi_l_21.value @ b
    arg_d = d_ @ psi_r_21.value
    k2o = kappa_series(sc2, arg_b, psi_oprime, arg_d)
    rhs = b @ mx.inverse(arg_b) @ k2o.value @ mx.inverse(arg_d) @ d_
    out.append(_report(
        "s-case-6", psi_o, rhs,
        k2o.tail, psi_l_21.tail, psi_r_21.tail,
    ))
    return out

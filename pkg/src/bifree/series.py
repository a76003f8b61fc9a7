"""Truncated series evaluation for the transform layer.

All the one- and two-sided series are evaluated as partial sums to a fixed
total order at concrete coefficient points of norm at most rho.  Every value
carries the norms of its last two retained orders, from which a geometric
tail estimate is formed: the contract replaces "for sufficiently small
points" by (order, rho, tail) reported with every number.

Compositional inversion runs the factored fixed point u <- v * phi(u)^{-1}
(opposite order on the right side), seeded at the inverse mean, with a
finite-difference Newton fallback if the contraction stalls.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matrices as mx
from .cumulants import entry, eval_cumulant_full, eval_cumulant_pi
from .families import OperatorExpectation
from .operators import OpElement, expectation_of_word
from .partitions import enumerate_bnc_prime

__all__ = [
    "SeriesContext",
    "SeriesValue",
    "Inversion",
    "TransformValue",
    "NormTooLargeError",
    "NoConvergenceError",
    "moment_series",
    "cumulant_series",
    "two_face_moment",
    "two_face_cumulant",
    "kappa_series",
    "invert_phi",
    "invert_psi",
    "s_transform",
    "psi_pinched",
    "t_transform",
    "s_partial",
    "sample_points",
]


class NormTooLargeError(ValueError):
    """A sample point exceeds the context's norm budget."""


class NoConvergenceError(RuntimeError):
    """Compositional inversion failed to contract within the iteration cap."""


class _TermTracker:
    """Collects per-order term norms and extrapolates the omitted tail
    geometrically from the last two retained orders."""

    def __init__(self, order: int):
        self.order = order
        self.by_order: dict[int, float] = {}

    def add(self, order: int, term: np.ndarray):
        norm = float(np.max(np.abs(term)))
        self.by_order[order] = max(self.by_order.get(order, 0.0), norm)

    def last_pair(self) -> tuple[float, float]:
        last = self.by_order.get(self.order, 0.0)
        prev = self.by_order.get(self.order - 1, 0.0)
        return last, prev

    def tail(self) -> float:
        last, prev = self.last_pair()
        if last == 0.0:
            return 0.0
        ratio = last / prev if prev > 0 else 0.5
        ratio = min(max(ratio, 0.05), 0.9)
        return last * ratio / (1.0 - ratio)


@dataclass
class SeriesValue:
    value: np.ndarray
    order: int
    last_term_norm: float
    prev_term_norm: float = 0.0

    @property
    def tail(self) -> float:
        if self.last_term_norm == 0.0:
            return 0.0
        r = self.last_term_norm / self.prev_term_norm if self.prev_term_norm else 0.5
        r = min(max(r, 0.05), 0.9)
        return self.last_term_norm * r / (1.0 - r)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.value, dtype=dtype)


def _finish(tracker: _TermTracker, value: np.ndarray) -> SeriesValue:
    last, prev = tracker.last_pair()
    return SeriesValue(value, tracker.order, last, prev)


@dataclass
class TransformValue:
    value: np.ndarray
    tail: float

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.value, dtype=dtype)


@dataclass
class SeriesContext:
    """A designated left/right pair with the truncation contract."""

    ctx: OperatorExpectation
    x: OpElement
    y: OpElement
    order: int = 6
    rho: float = 0.08
    name: str = ""
    _ex: np.ndarray | None = field(default=None, repr=False)
    _ey: np.ndarray | None = field(default=None, repr=False)

    @property
    def d(self) -> int:
        return self.ctx.d

    @property
    def ex(self) -> np.ndarray:
        if self._ex is None:
            self._ex = expectation_of_word([self.x])
        return self._ex

    @property
    def ey(self) -> np.ndarray:
        if self._ey is None:
            self._ey = expectation_of_word([self.y])
        return self._ey

    def check_point(self, b, name: str = "point", slack: float = 2.0):
        norm = float(np.linalg.norm(np.asarray(b), 2))
        if norm > self.rho * slack:
            raise NormTooLargeError(f"{name} has norm {norm:.3g} > rho={self.rho}")

    def with_elements(self, x, y, name=""):
        return SeriesContext(self.ctx, x, y, self.order, self.rho, name)

    def at_order(self, order: int):
        return SeriesContext(self.ctx, self.x, self.y, order, self.rho, self.name)


def sample_points(sc: SeriesContext, rng, count: int):
    """Invertible-with-margin left/right points of norm rho and a unit-size
    central point."""
    pts = []
    for _ in range(count):
        b = mx.random_invertible(rng, sc.d, scale=sc.rho)
        d_ = mx.random_invertible(rng, sc.d, scale=sc.rho)
        c = mx.random_matrix(rng, sc.d, scale=1.0)
        c = c / max(np.linalg.norm(c, 2), 1e-9)
        pts.append((b, c, d_))
    return pts


# ---------------------------------------------------------------------------
# one-face series


def _lb(sc, b):
    return OpElement.left_scalar(sc.ctx.space, sc.d, b)


def _rb(sc, b):
    return OpElement.right_scalar(sc.ctx.space, sc.d, b)


def moment_series(sc: SeriesContext, side: str, kind: str, point) -> SeriesValue:
    """Moment-type series: kinds 'G' (resolvent-like), 'M' (1 + moments),
    'Psi' (M - 1)."""
    sc.check_point(point)
    d = sc.d
    dec = _lb(sc, point) if side == "l" else _rb(sc, point)
    op = sc.x if side == "l" else sc.y
    tracker = _TermTracker(sc.order)
    total = np.zeros((d, d), complex)
    if kind in ("M", "Psi"):
        if kind == "M":
            total = total + mx.eye(d)
        for n in range(1, sc.order + 1):
            term = expectation_of_word([dec, op] * n)
            total = total + term
            tracker.add(n, term)
        return _finish(tracker, total)
    if kind == "G":
        for n in range(0, sc.order + 1):
            term = expectation_of_word([dec, op] * n + [dec])
            total = total + term
            tracker.add(n, term)
        return _finish(tracker, total)
    raise ValueError(f"unknown moment series kind {kind!r}")


def cumulant_series(sc: SeriesContext, side: str, kind: str, point) -> SeriesValue:
    """Cumulant-type series: kinds 'R' (first argument bare), 'C'
    (1 + decorated sum), 'Phi' (C - 1)."""
    sc.check_point(point)
    d = sc.d
    op, tag = (sc.x, "l") if side == "l" else (sc.y, "r")
    tracker = _TermTracker(sc.order)
    total = np.zeros((d, d), complex)
    if kind == "R":
        for n in range(0, sc.order):
            ents = (entry(op, tag),) + tuple(
                entry(op, tag, pre=point) for _ in range(n)
            )
            term = eval_cumulant_full(sc.ctx, ents)
            total = total + term
            tracker.add(n + 1, term)
        tracker.order = sc.order  # indexed by argument count
        return _finish(tracker, total)
    if kind in ("C", "Phi"):
        if kind == "C":
            total = total + mx.eye(d)
        for n in range(1, sc.order + 1):
            ents = tuple(entry(op, tag, pre=point) for _ in range(n))
            term = eval_cumulant_full(sc.ctx, ents)
            total = total + term
            tracker.add(n, term)
        return _finish(tracker, total)
    raise ValueError(f"unknown cumulant series kind {kind!r}")


def phi_series(sc, side, point) -> SeriesValue:
    return cumulant_series(sc, side, "Phi", point)


def phi_lower(sc, side, point) -> SeriesValue:
    """The divided series: full cumulant sum with the first argument bare."""
    return cumulant_series(sc, side, "R", point)


# ---------------------------------------------------------------------------
# two-face series


def two_face_moment(sc: SeriesContext, b, c, d_) -> SeriesValue:
    """Double moment series with the central coefficient as a trailing right
    multiplier."""
    sc.check_point(b, "b")
    sc.check_point(d_, "d")
    dd = sc.d
    lb, rd, rc = _lb(sc, b), _rb(sc, d_), _rb(sc, c)
    tracker = _TermTracker(sc.order)
    total = np.zeros((dd, dd), complex)
    for n in range(0, sc.order + 1):
        for m in range(0, sc.order + 1 - n):
            term = expectation_of_word([lb, sc.x] * n + [rd, sc.y] * m + [rc])
            total = total + term
            tracker.add(n + m, term)
    return _finish(tracker, total)


def _k_entries(sc, b, c, d_, n, m, strip_left=False, strip_right=False):
    ents = []
    for i in range(n):
        pre = None if (strip_left and i == 0) else b
        ents.append(entry(sc.x, "l", pre=pre))
    for j in range(m):
        pre = None if (strip_right and j == 0) else d_
        suf = c if j == m - 1 else None
        ents.append(entry(sc.y, "r", pre=pre, suf=suf))
    return tuple(ents)


def kappa_series(sc: SeriesContext, b, c, d_, strip_left=False,
                 strip_right=False) -> SeriesValue:
    """Mixed cumulant series over n, m >= 1 with the central coefficient as a
    suffix on the last right argument; strip_* leaves the first argument of
    that side undecorated (the factored evaluator)."""
    dd = sc.d
    tracker = _TermTracker(sc.order)
    total = np.zeros((dd, dd), complex)
    for n in range(1, sc.order):
        for m in range(1, sc.order + 1 - n):
            term = eval_cumulant_full(
                sc.ctx, _k_entries(sc, b, c, d_, n, m, strip_left, strip_right)
            )
            total = total + term
            tracker.add(n + m, term)
    return _finish(tracker, total)


def two_face_cumulant(sc: SeriesContext, b, c, d_) -> SeriesValue:
    """The three-variable cumulant series: the central point plus the purely
    left sum (central coefficient trailing on the left side) plus the mixed
    sums."""
    dd = sc.d
    tracker = _TermTracker(sc.order)
    total = np.asarray(c, complex).copy()
    for n in range(1, sc.order + 1):
        ents = tuple(entry(sc.x, "l", pre=b) for _ in range(n - 1)) + (
            entry(sc.x, "l", pre=b, suf=c),
        )
        term = eval_cumulant_full(sc.ctx, ents)
        total = total + term
        tracker.add(n, term)
    for m in range(1, sc.order + 1):
        for n in range(0, sc.order + 1 - m):
            term = eval_cumulant_full(sc.ctx, _k_entries(sc, b, c, d_, n, m))
            total = total + term
            tracker.add(n + m, term)
    return _finish(tracker, total)


# ---------------------------------------------------------------------------
# compositional inversion


@dataclass
class Inversion:
    point: np.ndarray
    theta: np.ndarray
    fixed_point_residual: float
    iterations: int
    tail: float = 0.0

    @property
    def value(self) -> np.ndarray:
        return self.point


def invert_phi(sc: SeriesContext, side: str, v, max_iter: int = 50,
               tol: float = 1e-14) -> Inversion:
    """Compositional inverse of the decorated cumulant sum.

    Returns u solving Phi(u) ~ v in the factored form u = v theta (left) or
    u = theta v (right), with theta and the residual of theta * phi(u) - 1
    (opposite order on the right)."""
    d = sc.d
    ex = sc.ex if side == "l" else sc.ey
    theta = mx.inverse(ex)
    v = np.asarray(v, complex)
    scale = max(1.0, float(np.max(np.abs(v))))
    u = v @ theta if side == "l" else theta @ v
    deltas = []
    phi_sv = None
    for it in range(max_iter):
        phi_sv = cumulant_series(sc, side, "R", u)
        theta = mx.inverse(phi_sv.value)
        u_next = v @ theta if side == "l" else theta @ v
        delta = mx.max_abs_diff(u_next, u)
        u = u_next
        deltas.append(delta)
        if delta <= tol * scale:
            break
        if len(deltas) >= 3 and deltas[-1] > deltas[-2] > deltas[-3]:
            u = _newton_invert(sc, side, v, u, max_iter, tol * scale)
            phi_sv = cumulant_series(sc, side, "R", u)
            theta = mx.inverse(phi_sv.value)
            break
    else:
        raise NoConvergenceError(f"no contraction after {max_iter} iterations")
    phi_sv = cumulant_series(sc, side, "R", u)
    if side == "l":
        res = mx.max_abs_diff(theta @ phi_sv.value, mx.eye(d))
    else:
        res = mx.max_abs_diff(phi_sv.value @ theta, mx.eye(d))
    return Inversion(u, theta, res, it + 1, tail=phi_sv.tail)


def _phi_at(sc, side, u):
    return cumulant_series(sc, side, "Phi", u).value


def _newton_invert(sc, side, v, u0, max_iter, tol):
    """Finite-difference Newton on the flattened coefficient space."""
    d = sc.d
    u = u0.copy()
    eps = 1e-7
    for _ in range(max_iter):
        f = _phi_at(sc, side, u) - v
        if np.max(np.abs(f)) <= tol:
            return u
        jac = np.zeros((d * d, d * d), complex)
        for k in range(d * d):
            du = np.zeros((d, d), complex)
            du.flat[k] = eps
            jac[:, k] = ((_phi_at(sc, side, u + du) - f - v) / eps).ravel()
        step = np.linalg.solve(jac, f.ravel())
        u = u - step.reshape(d, d)
    raise NoConvergenceError("newton fallback did not converge")


def invert_psi(sc: SeriesContext, side: str, v, max_iter: int = 50,
               tol: float = 1e-14) -> Inversion:
    """Compositional inverse of the moment sum, by the same factorisation
    with the divided moment series as kernel."""
    d = sc.d
    op, dec = (sc.x, _lb) if side == "l" else (sc.y, _rb)

    def m_lower(u):
        du = dec(sc, u)
        total = np.zeros((d, d), complex)
        for n in range(1, sc.order + 1):
            total = total + expectation_of_word([op] + [du, op] * (n - 1))
        return total

    ex = sc.ex if side == "l" else sc.ey
    theta = mx.inverse(ex)
    v = np.asarray(v, complex)
    scale = max(1.0, float(np.max(np.abs(v))))
    u = v @ theta if side == "l" else theta @ v
    for it in range(max_iter):
        theta = mx.inverse(m_lower(u))
        u_next = v @ theta if side == "l" else theta @ v
        delta = mx.max_abs_diff(u_next, u)
        u = u_next
        if delta <= tol * scale:
            break
    else:
        raise NoConvergenceError(f"no contraction after {max_iter} iterations")
    final = m_lower(u)
    res = mx.max_abs_diff(theta @ final if side == "l" else final @ theta, mx.eye(d))
    return Inversion(u, theta, res, it + 1)


def s_transform(sc: SeriesContext, side: str, point, route: str = "theta"):
    """One-sided multiplicative transform at an invertible point.

    The default route evaluates theta from the factored inversion, which
    needs no inversion of the point itself; the literal route divides the
    compositional inverse by the point."""
    inv = invert_phi(sc, side, point)
    if route == "theta":
        return inv.theta
    if route == "literal":
        if side == "l":
            return mx.inverse(np.asarray(point, complex)) @ inv.point
        return inv.point @ mx.inverse(np.asarray(point, complex))
    raise ValueError(f"unknown route {route!r}")


# ---------------------------------------------------------------------------
# pinched chain series


def psi_pinched(sc: SeriesContext, side: str, z1: OpElement, z2: OpElement,
                order: int | None = None) -> SeriesValue:
    """Alternating-argument cumulant sum over the pinched-chain partition
    family, with a leading unit argument."""
    order = order if order is not None else sc.order
    d = sc.d
    unit = sc.ctx.unit
    tracker = _TermTracker(order)
    total = np.zeros((d, d), complex)
    for n in range(1, order + 1):
        ents = [entry(unit, side)]
        for k in range(2, 2 * n + 1):
            ents.append(entry(z1 if k % 2 == 0 else z2, side))
        ents = tuple(ents)
        term = np.zeros((d, d), complex)
        for part in enumerate_bnc_prime(side, n):
            term = term + eval_cumulant_pi(sc.ctx, part, ents, method="reduce")
        total = total + term
        tracker.add(n, term)
    return _finish(tracker, total)


# ---------------------------------------------------------------------------
# partial transforms


def t_transform(sc: SeriesContext, b, c, d_, route: str = "factored") -> TransformValue:
    """Additive-in-the-left, multiplicative-in-the-right partial transform.

    The factored route peels the guaranteed trailing right factor before the
    division; the literal route inverts the right point directly."""
    inv = invert_phi(sc, "r", d_)
    w = inv.point
    if route == "factored":
        khat = kappa_series(sc, b, c, w, strip_right=True)
        return TransformValue(
            np.asarray(c, complex) + khat.value @ inv.theta,
            khat.tail + inv.tail,
        )
    if route == "literal":
        k = kappa_series(sc, b, c, w)
        return TransformValue(
            np.asarray(c, complex) + k.value @ mx.inverse(np.asarray(d_, complex)),
            k.tail + inv.tail,
        )
    raise ValueError(f"unknown route {route!r}")


def s_partial(sc: SeriesContext, b, c, d_, route: str = "factored") -> TransformValue:
    """Two-sided multiplicative partial transform."""
    invl = invert_phi(sc, "l", b)
    invr = invert_phi(sc, "r", d_)
    u, w = invl.point, invr.point
    tx, ty = invl.theta, invr.theta
    c = np.asarray(c, complex)
    if route == "factored":
        kc = kappa_series(sc, u, c, w, strip_left=True, strip_right=True)
        val = c + tx @ kc.value @ w + u @ kc.value @ ty + tx @ kc.value @ ty
        return TransformValue(val, kc.tail + invl.tail + invr.tail)
    if route == "literal":
        ups = kappa_series(sc, u, c, w)
        bi = mx.inverse(np.asarray(b, complex))
        di = mx.inverse(np.asarray(d_, complex))
        val = c + bi @ ups.value + ups.value @ di + bi @ ups.value @ di
        return TransformValue(val, ups.tail + invl.tail + invr.tail)
    raise ValueError(f"unknown route {route!r}")

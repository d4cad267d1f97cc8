"""Truncated left power series with quaternion coefficients.

A ``QSeries`` stores coefficients f_0 ... f_N of sum_k p**k f_k (powers on the
left, coefficients on the right).  The star product is the coefficient
convolution; it is associative and noncommutative.  Pointwise companions of
the star operations (needed where only evaluators, not coefficients, are
available) live at the bottom of the module.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, NonInvertibleError, PoleError
from .quat import Quaternion, qconj, qinv, qmul, qnorm

__all__ = [
    "QSeries",
    "DEFAULT_TRUNCATION",
    "star_mul",
    "right_star_mul",
    "conj_series",
    "star_inverse",
    "eval_series",
    "eval_series_many",
    "tail_bound",
    "star_apply_pointwise",
    "star_inverse_pointwise",
    "eval_series_right",
    "right_star_apply_pointwise",
]

DEFAULT_TRUNCATION = 256


class QSeries:
    """Truncated power series sum_k p**k f_k of declared order."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        if isinstance(coeffs, QSeries):
            coeffs = coeffs.coeffs
        arr = np.asarray(coeffs, dtype=float)
        if arr.ndim == 1 and arr.size == 4:
            arr = arr[None, :]
        if arr.ndim != 2 or arr.shape[1] != 4:
            raise DomainError(f"expected (order+1, 4) coefficient array, got {arr.shape}")
        if arr.shape[0] == 0:
            arr = np.zeros((1, 4))
        if not np.all(np.isfinite(arr)):
            raise DomainError("series coefficients must be finite")
        self.coeffs = arr

    # -- constructors ---------------------------------------------------------

    @classmethod
    def from_quaternions(cls, qs) -> "QSeries":
        return cls(np.array([q.as_array() for q in qs]))

    @classmethod
    def constant(cls, q) -> "QSeries":
        if isinstance(q, (int, float)):
            q = Quaternion(q)
        return cls(q.as_array()[None, :])

    @classmethod
    def zero(cls, order: int = 0) -> "QSeries":
        return cls(np.zeros((order + 1, 4)))

    @classmethod
    def one(cls) -> "QSeries":
        return cls.constant(1.0)

    @classmethod
    def identity_map(cls) -> "QSeries":
        c = np.zeros((2, 4))
        c[1, 0] = 1.0
        return cls(c)

    @classmethod
    def monomial(cls, k: int, coeff: Quaternion) -> "QSeries":
        c = np.zeros((k + 1, 4))
        c[k] = coeff.as_array()
        return cls(c)

    # -- basic access ----------------------------------------------------------

    @property
    def order(self) -> int:
        return self.coeffs.shape[0] - 1

    def coeff(self, k: int) -> Quaternion:
        if 0 <= k <= self.order:
            return Quaternion.from_array(self.coeffs[k])
        return Quaternion(0.0)

    def truncate(self, order: int) -> "QSeries":
        if order >= self.order:
            return self.pad(order)
        return QSeries(self.coeffs[: order + 1].copy())

    def pad(self, order: int) -> "QSeries":
        if order <= self.order:
            return self
        out = np.zeros((order + 1, 4))
        out[: self.order + 1] = self.coeffs
        return QSeries(out)

    def max_coeff(self) -> float:
        return float(qnorm(self.coeffs).max())

    def __add__(self, other: "QSeries") -> "QSeries":
        n = max(self.order, other.order)
        return QSeries(self.pad(n).coeffs + other.pad(n).coeffs)

    def __sub__(self, other: "QSeries") -> "QSeries":
        n = max(self.order, other.order)
        return QSeries(self.pad(n).coeffs - other.pad(n).coeffs)

    def __neg__(self) -> "QSeries":
        return QSeries(-self.coeffs)

    def __repr__(self):
        return f"QSeries(order={self.order})"


def star_mul(g: QSeries, f: QSeries, max_order: int | None = None) -> QSeries:
    """Star product with g as the LEFT factor: coefficient k = sum_r g_r f_{k-r}.

    The result order is min(order_g + order_f, cap) where the cap defaults to
    the configured truncation (but never cuts below an input's own order).
    """
    if max_order is None:
        max_order = max(DEFAULT_TRUNCATION, g.order, f.order)
    out = _qconvolve(g.coeffs, f.coeffs)[: max_order + 1]
    return QSeries(out)


def right_star_mul(g: QSeries, f: QSeries, max_order: int | None = None) -> QSeries:
    """Product of right power series (coefficients written left of the powers).

    Coefficient arithmetic coincides with ``star_mul``; the two operations
    differ only in which series convention (sum p^k f_k vs sum f_k p^k) the
    coefficient list represents.
    """
    return star_mul(g, f, max_order=max_order)


def conj_series(f: QSeries) -> QSeries:
    """Slice regular conjugate: conjugate every coefficient."""
    return QSeries(qconj(f.coeffs))


def star_inverse(f: QSeries, order: int | None = None, tol: float | None = None) -> QSeries:
    """Star inverse by the coefficient recursion; requires f_0 away from zero.

    a_0 = f_0^{-1} and a_k = -f_0^{-1} sum_{j=1..k} f_j a_{k-j}.
    """
    if order is None:
        order = f.order
    if tol is None:
        tol = 1e-12 * (1.0 + f.max_coeff())
    f0 = f.coeffs[0]
    if float(qnorm(f0)) <= tol:
        raise NonInvertibleError("constant term below invertibility threshold")
    inv0 = qinv(f0)
    fc = f.pad(order).coeffs
    a = np.zeros((order + 1, 4))
    a[0] = inv0
    for k in range(1, order + 1):
        acc = qmul(fc[1 : k + 1], a[k - 1 :: -1]).sum(axis=0)
        a[k] = -qmul(inv0, acc)
    return QSeries(a)


def eval_series(f: QSeries, p: Quaternion) -> Quaternion:
    """Evaluate sum p**k f_k by Horner with left powers."""
    return Quaternion.from_array(eval_series_many(f, p.as_array()[None, :])[0])


def eval_series_many(f: QSeries, points: np.ndarray) -> np.ndarray:
    """Vectorized evaluation at an (m, 4) array of points."""
    pts = np.asarray(points, dtype=float)
    acc = np.broadcast_to(f.coeffs[-1], pts.shape).copy()
    for k in range(f.order - 1, -1, -1):
        acc = f.coeffs[k] + qmul(pts, acc)
    return acc

def tail_bound(f: QSeries, abs_p: float) -> float:
    """Geometric truncation-tail bound max|f_k| * |p|^(N+1) / (1 - |p|)."""
    if abs_p >= 1.0:
        return float("inf")
    return f.max_coeff() * abs_p ** (f.order + 1) / (1.0 - abs_p)


def star_apply_pointwise(g_eval, f: QSeries, p: Quaternion) -> Quaternion:
    """Pointwise star product g(p) * f(g(p)^{-1} p g(p)) needing no g coefficients.

    Returns zero by convention when g vanishes at p.
    """
    gp = g_eval(p)
    if gp.is_zero():
        return Quaternion(0.0)
    return gp * eval_series(f, similarity_point(gp, p))


def star_inverse_pointwise(f: QSeries, p: Quaternion, tol: float = 0.0) -> Quaternion:
    """Pointwise star inverse via the conjugate-shifted point.

    f^{-star}(p) = f(ptilde)^{-1} with ptilde = f^c(p)^{-1} p f^c(p).
    """
    fc = conj_series(f)
    c = eval_series(fc, p)
    if abs(c) <= tol or c.is_zero():
        raise PoleError("slice conjugate vanishes at the evaluation point")
    v = eval_series(f, similarity_point(c, p))
    if abs(v) <= tol or v.is_zero():
        raise PoleError("series vanishes at the shifted point")
    return v.inverse()


def eval_series_right(g: QSeries, p: Quaternion) -> Quaternion:
    """Evaluate a RIGHT power series sum g_k p**k (coefficients left of powers)."""
    acc = g.coeff(g.order)
    for k in range(g.order - 1, -1, -1):
        acc = g.coeff(k) + acc * p
    return acc


def right_star_apply_pointwise(g: QSeries, f_eval, p: Quaternion) -> Quaternion:
    """Pointwise right star product g(f(p) p f(p)^{-1}) f(p), zero where f(p) = 0.

    Mirror image of the left-product rule: the factor whose coefficients sit
    next to the powers is evaluated first and conjugates the point.  (The
    printed case split for this formula is sometimes stated with the zero
    branch on f(p) != 0; that assignment contradicts the left-product
    convention and the real-point product rule, so the convention here keeps
    the formula branch on f(p) != 0.)
    """
    fp = f_eval(p)
    if fp.is_zero():
        return Quaternion(0.0)
    return eval_series_right(g, fp * p * fp.inverse()) * fp


def similarity_point(h: Quaternion, p: Quaternion) -> Quaternion:
    return h.inverse() * p * h


def _qconvolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Full quaternion-coefficient convolution (a is the left factor)."""
    aw, ax, ay, az = a[:, 0], a[:, 1], a[:, 2], a[:, 3]
    bw, bx, by, bz = b[:, 0], b[:, 1], b[:, 2], b[:, 3]
    conv = np.convolve
    return np.stack(
        [
            conv(aw, bw) - conv(ax, bx) - conv(ay, by) - conv(az, bz),
            conv(aw, bx) + conv(ax, bw) + conv(ay, bz) - conv(az, by),
            conv(aw, by) - conv(ax, bz) + conv(ay, bw) + conv(az, bx),
            conv(aw, bz) + conv(ax, by) - conv(ay, bx) + conv(az, bw),
        ],
        axis=-1,
    )

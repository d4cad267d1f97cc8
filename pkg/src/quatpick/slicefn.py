"""Closed-form slice regular functions with exact pointwise evaluation.

Solution formulas in this package are star-algebra expressions in constants,
polynomials and geometric kernels sum_k p**k c b**k.  Such expressions can be
evaluated exactly at any point of the ball, without series truncation, as
long as every node can also produce the value of its slice regular conjugate:

* product:  (g * f)(p) = g(p) f(g(p)^{-1} p g(p)), zero where g(p) = 0,
  and (g * f)^c = f^c * g^c;
* inverse:  f^{-star}(p) = f(f^c(p)^{-1} p f^c(p))^{-1}, and
  (f^{-star})^c = (f^c)^{-star}.

Every node therefore implements ``eval_many`` and ``conj_eval_many`` on point
arrays, plus ``series(order)`` for the coefficient route (the truncated
companion used as an independent oracle and for reports).
"""

from __future__ import annotations

import numpy as np

from .errors import PoleError
from .qlinalg import sylvester_unit_many
from .quat import Quaternion, qinv, qmul, qnormsq, qsimilarity
from .series import QSeries, conj_series, eval_series_many, star_inverse, star_mul

__all__ = [
    "SliceFunction",
    "PolyFn",
    "KernelFn",
    "SumFn",
    "StarProdFn",
    "StarInvFn",
    "const_fn",
    "identity_fn",
    "blaschke_fn",
]


class SliceFunction:
    """Base node: exact pointwise evaluator with a slice conjugate channel."""

    def eval(self, p: Quaternion) -> Quaternion:
        return Quaternion.from_array(self.eval_many(p.as_array()[None, :])[0])

    def conj_eval(self, p: Quaternion) -> Quaternion:
        return Quaternion.from_array(self.conj_eval_many(p.as_array()[None, :])[0])

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def conj_eval_many(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def series(self, order: int) -> QSeries:
        raise NotImplementedError

    def __call__(self, p: Quaternion) -> Quaternion:
        return self.eval(p)


class PolyFn(SliceFunction):
    """Polynomial sum p**k c_k given by its (exact) coefficient list."""

    def __init__(self, coeffs):
        if isinstance(coeffs, QSeries):
            self.poly = coeffs
        else:
            qs = [c if isinstance(c, Quaternion) else Quaternion(c) for c in coeffs]
            self.poly = QSeries.from_quaternions(qs)

    def eval_many(self, points):
        return eval_series_many(self.poly, points)

    def conj_eval_many(self, points):
        return eval_series_many(conj_series(self.poly), points)

    def series(self, order):
        return self.poly.truncate(order)


class KernelFn(SliceFunction):
    """Geometric kernel (sum_k p**k left b**k) right with |b| < 1."""

    def __init__(self, b: Quaternion, left: Quaternion | None = None, right: Quaternion | None = None):
        self.b = b
        self.left = left if left is not None else Quaternion(1.0)
        self.right = right if right is not None else Quaternion(1.0)

    def eval_many(self, points):
        core = sylvester_unit_many(points, self.b.as_array(), self.left.as_array())
        return qmul(core, self.right.as_array())

    def conj_eval_many(self, points):
        # conjugate coefficients are conj(right) conj(b)^k conj(left)
        core = sylvester_unit_many(points, self.b.conj().as_array(), self.right.conj().as_array())
        return qmul(core, self.left.conj().as_array())

    def series(self, order):
        coeffs = np.empty((order + 1, 4))
        cur = self.left.as_array()
        barr = self.b.as_array()
        rarr = self.right.as_array()
        for k in range(order + 1):
            coeffs[k] = qmul(cur, rarr)
            cur = qmul(cur, barr)
        return QSeries(coeffs)


class SumFn(SliceFunction):
    def __init__(self, terms):
        self.terms = list(terms)

    def eval_many(self, points):
        out = np.zeros_like(np.asarray(points, dtype=float))
        for t in self.terms:
            out = out + t.eval_many(points)
        return out

    def conj_eval_many(self, points):
        out = np.zeros_like(np.asarray(points, dtype=float))
        for t in self.terms:
            out = out + t.conj_eval_many(points)
        return out

    def series(self, order):
        acc = QSeries.zero(order)
        for t in self.terms:
            acc = acc + t.series(order)
        return acc


class StarProdFn(SliceFunction):
    """Star product with ``g`` as the left factor."""

    def __init__(self, g: SliceFunction, f: SliceFunction):
        self.g = g
        self.f = f

    def eval_many(self, points):
        points = np.asarray(points, dtype=float)
        gv = self.g.eval_many(points)
        out = np.zeros_like(points)
        mask = qnormsq(gv) > 0.0
        if np.any(mask):
            gsub = gv[mask]
            shifted = qsimilarity(gsub, points[mask])
            out[mask] = qmul(gsub, self.f.eval_many(shifted))
        return out

    def conj_eval_many(self, points):
        points = np.asarray(points, dtype=float)
        fc = self.f.conj_eval_many(points)
        out = np.zeros_like(points)
        mask = qnormsq(fc) > 0.0
        if np.any(mask):
            fsub = fc[mask]
            shifted = qsimilarity(fsub, points[mask])
            out[mask] = qmul(fsub, self.g.conj_eval_many(shifted))
        return out

    def series(self, order):
        return star_mul(self.g.series(order), self.f.series(order), max_order=order)


class StarInvFn(SliceFunction):
    def __init__(self, f: SliceFunction):
        self.f = f

    def eval_many(self, points):
        points = np.asarray(points, dtype=float)
        fc = self.f.conj_eval_many(points)
        if np.any(qnormsq(fc) == 0.0):
            raise PoleError("slice conjugate of the denominator vanishes at a sample")
        fv = self.f.eval_many(qsimilarity(fc, points))
        if np.any(qnormsq(fv) == 0.0):
            raise PoleError("denominator vanishes at a shifted sample")
        return qinv(fv)

    def conj_eval_many(self, points):
        points = np.asarray(points, dtype=float)
        fv = self.f.eval_many(points)
        if np.any(qnormsq(fv) == 0.0):
            raise PoleError("denominator vanishes at a sample")
        fcv = self.f.conj_eval_many(qsimilarity(fv, points))
        if np.any(qnormsq(fcv) == 0.0):
            raise PoleError("slice conjugate of the denominator vanishes at a shifted sample")
        return qinv(fcv)

    def series(self, order):
        return star_inverse(self.f.series(order), order=order)


def const_fn(q) -> PolyFn:
    if isinstance(q, (int, float)):
        q = Quaternion(q)
    return PolyFn([q])


def identity_fn() -> PolyFn:
    return PolyFn([Quaternion(0.0), Quaternion(1.0)])


def blaschke_fn(p1: Quaternion) -> SliceFunction:
    """Blaschke factor (p - p1) * (1 - p conj(p1))^{-star}, vanishing at p1."""
    return StarProdFn(PolyFn([-p1, Quaternion(1.0)]), KernelFn(p1.conj()))

"""Scalar quaternion algebra and vectorized Hamilton-product kernels.

The scalar ``Quaternion`` class is the user-facing value type.  The module
also provides the componentwise kernels (``qmul``, ``qconj``, ...) operating
on ``(..., 4)`` float arrays; the matrix and series layers build on those so
that inner loops stay in numpy.

Conventions: p = w + x*i + y*j + z*k with i*j = k, j*k = i, k*i = j and
i**2 = j**2 = k**2 = -1.  Reals embed as (w, 0, 0, 0).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

__all__ = [
    "Quaternion",
    "ZERO",
    "ONE",
    "I",
    "J",
    "K",
    "same_sphere",
    "similarity",
    "imag_unit_of",
    "is_imag_unit",
    "qmul",
    "qconj",
    "qnorm",
    "qnormsq",
    "qinv",
    "qsimilarity",
    "left_mult_matrix",
    "right_mult_matrix",
]


class Quaternion:
    """Immutable quaternion with double-precision components."""

    __slots__ = ("w", "x", "y", "z")

    def __init__(self, w=0.0, x=0.0, y=0.0, z=0.0):
        object.__setattr__(self, "w", float(w))
        object.__setattr__(self, "x", float(x))
        object.__setattr__(self, "y", float(y))
        object.__setattr__(self, "z", float(z))

    def __setattr__(self, name, value):
        raise AttributeError("Quaternion is immutable")

    # -- construction helpers ------------------------------------------------

    @classmethod
    def from_array(cls, a) -> "Quaternion":
        return cls(a[0], a[1], a[2], a[3])

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z], dtype=float)

    # -- ring operations -----------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        return Quaternion(self.w + other.w, self.x + other.x, self.y + other.y, self.z + other.z)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        return Quaternion(self.w - other.w, self.x - other.x, self.y - other.y, self.z - other.z)

    def __rsub__(self, other):
        return _coerce(other) - self

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion(self.w * other, self.x * other, self.y * other, self.z * other)
        a, b = self, other
        return Quaternion(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion(self.w * other, self.x * other, self.y * other, self.z * other)
        return NotImplemented

    def __truediv__(self, other):
        # Division by a quaternion is ambiguous in a skew field; require an
        # explicit .inverse() so left/right placement stays visible.
        if isinstance(other, (int, float)):
            return Quaternion(self.w / other, self.x / other, self.y / other, self.z / other)
        return NotImplemented

    # -- involutions and norms -------------------------------------------------

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm_sq(self) -> float:
        return self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z

    def __abs__(self) -> float:
        return math.sqrt(self.norm_sq())

    def inverse(self) -> "Quaternion":
        n2 = self.norm_sq()
        if n2 == 0.0:
            raise DomainError("zero quaternion has no inverse")
        return Quaternion(self.w / n2, -self.x / n2, -self.y / n2, -self.z / n2)

    @property
    def re(self) -> float:
        return self.w

    def im(self) -> "Quaternion":
        return Quaternion(0.0, self.x, self.y, self.z)

    def im_abs(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    # -- comparison / hashing ----------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, float)):
            other = Quaternion(other)
        if not isinstance(other, Quaternion):
            return NotImplemented
        return (self.w, self.x, self.y, self.z) == (other.w, other.x, other.y, other.z)

    def __hash__(self):
        return hash((self.w, self.x, self.y, self.z))

    def is_zero(self) -> bool:
        return self.w == 0.0 and self.x == 0.0 and self.y == 0.0 and self.z == 0.0

    def isclose(self, other, tol=1e-12) -> bool:
        return abs(self - _coerce(other)) <= tol

    def __repr__(self):
        return f"Quaternion({self.w!r}, {self.x!r}, {self.y!r}, {self.z!r})"


def _coerce(value) -> Quaternion:
    if isinstance(value, Quaternion):
        return value
    if isinstance(value, (int, float)):
        return Quaternion(value)
    raise TypeError(f"cannot interpret {value!r} as a quaternion")


ZERO = Quaternion(0.0)
ONE = Quaternion(1.0)
I = Quaternion(0.0, 1.0)
J = Quaternion(0.0, 0.0, 1.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


def same_sphere(p: Quaternion, q: Quaternion, tol: float | None = None) -> bool:
    """True iff p and q lie on the same similarity 2-sphere.

    Membership is decided by real part and imaginary modulus.  The default
    tolerance is scale aware: 1e-10 * (1 + |p| + |q|).
    """
    if tol is None:
        tol = 1e-10 * (1.0 + abs(p) + abs(q))
    if tol < 0:
        raise DomainError("tolerance must be non-negative")
    return abs(p.re - q.re) <= tol and abs(p.im_abs() - q.im_abs()) <= tol


def similarity(h: Quaternion, p: Quaternion) -> Quaternion:
    """Conjugation h^{-1} p h; the result stays on the sphere of p."""
    if h.is_zero():
        raise DomainError("similarity transform by zero")
    return h.inverse() * p * h


def imag_unit_of(p: Quaternion) -> Quaternion:
    """Unit purely imaginary quaternion in the direction of Im p."""
    n = p.im_abs()
    if n == 0.0:
        raise DomainError("real quaternion has no imaginary direction")
    return Quaternion(0.0, p.x / n, p.y / n, p.z / n)


def is_imag_unit(q: Quaternion, tol: float = 1e-12) -> bool:
    return abs(q.w) <= tol and abs(q.norm_sq() - 1.0) <= 2 * tol


# -- array kernels -------------------------------------------------------------
#
# All functions below operate on float arrays whose last axis has length 4 and
# broadcast like ordinary numpy arithmetic.


def qmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product on (..., 4) arrays with broadcasting."""
    aw, ax, ay, az = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    bw, bx, by, bz = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def qconj(a: np.ndarray) -> np.ndarray:
    out = a.copy()
    out[..., 1:] = -out[..., 1:]
    return out


def qnormsq(a: np.ndarray) -> np.ndarray:
    return np.sum(a * a, axis=-1)


def qnorm(a: np.ndarray) -> np.ndarray:
    return np.sqrt(qnormsq(a))


def qinv(a: np.ndarray) -> np.ndarray:
    n2 = qnormsq(a)
    if np.any(n2 == 0.0):
        raise DomainError("zero quaternion has no inverse")
    return qconj(a) / n2[..., None]


def qsimilarity(h: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Elementwise h^{-1} p h on (..., 4) arrays."""
    return qmul(qinv(h), qmul(p, h))


def left_mult_matrix(a: Quaternion) -> np.ndarray:
    """4x4 real matrix of x -> a*x acting on (w, x, y, z) coordinates."""
    w, x, y, z = a.w, a.x, a.y, a.z
    return np.array(
        [
            [w, -x, -y, -z],
            [x, w, -z, y],
            [y, z, w, -x],
            [z, -y, x, w],
        ]
    )


def right_mult_matrix(b: Quaternion) -> np.ndarray:
    """4x4 real matrix of x -> x*b acting on (w, x, y, z) coordinates."""
    w, x, y, z = b.w, b.x, b.y, b.z
    return np.array(
        [
            [w, -x, -y, -z],
            [x, w, z, -y],
            [y, -z, w, x],
            [z, y, -x, w],
        ]
    )

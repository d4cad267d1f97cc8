"""Hardy space machinery on the quaternionic unit ball.

Covers the Szego kernel and its reproducing inner product, the radial-norm
quadrature cross-check, the lower-triangular Toeplitz contractivity test for
the Schur class, kernel Gram assembly for a candidate multiplier, kernel
(in)dependence of point sets on similarity spheres, and the two-point
representation formula forced on any slice regular function along a sphere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .qlinalg import (
    HermitianQMatrix,
    PsdReport,
    QMatrix,
    ldl_psd,
    sylvester_unit,
    sylvester_unit_many,
)
from .quat import Quaternion, imag_unit_of, qconj, qmul, qnorm, same_sphere
from .series import QSeries, eval_series_many
from .slicefn import SliceFunction

__all__ = [
    "KernelGram",
    "SchurTestResult",
    "DependenceResult",
    "szego_kernel",
    "h2_inner",
    "h2_norm_radial",
    "schur_toeplitz_test",
    "toeplitz_section",
    "ks_gram",
    "szego_gram",
    "kernel_dependence",
    "sphere_representation",
    "sphere_representation_printed_order",
]


@dataclass
class KernelGram:
    """Gram matrix of a two-point kernel sampled at finitely many points."""

    points: list
    gram: HermitianQMatrix
    kind: str
    psd: PsdReport | None = None
    meta: dict = field(default_factory=dict)


@dataclass
class SchurTestResult:
    passed: bool
    first_failure: int | None
    n_max: int


@dataclass
class DependenceResult:
    independent: bool
    relation: tuple | None = None  # ((i1, i2, i3), (c1, c2)) realizing the dependence


def szego_kernel(p: Quaternion, q: Quaternion) -> Quaternion:
    """Reproducing kernel sum_n p**n conj(q)**n in closed form."""
    return sylvester_unit(p, q.conj(), Quaternion(1.0))


def h2_inner(f: QSeries, g: QSeries) -> Quaternion:
    """Right inner product <f, g> = sum conj(g_k) f_k over the shared truncation."""
    n = min(f.order, g.order)
    acc = qmul(qconj(g.coeffs[: n + 1]), f.coeffs[: n + 1]).sum(axis=0)
    return Quaternion.from_array(acc)


def h2_norm_radial(f: QSeries, r: float, I: Quaternion, m: int | None = None) -> float:
    """Quadrature value of the circle mean of |f|^2 at radius r on the slice of I.

    Uses the m-point trapezoid rule (uniform sampling of the periodic
    integrand); exact for m > 2 * order, and independent of the chosen
    imaginary unit.
    """
    if not 0.0 <= r < 1.0:
        raise DomainError("radius must lie in [0, 1)")
    if abs(I.w) > 1e-10 or abs(I.norm_sq() - 1.0) > 1e-10:
        raise DomainError("slice direction must be a unit imaginary quaternion")
    if m is None:
        m = max(512, 4 * f.order)
    if m < 4 * f.order:
        raise DomainError("need at least 4 * order quadrature points")
    theta = 2.0 * np.pi * np.arange(m) / m
    pts = np.empty((m, 4))
    pts[:, 0] = r * np.cos(theta)
    sin = r * np.sin(theta)
    pts[:, 1] = I.x * sin
    pts[:, 2] = I.y * sin
    pts[:, 3] = I.z * sin
    vals = eval_series_many(f, pts)
    return float(np.mean(np.sum(vals * vals, axis=-1)))


def toeplitz_section(S: QSeries, n: int) -> QMatrix:
    """Lower-triangular Toeplitz section of size (n+1) built from S_0 ... S_n."""
    padded = S.pad(max(n, S.order)).coeffs
    idx = np.subtract.outer(np.arange(n + 1), np.arange(n + 1))
    data = padded[np.clip(idx, 0, None)] * (idx >= 0)[:, :, None]
    return QMatrix(data)


def schur_toeplitz_test(S: QSeries, n_max: int = 64, tol: float | None = None) -> SchurTestResult:
    """Test I - S_n S_n* >= 0 for n = 0 .. n_max; report the first failing n.

    The sections are nested principal submatrices of the largest one (the
    Toeplitz factor is lower triangular), so failure is monotone in n and a
    single elimination pass on the full matrix locates the first failing
    section.
    """
    Sn = toeplitz_section(S, n_max)
    M = QMatrix.identity(n_max + 1) - Sn @ Sn.adjoint()
    M = HermitianQMatrix(M.data, tol=1e-10 * max(1.0, M.max_abs()))
    first = _first_nonpsd_section(M, tol=tol)
    if first is None:
        return SchurTestResult(passed=True, first_failure=None, n_max=n_max)
    return SchurTestResult(passed=False, first_failure=first, n_max=n_max)


def _first_nonpsd_section(M: HermitianQMatrix, tol: float | None = None) -> int | None:
    """Smallest n such that the leading (n+1) principal block is not PSD.

    Runs the semidefinite elimination in natural order: a negative pivot at
    step k condemns the block of size k+1; a zero pivot with a live entry at
    row j below it condemns the block of size j+1 (the 2x2 minor {k, j} is
    indefinite) while all smaller blocks stay clean.
    """
    n = M.rows
    work = M.data.copy()
    diag_max = float(np.abs(work[np.arange(n), np.arange(n), 0]).max()) if n else 0.0
    if tol is None:
        from .qlinalg import default_pivot_tol

        tol = default_pivot_tol(diag_max, n)
    col_tol = 4.0 * np.sqrt(max(tol, 0.0) * max(diag_max, tol)) + tol
    for k in range(n):
        d = float(work[k, k, 0])
        if d >= tol and d > 0.0:
            if k + 1 < n:
                lk = work[k + 1 :, k] / d
                work[k + 1 :, k + 1 :] -= qmul(lk[:, None, :] * d, qconj(lk)[None, :, :])
                work[k + 1 :, k] = 0.0
                work[k, k + 1 :] = 0.0
            continue
        if d <= -tol and d < 0.0:
            return k
        below = qnorm(work[k + 1 :, k]) if k + 1 < n else np.zeros(0)
        bad = np.nonzero(below > col_tol)[0]
        if bad.size:
            return k + 1 + int(bad.min())
        work[k + 1 :, k] = 0.0
        work[k, k + 1 :] = 0.0
    return None


def _call_on_points(S_eval, pts: np.ndarray) -> np.ndarray:
    if isinstance(S_eval, SliceFunction):
        return S_eval.eval_many(pts)
    vals = [S_eval(Quaternion.from_array(p)) for p in pts]
    return np.array([v.as_array() for v in vals])


def ks_gram(S_eval, points) -> KernelGram:
    """Gram of the multiplier kernel sum p_i^k (1 - S(p_i) conj(S(p_j))) conj(p_j)^k."""
    pts = _point_array(points)
    sv = _call_on_points(S_eval, pts)
    c = np.zeros((len(pts), len(pts), 4))
    c[..., 0] = 1.0
    c -= qmul(sv[:, None, :], qconj(sv)[None, :, :])
    G = sylvester_unit_many(pts[:, None, :], qconj(pts)[None, :, :], c)
    gram = HermitianQMatrix(G, tol=1e-9 * max(1.0, float(qnorm(G).max())))
    return KernelGram(points=list(points), gram=gram, kind="schur", psd=ldl_psd(gram))


def szego_gram(points) -> KernelGram:
    """Gram of the Szego kernel (the zero-multiplier case)."""
    out = ks_gram(lambda p: Quaternion(0.0), points)
    return KernelGram(points=out.points, gram=out.gram, kind="szego", psd=out.psd)


def kernel_dependence(points, tol: float | None = None) -> DependenceResult:
    """Kernel functions at distinct points are independent iff no three of the
    points lie on one similarity sphere; on a sphere triple the third kernel is
    the right combination of the first two."""
    pts = list(points)
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if abs(pts[i] - pts[j]) <= 1e-14 * (1.0 + abs(pts[i])):
                raise DomainError("points must be distinct")
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            for k in range(j + 1, len(pts)):
                if same_sphere(pts[i], pts[j], tol) and same_sphere(pts[j], pts[k], tol):
                    c1, c2 = _dependence_coefficients(pts[i], pts[j], pts[k])
                    return DependenceResult(independent=False, relation=((i, j, k), (c1, c2)))
    return DependenceResult(independent=True)


def _dependence_coefficients(p1: Quaternion, p2: Quaternion, p3: Quaternion):
    """Right coefficients with k(., p3) = k(., p1) c1 + k(., p2) c2 on a sphere."""
    I1, I2, I3 = imag_unit_of(p1), imag_unit_of(p2), imag_unit_of(p3)
    d = I1 - I2
    if d.is_zero():
        raise DomainError("first two points share an imaginary direction")
    dinv = d.inverse()
    return dinv * (I3 - I2), dinv * (I1 - I3)


def _sphere_units(p1: Quaternion, p2: Quaternion, p3: Quaternion):
    for a, b in ((p1, p2), (p1, p3)):
        if not same_sphere(a, b):
            raise DomainError("points do not lie on a common similarity sphere")
    if p1.im_abs() <= 1e-14 * (1.0 + abs(p1)):
        raise DomainError("sphere is degenerate (real points)")
    I1, I2, I3 = imag_unit_of(p1), imag_unit_of(p2), imag_unit_of(p3)
    if abs(I1 - I2) <= 1e-12:
        raise DomainError("first two points coincide on the sphere")
    return I1, I2, I3


def sphere_representation(p1: Quaternion, s1: Quaternion, p2: Quaternion, s2: Quaternion, p3: Quaternion) -> Quaternion:
    """Value forced at p3 by the values s1, s2 at two points of the same sphere.

    Uses the conjugation-order-corrected coefficients (inverses multiply on
    the right); this is the variant validated by the identity-map oracle,
    exact for every slice regular function.  The naive order is kept in
    ``sphere_representation_printed_order`` as a documented negative control.
    """
    I1, I2, I3 = _sphere_units(p1, p2, p3)
    ainv = (I2 - I1).inverse()
    return (I2 - I3) * ainv * s1 + (I3 - I1) * ainv * s2


def sphere_representation_printed_order(
    p1: Quaternion, s1: Quaternion, p2: Quaternion, s2: Quaternion, p3: Quaternion
) -> Quaternion:
    """Same data, coefficients applied with the inverse on the left.

    This order looks natural but conjugates products without reversing the
    factors; it fails the identity-map oracle and exists only so tests can
    document the failure.
    """
    I1, I2, I3 = _sphere_units(p1, p2, p3)
    return (I2 - I1).inverse() * ((I2 - I3) * s1 + (I3 - I1) * s2)


def _point_array(points) -> np.ndarray:
    return np.array([p.as_array() for p in points])

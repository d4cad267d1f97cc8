"""Dense linear algebra over the quaternions.

Matrices are stored as ``(rows, cols, 4)`` float arrays.  The module provides
the semidefinite LDL* factorization used for every positivity decision in the
package, Gauss-Jordan inversion/solves with the left-division convention, the
complex-adjoint embedding (the independent positivity oracle), a cyclic Jacobi
eigenvalue routine for complex Hermitian matrices, and the scalar Stein/
Sylvester solver x - a*x*b = c that closes all two-point kernel series.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DivergenceError, DomainError, SingularMatrixError
from .quat import (
    Quaternion,
    left_mult_matrix,
    qconj,
    qmul,
    qnorm,
    qnormsq,
    right_mult_matrix,
)

__all__ = [
    "QMatrix",
    "HermitianQMatrix",
    "PsdReport",
    "ldl_psd",
    "qmat_solve",
    "qmat_inverse",
    "complex_embed",
    "embed_vector",
    "unembed_vector",
    "jacobi_eigvalsh",
    "sylvester_unit",
    "sylvester_unit_many",
    "default_pivot_tol",
]


class QMatrix:
    """Dense rectangular matrix with quaternion entries (immutable by convention)."""

    __slots__ = ("data",)

    def __init__(self, data: np.ndarray):
        data = np.asarray(data, dtype=float)
        if data.ndim != 3 or data.shape[2] != 4:
            raise DomainError(f"expected (rows, cols, 4) array, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise DomainError("matrix entries must be finite")
        self.data = data

    # -- constructors -------------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "QMatrix":
        return cls(np.zeros((rows, cols, 4)))

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        d = np.zeros((n, n, 4))
        d[np.arange(n), np.arange(n), 0] = 1.0
        return cls(d)

    @classmethod
    def diag(cls, entries) -> "QMatrix":
        n = len(entries)
        d = np.zeros((n, n, 4))
        for i, q in enumerate(entries):
            d[i, i] = q.as_array()
        return cls(d)

    @classmethod
    def from_rows(cls, rows) -> "QMatrix":
        d = np.array([[q.as_array() for q in row] for row in rows], dtype=float)
        if d.ndim == 2:  # empty cols
            d = d.reshape(len(rows), 0, 4)
        return cls(d)

    @classmethod
    def column(cls, entries) -> "QMatrix":
        return cls.from_rows([[q] for q in entries])

    # -- shape / access -------------------------------------------------------

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def __getitem__(self, idx) -> Quaternion:
        i, j = idx
        return Quaternion.from_array(self.data[i, j])

    def entry_norms(self) -> np.ndarray:
        return qnorm(self.data)

    def max_abs(self) -> float:
        if self.data.size == 0:
            return 0.0
        return float(self.entry_norms().max())

    # -- algebra ------------------------------------------------------------

    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        if self.cols != other.rows:
            raise DomainError("incompatible shapes for matrix product")
        a = self.data[:, :, None, :]
        b = other.data[None, :, :, :]
        return QMatrix(qmul(a, b).sum(axis=1))

    def __add__(self, other: "QMatrix") -> "QMatrix":
        return QMatrix(self.data + other.data)

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        return QMatrix(self.data - other.data)

    def __neg__(self) -> "QMatrix":
        return QMatrix(-self.data)

    def scale(self, r: float) -> "QMatrix":
        return QMatrix(self.data * float(r))

    def scale_left(self, q: Quaternion) -> "QMatrix":
        return QMatrix(qmul(q.as_array(), self.data))

    def scale_right(self, q: Quaternion) -> "QMatrix":
        return QMatrix(qmul(self.data, q.as_array()))

    def conj(self) -> "QMatrix":
        return QMatrix(qconj(self.data))

    def transpose(self) -> "QMatrix":
        return QMatrix(self.data.transpose(1, 0, 2))

    def adjoint(self) -> "QMatrix":
        return QMatrix(qconj(self.data).transpose(1, 0, 2))

    def hermitian_defect(self) -> float:
        """Max entry norm of A - A*."""
        return QMatrix(self.data - self.adjoint().data).max_abs()

    def is_hermitian(self, tol: float | None = None) -> bool:
        if self.rows != self.cols:
            return False
        if tol is None:
            tol = 1e-12 * max(1.0, self.max_abs())
        return self.hermitian_defect() <= tol

    def __repr__(self):
        return f"QMatrix({self.rows}x{self.cols})"


class HermitianQMatrix(QMatrix):
    """Square quaternion matrix validated to be Hermitian (real diagonal)."""

    def __init__(self, data: np.ndarray, tol: float | None = None):
        super().__init__(data)
        if self.rows != self.cols:
            raise DomainError("Hermitian matrix must be square")
        if tol is None:
            tol = 1e-12 * max(1.0, self.max_abs())
        if self.hermitian_defect() > tol:
            raise DomainError("matrix is not Hermitian within tolerance")
        # store the symmetrized representative so downstream pivots see an
        # exactly real diagonal
        self.data = 0.5 * (self.data + self.adjoint().data)

    @classmethod
    def from_qmatrix(cls, m: QMatrix, tol: float | None = None) -> "HermitianQMatrix":
        return cls(m.data, tol=tol)


@dataclass
class PsdReport:
    """Outcome of the semidefinite LDL* elimination."""

    is_psd: bool
    rank: int
    pivots: list = field(default_factory=list)
    null_basis: list = field(default_factory=list)  # quaternion column vectors, (n, 4) arrays
    null_pivot_indices: list = field(default_factory=list)
    fail_index: int | None = None

    @property
    def min_pivot(self) -> float:
        return min(self.pivots) if self.pivots else 0.0


def default_pivot_tol(diag_max: float, n: int) -> float:
    """Scale-aware pivot threshold n * 2^-50 * max |diagonal|."""
    return n * (2.0 ** -50) * diag_max


def ldl_psd(A: QMatrix, tol: float | None = None) -> PsdReport:
    """Outer-product LDL* elimination over the quaternions.

    Valid without pivoting for Hermitian input because all diagonal entries of
    a Hermitian quaternion matrix are real.  The matrix is reported positive
    semidefinite iff every pivot is >= -tol and every pivot below tol has a
    numerically zero column underneath it.  Null vectors are read off from the
    unit-triangular factor at the zero pivots and refined by one inverse
    iteration step on the complex embedding.
    """
    if not isinstance(A, HermitianQMatrix):
        A = HermitianQMatrix.from_qmatrix(A)
    n = A.rows
    if n == 0:
        return PsdReport(is_psd=True, rank=0)
    work = A.data.copy()
    diag_max = float(np.abs(work[np.arange(n), np.arange(n), 0]).max()) if n else 0.0
    if tol is None:
        tol = default_pivot_tol(diag_max, n)
    col_tol = 4.0 * np.sqrt(max(tol, 0.0) * max(diag_max, tol)) + tol

    L = np.zeros((n, n, 4))
    L[np.arange(n), np.arange(n), 0] = 1.0
    pivots: list[float] = []
    zero_idx: list[int] = []

    for k in range(n):
        d = float(work[k, k, 0])
        if d >= tol and d > 0.0:
            pivots.append(d)
            if k + 1 < n:
                col = work[k + 1 :, k]  # (m, 4)
                lk = col / d  # real pivot commutes
                L[k + 1 :, k] = lk
                # trailing update: A_ij -= l_i * d * conj(l_j)
                upd = qmul(lk[:, None, :] * d, qconj(lk)[None, :, :])
                work[k + 1 :, k + 1 :] -= upd
                work[k + 1 :, k] = 0.0
                work[k, k + 1 :] = 0.0
        elif d <= -tol and d < 0.0:
            pivots.append(d)
            return PsdReport(is_psd=False, rank=sum(1 for p in pivots if p >= tol and p > 0.0), pivots=pivots, fail_index=k)
        else:
            pivots.append(d)
            below = qnorm(work[k + 1 :, k]) if k + 1 < n else np.zeros(0)
            if below.size and float(below.max()) > col_tol:
                # Hermitian with ~zero diagonal but a live off-diagonal entry:
                # the 2x2 principal minor is indefinite.
                return PsdReport(is_psd=False, rank=sum(1 for p in pivots if p >= tol and p > 0.0), pivots=pivots, fail_index=k)
            zero_idx.append(k)
            work[k + 1 :, k] = 0.0
            work[k, k + 1 :] = 0.0

    rank = n - len(zero_idx)
    null_basis = [_null_vector(L, k) for k in zero_idx]
    if null_basis:
        null_basis = _refine_null_basis(A, null_basis, tol, diag_max)
    return PsdReport(
        is_psd=True, rank=rank, pivots=pivots, null_basis=null_basis, null_pivot_indices=zero_idx
    )


def _null_vector(L: np.ndarray, k: int) -> np.ndarray:
    """Solve L* v = e_k by back substitution (unit upper-triangular system)."""
    n = L.shape[0]
    v = np.zeros((n, 4))
    v[k, 0] = 1.0
    for i in range(k - 1, -1, -1):
        acc = qmul(qconj(L[i + 1 :, i]), v[i + 1 :]).sum(axis=0)
        v[i] = -acc
    return v


def _refine_null_basis(A: QMatrix, basis: list, tol: float, diag_max: float) -> list:
    """One inverse-iteration step on the embedded matrix, then right Gram-Schmidt."""
    C = complex_embed(A)
    n = A.rows
    shift = max(tol, 64 * np.finfo(float).eps * max(diag_max, 1.0))
    M = C + shift * np.eye(2 * n)
    refined = []
    for v in basis:
        res0 = _matvec_residual(A, v)
        try:
            w = np.linalg.solve(M, embed_vector(v))
        except np.linalg.LinAlgError:
            refined.append(v)
            continue
        u = unembed_vector(w)
        norm = np.sqrt(qnormsq(u).sum())
        if norm == 0.0 or not np.all(np.isfinite(u)):
            refined.append(v)
            continue
        u = u / norm
        refined.append(u if _matvec_residual(A, u) <= res0 else v)
    # right Gram-Schmidt keeps the basis independent (kernel is a right subspace)
    ortho: list[np.ndarray] = []
    for v in refined:
        u = v.copy()
        for b in ortho:
            coef = qmul(qconj(b), u).sum(axis=0)  # <u, b> = sum conj(b_i) u_i
            u = u - qmul(b, coef)
        norm = np.sqrt(qnormsq(u).sum())
        if norm > 1e-8:
            ortho.append(u / norm)
        else:
            ortho.append(v)  # keep original rather than a numerically dead vector
    return ortho


def _matvec_residual(A: QMatrix, v: np.ndarray) -> float:
    av = qmul(A.data, v[None, :, :]).sum(axis=1)
    return float(np.sqrt(qnormsq(av).sum()))


def qmat_solve(A: QMatrix, B: QMatrix, rtol: float = 1e-13) -> QMatrix:
    """Solve A X = B by Gauss-Jordan elimination over the quaternions.

    Row operations multiply on the left, matching the left-division
    convention; partial pivoting picks the largest remaining entry norm.
    """
    if A.rows != A.cols:
        raise DomainError("coefficient matrix must be square")
    if A.rows != B.rows:
        raise DomainError("right-hand side has incompatible row count")
    n = A.rows
    aug = np.concatenate([A.data.copy(), B.data.copy()], axis=1)
    scale = max(A.max_abs(), 1e-300)
    for k in range(n):
        norms = qnorm(aug[k:, k])
        r = int(np.argmax(norms)) + k
        if norms[r - k] <= rtol * scale:
            raise SingularMatrixError(k)
        if r != k:
            aug[[k, r]] = aug[[r, k]]
        inv = qinv_arr(aug[k, k])
        aug[k, k:] = qmul(inv, aug[k, k:])
        rows = np.concatenate([np.arange(0, k), np.arange(k + 1, n)])
        if rows.size:
            factors = aug[rows, k]  # (m, 4)
            aug[np.ix_(rows, np.arange(k, aug.shape[1]))] -= qmul(
                factors[:, None, :], aug[k, k:][None, :, :]
            )
    return QMatrix(aug[:, n:])


def qinv_arr(q: np.ndarray) -> np.ndarray:
    n2 = float(qnormsq(q))
    if n2 == 0.0:
        raise DomainError("zero quaternion has no inverse")
    return qconj(q) / n2


def qmat_inverse(A: QMatrix, rtol: float = 1e-13) -> QMatrix:
    """Inverse via Gauss-Jordan; raises SingularMatrixError with the pivot index."""
    return qmat_solve(A, QMatrix.identity(A.rows), rtol=rtol)


# -- complex adjoint embedding -------------------------------------------------


def complex_embed(A: QMatrix) -> np.ndarray:
    """Embed an m x n quaternion matrix as a 2m x 2n complex matrix.

    Each entry q = alpha + beta*j (alpha, beta in C_i) maps to the block
    [[alpha, beta], [-conj(beta), conj(alpha)]].  The map is a ring
    homomorphism taking adjoints to adjoints, so Hermitian positivity is
    preserved both ways.
    """
    d = A.data
    alpha = d[..., 0] + 1j * d[..., 1]
    beta = d[..., 2] + 1j * d[..., 3]
    m, n = d.shape[0], d.shape[1]
    out = np.empty((2 * m, 2 * n), dtype=complex)
    out[0::2, 0::2] = alpha
    out[0::2, 1::2] = beta
    out[1::2, 0::2] = -np.conj(beta)
    out[1::2, 1::2] = np.conj(alpha)
    return out


def embed_vector(v: np.ndarray) -> np.ndarray:
    """First embedded column of a quaternion column vector ((n, 4) -> (2n,) complex)."""
    alpha = v[:, 0] + 1j * v[:, 1]
    beta = v[:, 2] + 1j * v[:, 3]
    out = np.empty(2 * v.shape[0], dtype=complex)
    out[0::2] = alpha
    out[1::2] = -np.conj(beta)
    return out


def unembed_vector(u: np.ndarray) -> np.ndarray:
    """Inverse of embed_vector ((2n,) complex -> (n, 4) float)."""
    alpha = u[0::2]
    beta = np.conj(-u[1::2])
    out = np.empty((u.shape[0] // 2, 4))
    out[:, 0] = alpha.real
    out[:, 1] = alpha.imag
    out[:, 2] = beta.real
    out[:, 3] = beta.imag
    return out


def jacobi_eigvalsh(H: np.ndarray, tol: float = 1e-13, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a complex Hermitian matrix by cyclic Jacobi sweeps.

    Each rotation zeroes one off-diagonal pair with a unitary plane rotation;
    sweeps repeat until the off-diagonal mass falls below tol * scale.
    """
    A = np.array(H, dtype=complex)
    n = A.shape[0]
    if A.shape != (n, n):
        raise DomainError("matrix must be square")
    if n and np.abs(A - A.conj().T).max() > 1e-10 * max(1.0, np.abs(A).max()):
        raise DomainError("matrix is not Hermitian")
    A = 0.5 * (A + A.conj().T)
    scale = max(np.abs(A).max(), 1.0) if n else 1.0
    for _ in range(max_sweeps):
        off = np.abs(A - np.diag(np.diag(A))).max() if n > 1 else 0.0
        if off <= tol * scale:
            return np.sort(np.diag(A).real)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 0.1 * tol * scale:
                    continue
                app = A[p, p].real
                aqq = A[q, q].real
                phi = apq / abs(apq)
                r = abs(apq)
                tau = (aqq - app) / (2.0 * r)
                t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau)) if tau != 0 else 1.0
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                Jrot = np.array([[c, s], [-np.conj(phi) * s, np.conj(phi) * c]], dtype=complex)
                A[:, [p, q]] = A[:, [p, q]] @ Jrot
                A[[p, q], :] = Jrot.conj().T @ A[[p, q], :]
                A[p, q] = 0.0
                A[q, p] = 0.0
    off = np.abs(A - np.diag(np.diag(A))).max()
    if off > 1e-8 * scale:
        raise ConvergenceError(f"Jacobi sweeps stalled with off-diagonal {off:.3e}")
    return np.sort(np.diag(A).real)


# -- scalar Stein / Sylvester solver --------------------------------------------


def sylvester_unit(a: Quaternion, b: Quaternion, c: Quaternion) -> Quaternion:
    """Unique solution x of x - a*x*b = c for |a||b| < 1.

    Solves the induced 4x4 real linear system; the result coincides with the
    convergent series sum_k a^k c b^k.
    """
    if abs(a) * abs(b) >= 1.0:
        raise DivergenceError("requires |a| * |b| < 1")
    M = np.eye(4) - left_mult_matrix(a) @ right_mult_matrix(b)
    return Quaternion.from_array(np.linalg.solve(M, c.as_array()))


def sylvester_unit_many(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Batched solver for x - a*x*b = c on (..., 4) arrays (broadcast inputs)."""
    a, b, c = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float), np.asarray(c, float))
    if np.any(qnorm(a) * qnorm(b) >= 1.0):
        raise DivergenceError("requires |a| * |b| < 1")
    shape = a.shape[:-1]
    La = _left_mult_many(a.reshape(-1, 4))
    Rb = _right_mult_many(b.reshape(-1, 4))
    M = np.eye(4)[None, :, :] - La @ Rb
    x = np.linalg.solve(M, c.reshape(-1, 4)[..., None])[..., 0]
    return x.reshape(shape + (4,))


def _left_mult_many(a: np.ndarray) -> np.ndarray:
    w, x, y, z = a[:, 0], a[:, 1], a[:, 2], a[:, 3]
    M = np.empty((a.shape[0], 4, 4))
    M[:, 0] = np.stack([w, -x, -y, -z], axis=-1)
    M[:, 1] = np.stack([x, w, -z, y], axis=-1)
    M[:, 2] = np.stack([y, z, w, -x], axis=-1)
    M[:, 3] = np.stack([z, -y, x, w], axis=-1)
    return M


def _right_mult_many(b: np.ndarray) -> np.ndarray:
    w, x, y, z = b[:, 0], b[:, 1], b[:, 2], b[:, 3]
    M = np.empty((b.shape[0], 4, 4))
    M[:, 0] = np.stack([w, -x, -y, -z], axis=-1)
    M[:, 1] = np.stack([x, w, z, -y], axis=-1)
    M[:, 2] = np.stack([y, -z, w, x], axis=-1)
    M[:, 3] = np.stack([z, y, -x, w], axis=-1)
    return M

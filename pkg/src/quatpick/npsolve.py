"""Nevanlinna-Pick interpolation engine for the quaternionic unit ball.

Pipeline: build the Pick matrix of a node/target data set through the scalar
Stein solver, reduce sphere-confined node groups to two representatives while
checking the forced third value, classify solvability (Pick matrix PSD) and
determinacy (PSD and singular), produce the unique solution in the
determinate case by two independent routes, and parametrize all solutions of
a positive definite problem by a linear-fractional map of the Schur class.
Verification helpers (block kernel Gram, Schwarz-Pick comparison) live here
as well.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateDataError,
    DomainError,
    InvalidParameterError,
    PreconditionError,
)
from .hardy import KernelGram, schur_toeplitz_test, sphere_representation
from .qlinalg import (
    HermitianQMatrix,
    PsdReport,
    QMatrix,
    default_pivot_tol,
    ldl_psd,
    qmat_inverse,
    qmat_solve,
    sylvester_unit_many,
)
from .quat import Quaternion, qconj, qmul, qnorm, qnormsq, same_sphere
from .series import DEFAULT_TRUNCATION, QSeries, eval_series_many, tail_bound
from .slicefn import (
    KernelFn,
    PolyFn,
    SliceFunction,
    StarInvFn,
    StarProdFn,
    SumFn,
    blaschke_fn,
)

__all__ = [
    "Problem",
    "PickData",
    "ThetaRep",
    "SolutionHandle",
    "Classification",
    "ReductionResult",
    "SphereCheck",
    "SchwarzPickResult",
    "build_pick",
    "pick_matrix_series",
    "reduce_problem",
    "classify",
    "determinate_solve",
    "theta_build",
    "theta_j_check",
    "lft_solution",
    "extended_gamma_solve",
    "blaschke",
    "schwarz_pick_check",
    "solution_block_gram",
]


@dataclass
class Problem:
    """Interpolation data: distinct nodes inside the open unit ball, targets."""

    nodes: list
    targets: list

    def __post_init__(self):
        if len(self.nodes) != len(self.targets):
            raise DomainError("nodes and targets must have equal length")
        if not self.nodes:
            raise DomainError("at least one interpolation condition required")
        for p in self.nodes:
            if abs(p) >= 1.0:
                raise DomainError(f"node {p!r} not inside the open unit ball")
        for i in range(len(self.nodes)):
            for j in range(i + 1, len(self.nodes)):
                if abs(self.nodes[i] - self.nodes[j]) <= 1e-14:
                    raise DomainError("interpolation nodes must be distinct")

    @property
    def n(self) -> int:
        return len(self.nodes)

    def node_array(self) -> np.ndarray:
        return np.array([p.as_array() for p in self.nodes])

    def target_array(self) -> np.ndarray:
        return np.array([s.as_array() for s in self.targets])

    def subproblem(self, indices) -> "Problem":
        return Problem([self.nodes[i] for i in indices], [self.targets[i] for i in indices])


@dataclass
class PickData:
    """Pick matrix with the Stein-equation companions (diagonal node matrix,
    all-ones column, target column)."""

    problem: Problem
    P: HermitianQMatrix
    T: QMatrix
    E: QMatrix
    N: QMatrix

    def stein_residual(self) -> float:
        """Max entry norm of P - T P T* - E E* + N N*."""
        lhs = self.P - (self.T @ self.P @ self.T.adjoint())
        rhs = (self.E @ self.E.adjoint()) - (self.N @ self.N.adjoint())
        return (lhs - rhs).max_abs()


def build_pick(problem: Problem) -> PickData:
    """Pick matrix entries via the scalar Stein solver (exact up to rounding)."""
    nodes = problem.node_array()
    targets = problem.target_array()
    c = np.zeros((problem.n, problem.n, 4))
    c[..., 0] = 1.0
    c -= qmul(targets[:, None, :], qconj(targets)[None, :, :])
    P = sylvester_unit_many(nodes[:, None, :], qconj(nodes)[None, :, :], c)
    scale = max(1.0, float(qnorm(P).max()))
    pick = PickData(
        problem=problem,
        P=HermitianQMatrix(P, tol=1e-10 * scale),
        T=QMatrix.diag(problem.nodes),
        E=QMatrix.column([Quaternion(1.0)] * problem.n),
        N=QMatrix.column(problem.targets),
    )
    return pick


def pick_matrix_series(problem: Problem, terms: int = 200) -> QMatrix:
    """Truncated-series oracle for the Pick matrix: sum of the first ``terms``
    powers p_i^k (1 - s_i conj(s_j)) conj(p_j)^k."""
    nodes = problem.node_array()
    targets = problem.target_array()
    n = problem.n
    c = np.zeros((n, n, 4))
    c[..., 0] = 1.0
    c -= qmul(targets[:, None, :], qconj(targets)[None, :, :])
    acc = np.zeros((n, n, 4))
    left = np.zeros((n, 4))
    left[:, 0] = 1.0
    right = left.copy()
    for _ in range(terms):
        acc += qmul(left[:, None, :], qmul(c, right[None, :, :]))
        left = qmul(left, nodes)
        right = qmul(right, qconj(nodes))
    return QMatrix(acc)


# -- sphere reduction ------------------------------------------------------------


@dataclass
class SphereCheck:
    sphere: tuple  # (real part, imaginary modulus)
    kept: tuple
    removed_index: int
    expected: Quaternion
    got: Quaternion
    ok: bool


@dataclass
class ReductionResult:
    problem: Problem
    consistent: bool
    checks: list = field(default_factory=list)
    removed: list = field(default_factory=list)
    groups: list = field(default_factory=list)


def reduce_problem(problem: Problem, tol: float | None = None) -> ReductionResult:
    """Keep at most two nodes per similarity sphere.

    Every removed target is compared against the value forced by the two kept
    conditions; a mismatch is reported as an inconsistent status, never as an
    exception.
    """
    if tol is None:
        tol = 1e-8 * (1.0 + max(abs(s) for s in problem.targets))
    groups = _sphere_groups(problem.nodes)
    keep = []
    checks: list[SphereCheck] = []
    removed: list[int] = []
    for group in groups:
        keep.extend(group[:2])
        if len(group) <= 2:
            continue
        i1, i2 = group[0], group[1]
        p1, s1 = problem.nodes[i1], problem.targets[i1]
        p2, s2 = problem.nodes[i2], problem.targets[i2]
        for k in group[2:]:
            expected = sphere_representation(p1, s1, p2, s2, problem.nodes[k])
            got = problem.targets[k]
            checks.append(
                SphereCheck(
                    sphere=(problem.nodes[k].re, problem.nodes[k].im_abs()),
                    kept=(i1, i2),
                    removed_index=k,
                    expected=expected,
                    got=got,
                    ok=abs(expected - got) <= tol,
                )
            )
            removed.append(k)
    keep = sorted(keep)
    reduced = problem.subproblem(keep)
    consistent = all(c.ok for c in checks)
    return ReductionResult(problem=reduced, consistent=consistent, checks=checks, removed=removed, groups=groups)


def _sphere_groups(nodes) -> list:
    """Indices grouped by similarity sphere, groups ordered by first member."""
    groups: list[list[int]] = []
    for i, p in enumerate(nodes):
        for g in groups:
            if same_sphere(nodes[g[0]], p):
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


# -- classification ----------------------------------------------------------------


@dataclass
class Classification:
    solvable: bool
    determinate: bool
    rank: int
    n: int
    min_pivot: float
    psd: PsdReport
    pick: PickData


def classify(problem: Problem, tol: float | None = None) -> Classification:
    """Solvable iff the Pick matrix is PSD; determinate iff additionally singular.

    Assumes the problem is already sphere-reduced.
    """
    pick = build_pick(problem)
    report = ldl_psd(pick.P, tol=tol)
    solvable = report.is_psd
    determinate = solvable and report.rank < problem.n
    return Classification(
        solvable=solvable,
        determinate=determinate,
        rank=report.rank,
        n=problem.n,
        min_pivot=report.min_pivot,
        psd=report,
        pick=pick,
    )


# -- solution handle ------------------------------------------------------------------


@dataclass
class SolutionHandle:
    """Evaluable interpolant: exact pointwise route plus truncated series route."""

    fn: SliceFunction
    problem: Problem | None
    kind: str
    parameter: object = None
    truncation: int = DEFAULT_TRUNCATION
    _series: QSeries | None = field(default=None, repr=False)

    def eval(self, p: Quaternion) -> Quaternion:
        return self.fn.eval(p)

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        return self.fn.eval_many(points)

    def series(self, order: int | None = None) -> QSeries:
        if order is None:
            order = self.truncation
        if self._series is None or self._series.order != order:
            self._series = self.fn.series(order)
        return self._series

    def residuals(self) -> np.ndarray:
        """Pointwise-path interpolation errors |S(p_i) - s_i| at the nodes."""
        if self.problem is None:
            return np.zeros(0)
        vals = self.eval_many(self.problem.node_array())
        return qnorm(vals - self.problem.target_array())

    def series_residuals(self, order: int | None = None) -> np.ndarray:
        if self.problem is None:
            return np.zeros(0)
        vals = eval_series_many(self.series(order), self.problem.node_array())
        return qnorm(vals - self.problem.target_array())

    def max_residual(self) -> float:
        r = self.residuals()
        return float(r.max()) if r.size else 0.0

    def tail_bound_at(self, abs_p: float) -> float:
        return tail_bound(self.series(), abs_p)


# -- determinate route ------------------------------------------------------------------


def determinate_solve(problem: Problem, tol: float | None = None, truncation: int = DEFAULT_TRUNCATION) -> SolutionHandle:
    """Unique solution of a singular PSD problem as R * Q^{-star}.

    R collects Szego kernels at the nodes against a Pick null vector; Q
    collects kernels at the target-conjugated nodes.  Both are closed-form,
    so the handle evaluates pointwise without truncation.
    """
    pick = build_pick(problem)
    report = ldl_psd(pick.P, tol=tol)
    if not report.is_psd:
        raise PreconditionError("Pick matrix is not positive semidefinite")
    if report.rank >= problem.n or not report.null_basis:
        raise PreconditionError("Pick matrix is not singular; problem is indeterminate")
    # null vector attached to the smallest pivot (most reliably zero)
    zero_pivots = [report.pivots[k] for k in report.null_pivot_indices]
    y = report.null_basis[int(np.argmin(zero_pivots))]
    alphas = [Quaternion.from_array(y[i]) for i in range(problem.n)]

    r_terms = [KernelFn(problem.nodes[i].conj(), right=alphas[i]) for i in range(problem.n)]
    q_terms = []
    for i in range(problem.n):
        s = problem.targets[i]
        if s.is_zero():
            continue
        shifted = s.inverse() * problem.nodes[i] * s
        q_terms.append(KernelFn(shifted.conj(), right=s.conj() * alphas[i]))
    if not q_terms or all(abs(t.right) == 0.0 for t in q_terms):
        raise DegenerateDataError("all targets vanish; quotient representation degenerates")
    fn = StarProdFn(SumFn(r_terms), StarInvFn(SumFn(q_terms)))
    return SolutionHandle(fn=fn, problem=problem, kind="determinate", parameter=None, truncation=truncation)


# -- the coefficient / LFT machinery -----------------------------------------------------


@dataclass
class ThetaRep:
    """2x2 matrix function driving the linear-fractional parametrization.

    Holds the structured data (node kernels against the inverted Pick matrix)
    from which both a coefficient stream and exact pointwise values follow.
    """

    pick: PickData
    kappa: np.ndarray  # (n, 2, 4): P^{-1} (I - T)^{-1} [E, -N]
    weights: np.ndarray  # (2, n, 4): rows [1 ... 1] and [conj(s_1) ... conj(s_n)]

    def entry_fn(self, a: int, b: int) -> SliceFunction:
        nodes = self.pick.problem.nodes
        kernels = [
            KernelFn(
                nodes[i].conj(),
                left=Quaternion.from_array(self.weights[a, i]),
                right=Quaternion.from_array(self.kappa[i, b]),
            )
            for i in range(len(nodes))
        ]
        terms: list[SliceFunction] = [StarProdFn(PolyFn([-1.0, 1.0]), SumFn(kernels))]
        if a == b:
            terms.append(PolyFn([1.0]))
        return SumFn(terms)

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        """Values at an (m, 4) point array as an (m, 2, 2, 4) array."""
        pts = np.asarray(points, dtype=float)
        nodes = self.pick.problem.node_array()
        m, n = pts.shape[0], nodes.shape[0]
        pm1 = pts.copy()
        pm1[:, 0] -= 1.0
        out = np.zeros((m, 2, 2, 4))
        out[:, 0, 0, 0] = 1.0
        out[:, 1, 1, 0] = 1.0
        for a in range(2):
            core = sylvester_unit_many(
                pts[:, None, :], qconj(nodes)[None, :, :], np.broadcast_to(self.weights[a][None, :, :], (m, n, 4))
            )
            for b in range(2):
                s = qmul(core, self.kappa[None, :, b, :]).sum(axis=1)
                out[:, a, b, :] += qmul(pm1, s)
        return out

    def eval(self, p: Quaternion) -> list:
        v = self.eval_many(p.as_array()[None, :])[0]
        return [[Quaternion.from_array(v[a, b]) for b in range(2)] for a in range(2)]

    def coeff_stream(self, count: int) -> np.ndarray:
        """Raw coefficients C_k of the kernel part as a (count, 2, 2, 4) array."""
        nodes = self.pick.problem.node_array()
        out = np.zeros((count, 2, 2, 4))
        right = np.zeros((len(nodes), 4))
        right[:, 0] = 1.0
        for k in range(count):
            wr = qmul(self.weights, right[None, :, :])  # (2, n, 4)
            for b in range(2):
                out[k, :, b, :] = qmul(wr, self.kappa[None, :, b, :]).sum(axis=1)
            right = qmul(right, qconj(nodes))
        return out

    def series_entries(self, order: int) -> list:
        """2x2 grid of QSeries for the function (includes the identity and the
        leading factor p - 1)."""
        C = self.coeff_stream(order + 1)
        coeffs = np.zeros((order + 1, 2, 2, 4))
        coeffs[0] = -C[0]
        coeffs[1:] = C[:-1] - C[1:]
        coeffs[0, 0, 0, 0] += 1.0
        coeffs[0, 1, 1, 0] += 1.0
        return [[QSeries(coeffs[:, a, b, :]) for b in range(2)] for a in range(2)]

    def identity_residual(self) -> float:
        """Max deviation of the value at 1 from the 2x2 identity (exactly zero
        by construction of the leading factor)."""
        v = self.eval_many(np.array([[1.0, 0.0, 0.0, 0.0]]))[0]
        v[0, 0, 0] -= 1.0
        v[1, 1, 0] -= 1.0
        return float(qnorm(v).max())


def theta_build(pick: PickData, tol: float | None = None) -> ThetaRep:
    """Assemble the coefficient data of the parametrizing matrix function.

    Requires a positive definite Pick matrix.
    """
    report = ldl_psd(pick.P, tol=tol)
    if not (report.is_psd and report.rank == pick.problem.n):
        raise PreconditionError("Pick matrix must be positive definite")
    n = pick.problem.n
    rhs = np.zeros((n, 2, 4))
    rhs[:, 0, :] = pick.E.data[:, 0, :]
    rhs[:, 1, :] = -pick.N.data[:, 0, :]
    # left-divide by the diagonal I - T
    ones = np.zeros((n, 4))
    ones[:, 0] = 1.0
    dinv = _qinv_rows(ones - pick.T.data[np.arange(n), np.arange(n)])
    rhs = qmul(dinv[:, None, :], rhs)
    kappa = qmat_solve(pick.P, QMatrix(rhs)).data
    weights = np.zeros((2, n, 4))
    weights[0, :, 0] = 1.0
    weights[1] = qconj(pick.problem.target_array())
    return ThetaRep(pick=pick, kappa=kappa, weights=weights)


def _qinv_rows(rows: np.ndarray) -> np.ndarray:
    n2 = qnormsq(rows)
    if np.any(n2 == 0.0):
        raise DomainError("node equal to 1 makes the diagonal factor singular")
    return qconj(rows) / n2[:, None]


def theta_j_check(theta: ThetaRep, points, tol: float | None = None) -> KernelGram:
    """Gram of the J-contractive kernel at sample points via its factored form.

    Entries go through the inverted Pick matrix, so positivity holds by
    construction and the check guards the assembled data.  The modulus of the
    lower-right function entry is verified to stay >= 1 (up to 1e-12) at the
    samples.
    """
    pts = np.array([p.as_array() for p in points])
    nodes = theta.pick.problem.node_array()
    m, n = pts.shape[0], nodes.shape[0]
    Pinv = qmat_inverse(theta.pick.P)
    F = np.zeros((m, 2, n, 4))
    for a in range(2):
        F[:, a, :, :] = sylvester_unit_many(
            pts[:, None, :], qconj(nodes)[None, :, :], np.broadcast_to(theta.weights[a][None, :, :], (m, n, 4))
        )
    # block (i, j) = F(p_i) P^{-1} F(p_j)^*
    gram = np.zeros((2 * m, 2 * m, 4))
    FP = np.zeros((m, 2, n, 4))
    for i in range(m):
        FP[i] = (QMatrix(F[i]) @ Pinv).data
    for i in range(m):
        for j in range(m):
            block = (QMatrix(FP[i]) @ QMatrix(F[j]).adjoint()).data
            gram[2 * i : 2 * i + 2, 2 * j : 2 * j + 2] = block
    g = HermitianQMatrix(gram, tol=1e-8 * max(1.0, float(qnorm(gram).max())))
    report = ldl_psd(g, tol=tol)
    tvals = theta.eval_many(pts)
    t22 = qnorm(tvals[:, 1, 1, :])
    meta = {
        "theta22_min_abs": float(t22.min()) if m else float("nan"),
        "theta22_ok": bool(np.all(t22 >= 1.0 - 1e-12)),
    }
    return KernelGram(points=list(points), gram=g, kind="theta_j", psd=report, meta=meta)


def lft_solution(
    theta: ThetaRep,
    param,
    schur_order: int = 32,
    schur_tol: float = 1e-9,
    truncation: int = DEFAULT_TRUNCATION,
) -> SolutionHandle:
    """Solution attached to a Schur-class parameter through the 2x2 function.

    The parameter is admitted by the Toeplitz contractivity test at the given
    order (membership in the closed class is undecidable from finitely many
    coefficients; the order-32 default matches the documented contract).
    """
    param_series = _as_parameter_series(param)
    test = schur_toeplitz_test(param_series, n_max=schur_order, tol=schur_tol)
    if not test.passed:
        raise InvalidParameterError(
            f"parameter fails the contractivity test at section {test.first_failure}"
        )
    efn = PolyFn(param_series)
    t11, t12 = theta.entry_fn(0, 0), theta.entry_fn(0, 1)
    t21, t22 = theta.entry_fn(1, 0), theta.entry_fn(1, 1)
    num = SumFn([StarProdFn(t11, efn), t12])
    den = SumFn([StarProdFn(t21, efn), t22])
    fn = StarProdFn(num, StarInvFn(den))
    return SolutionHandle(
        fn=fn,
        problem=theta.pick.problem,
        kind="lft",
        parameter=param_series,
        truncation=truncation,
    )


def _as_parameter_series(param) -> QSeries:
    if isinstance(param, QSeries):
        return param
    if isinstance(param, Quaternion):
        return QSeries.constant(param)
    if isinstance(param, (int, float)):
        return QSeries.constant(Quaternion(param))
    raise DomainError("parameter must be a QSeries or a quaternion constant")


# -- extended (determinate) route through the parametrization ------------------------------


def extended_gamma_solve(
    problem: Problem,
    tol: float | None = None,
    truncation: int = DEFAULT_TRUNCATION,
    uv_tol: float = 1e-8,
) -> SolutionHandle:
    """Unique solution of a singular PSD problem via a constant parameter.

    An invertible principal submatrix is located by greedy pivoting; the
    parametrization of the subproblem plus one excess interpolation node pins
    the parameter to a unimodular constant.
    """
    pick = build_pick(problem)
    report = ldl_psd(pick.P, tol=tol)
    if not report.is_psd:
        raise PreconditionError("Pick matrix is not positive semidefinite")
    if report.rank >= problem.n:
        raise PreconditionError("Pick matrix is nonsingular; problem is indeterminate")
    selected = _greedy_pd_subset(pick.P, tol=tol)
    if len(selected) >= problem.n:
        raise PreconditionError("greedy pivot search found no singular direction")
    excess = [i for i in range(problem.n) if i not in selected]
    e = excess[0]
    pe, se = problem.nodes[e], problem.targets[e]

    if not selected:
        # empty invertible block: every diagonal entry vanishes, so each
        # target is unimodular and the solution is that constant
        if abs(abs(se) - 1.0) > 1e-8:
            raise DegenerateDataError("rank-zero data requires unimodular targets")
        gamma = se / abs(se)
        return SolutionHandle(
            fn=PolyFn([gamma]), problem=problem, kind="extended-gamma", parameter=gamma, truncation=truncation
        )

    sub = problem.subproblem(selected)
    sub_pick = build_pick(sub)
    theta = theta_build(sub_pick, tol=tol)

    sub_nodes = sub.node_array()
    sub_targets = sub.target_array()
    cross = np.zeros((len(selected), 4))
    cross[:, 0] = 1.0
    cross -= qmul(se.as_array(), qconj(sub_targets))
    row = sylvester_unit_many(np.broadcast_to(pe.as_array(), sub_nodes.shape), qconj(sub_nodes), cross)
    ke = qmul(row, theta.kappa[:, 0, :]).sum(axis=0)
    kn = qmul(row, theta.kappa[:, 1, :]).sum(axis=0)
    pm1 = pe.as_array().copy()
    pm1[0] -= 1.0
    u = Quaternion.from_array(qmul(pm1, ke)) + Quaternion(1.0)
    v = Quaternion.from_array(qmul(pm1, kn)) - se

    if abs(u) <= uv_tol or abs(abs(u) - abs(v)) > uv_tol * (1.0 + abs(u) + abs(v)):
        raise PreconditionError(
            f"excess node does not pin a unimodular parameter (|u|={abs(u):.3e}, |v|={abs(v):.3e})"
        )
    gamma = -(u.inverse() * v)
    gamma = gamma / abs(gamma)
    handle = lft_solution(theta, gamma, truncation=truncation)
    return SolutionHandle(
        fn=handle.fn, problem=problem, kind="extended-gamma", parameter=gamma, truncation=truncation
    )


def _greedy_pd_subset(P: HermitianQMatrix, tol: float | None = None) -> list:
    """Indices of an invertible principal submatrix found by greedy symmetric
    pivoting on the Schur complement diagonal."""
    n = P.rows
    work = P.data.copy()
    if tol is None:
        diag_max = float(np.abs(work[np.arange(n), np.arange(n), 0]).max()) if n else 0.0
        tol = default_pivot_tol(diag_max, n)
    remaining = list(range(n))
    selected: list[int] = []
    while remaining:
        diag = np.array([work[r, r, 0] for r in remaining])
        j = int(np.argmax(diag))
        d = float(diag[j])
        if d <= max(tol, 0.0):
            break
        idx = remaining.pop(j)
        selected.append(idx)
        if remaining:
            rem = np.array(remaining)
            col = work[rem, idx]  # (m, 4)
            upd = qmul(col[:, None, :] / d, qconj(col)[None, :, :])
            work[np.ix_(rem, rem)] -= upd
    return sorted(selected)


# -- verification -----------------------------------------------------------------------


def blaschke(p1: Quaternion, truncation: int = DEFAULT_TRUNCATION) -> SolutionHandle:
    """Canonical self-map of the ball vanishing exactly at p1."""
    if abs(p1) >= 1.0:
        raise DomainError("zero must lie inside the open unit ball")
    return SolutionHandle(
        fn=blaschke_fn(p1),
        problem=Problem([p1], [Quaternion(0.0)]),
        kind="blaschke",
        parameter=p1,
        truncation=truncation,
    )


@dataclass
class SchwarzPickResult:
    max_violation: float
    equality_points: list
    lhs: np.ndarray
    rhs: np.ndarray


def schwarz_pick_check(S, p1: Quaternion, samples, equality_tol: float = 1e-9) -> SchwarzPickResult:
    """Compare the hyperbolic distortion of S against the Blaschke bound.

    Both sides are evaluated pointwise; ``max_violation`` is the largest
    (left - right) over the samples and points of near-equality are reported
    (they flag automorphisms).
    """
    fn = S.fn if isinstance(S, SolutionHandle) else S
    pts = samples if isinstance(samples, np.ndarray) else np.array([p.as_array() for p in samples])
    s1 = Quaternion.from_array(fn.eval_many(p1.as_array()[None, :])[0])
    num = SumFn([fn, PolyFn([-s1])])
    den = SumFn([PolyFn([1.0]), StarProdFn(PolyFn([-s1.conj()]), fn)])
    lhs_fn = StarProdFn(num, StarInvFn(den))
    lhs = qnorm(lhs_fn.eval_many(pts))
    rhs = qnorm(blaschke_fn(p1).eval_many(pts))
    diff = lhs - rhs
    eq_idx = np.nonzero(np.abs(diff) <= equality_tol)[0]
    eq_points = [Quaternion.from_array(pts[i]) for i in eq_idx]
    return SchwarzPickResult(
        max_violation=float(diff.max()) if diff.size else 0.0,
        equality_points=eq_points,
        lhs=lhs,
        rhs=rhs,
    )


def solution_block_gram(pick: PickData, S_eval, qpoints) -> KernelGram:
    """Block Gram [[P, B*], [B, K_S]] at extra sample points.

    Positivity of this block kernel characterizes solutions; B pairs each
    sample against the interpolation data and K_S is the multiplier kernel at
    the samples.
    """
    pts = np.array([p.as_array() for p in qpoints])
    nodes = pick.problem.node_array()
    targets = pick.problem.target_array()
    if isinstance(S_eval, SolutionHandle):
        S_eval = S_eval.fn
    if isinstance(S_eval, SliceFunction):
        sv = S_eval.eval_many(pts)
    else:
        sv = np.array([S_eval(Quaternion.from_array(p)).as_array() for p in pts])
    r, n = pts.shape[0], nodes.shape[0]
    cB = np.zeros((r, n, 4))
    cB[..., 0] = 1.0
    cB -= qmul(sv[:, None, :], qconj(targets)[None, :, :])
    B = sylvester_unit_many(pts[:, None, :], qconj(nodes)[None, :, :], cB)
    cK = np.zeros((r, r, 4))
    cK[..., 0] = 1.0
    cK -= qmul(sv[:, None, :], qconj(sv)[None, :, :])
    Kmat = sylvester_unit_many(pts[:, None, :], qconj(pts)[None, :, :], cK)
    G = np.zeros((n + r, n + r, 4))
    G[:n, :n] = pick.P.data
    G[n:, :n] = B
    G[:n, n:] = qconj(B).transpose(1, 0, 2)
    G[n:, n:] = Kmat
    gram = HermitianQMatrix(G, tol=1e-8 * max(1.0, float(qnorm(G).max())))
    return KernelGram(points=list(qpoints), gram=gram, kind="schur-block", psd=ldl_psd(gram))

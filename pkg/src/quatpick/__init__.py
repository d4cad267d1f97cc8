"""Nevanlinna-Pick interpolation for slice regular self-maps of the
quaternionic unit ball: Pick matrices over the quaternions, solvability and
determinacy classification, the unique determinate solution, and the
linear-fractional parametrization of all solutions in the indeterminate case.
"""

from .errors import (
    ConvergenceError,
    DegenerateDataError,
    DivergenceError,
    DomainError,
    InvalidParameterError,
    NonInvertibleError,
    PoleError,
    PreconditionError,
    QuatPickError,
    SingularMatrixError,
)
from .hardy import (
    DependenceResult,
    KernelGram,
    SchurTestResult,
    h2_inner,
    h2_norm_radial,
    kernel_dependence,
    ks_gram,
    schur_toeplitz_test,
    sphere_representation,
    sphere_representation_printed_order,
    szego_gram,
    szego_kernel,
)
from .npsolve import (
    Classification,
    PickData,
    Problem,
    ReductionResult,
    SchwarzPickResult,
    SolutionHandle,
    ThetaRep,
    blaschke,
    build_pick,
    classify,
    determinate_solve,
    extended_gamma_solve,
    lft_solution,
    pick_matrix_series,
    reduce_problem,
    schwarz_pick_check,
    solution_block_gram,
    theta_build,
    theta_j_check,
)
from .qlinalg import (
    HermitianQMatrix,
    PsdReport,
    QMatrix,
    complex_embed,
    jacobi_eigvalsh,
    ldl_psd,
    qmat_inverse,
    qmat_solve,
    sylvester_unit,
    sylvester_unit_many,
)
from .quat import Quaternion, imag_unit_of, is_imag_unit, same_sphere, similarity
from .series import (
    DEFAULT_TRUNCATION,
    QSeries,
    conj_series,
    eval_series,
    eval_series_many,
    eval_series_right,
    right_star_apply_pointwise,
    right_star_mul,
    star_apply_pointwise,
    star_inverse,
    star_inverse_pointwise,
    star_mul,
    tail_bound,
)
from .slicefn import (
    KernelFn,
    PolyFn,
    SliceFunction,
    StarInvFn,
    StarProdFn,
    SumFn,
    blaschke_fn,
    const_fn,
    identity_fn,
)

__version__ = "0.1.0"

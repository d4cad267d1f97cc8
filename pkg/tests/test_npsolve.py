import numpy as np
import pytest

from quatpick import (
    DomainError,
    InvalidParameterError,
    PreconditionError,
    Problem,
    QSeries,
    Quaternion,
    blaschke,
    build_pick,
    classify,
    determinate_solve,
    extended_gamma_solve,
    ldl_psd,
    lft_solution,
    pick_matrix_series,
    reduce_problem,
    schwarz_pick_check,
    solution_block_gram,
    theta_build,
    theta_j_check,
)
from conftest import problem_from_generator, random_nodes, random_schur_generator, singular_problem
from quatpick.quat import I, J, K, ONE, qnorm
from quatpick.sampling import random_in_ball, random_in_ball_many, random_unimodular
from quatpick.slicefn import PolyFn, StarProdFn, identity_fn


# -- Pick matrix -------------------------------------------------------------------


def test_pick_single_node_diagonal():
    pick = build_pick(Problem([Quaternion(0.5)], [Quaternion(0.0)]))
    assert pick.P[0, 0].isclose(Quaternion(4.0 / 3.0), 1e-14)


def test_pick_identity_data_all_ones():
    pick = build_pick(Problem([Quaternion(0), Quaternion(0.5)], [Quaternion(0), Quaternion(0.5)]))
    ones = np.zeros((2, 2, 4))
    ones[..., 0] = 1.0
    assert np.allclose(pick.P.data, ones, atol=1e-14)


def test_pick_diagonal_formula(rng):
    for _ in range(20):
        p = random_in_ball(rng, 0.8)
        s = random_in_ball(rng, 1.2)
        pick = build_pick(Problem([p], [s]))
        expect = (1 - abs(s) ** 2) / (1 - abs(p) ** 2)
        assert pick.P[0, 0].isclose(Quaternion(expect), 1e-12 * (1 + abs(expect)))


def test_pick_matches_series_oracle(rng):
    for _ in range(20):
        n = int(rng.integers(1, 6))
        prob = Problem(random_nodes(rng, n, 0.8), [random_in_ball(rng, 1.0) for _ in range(n)])
        pick = build_pick(prob)
        oracle = pick_matrix_series(prob, terms=200)
        prod = np.array([[abs(p) * abs(q) for q in prob.nodes] for p in prob.nodes])
        bound = prod**200 * 2.0 / (1.0 - prod) + 1e-12
        assert np.all(qnorm(pick.P.data - oracle.data) <= bound)


def test_stein_identity(rng):
    for _ in range(20):
        n = int(rng.integers(1, 6))
        prob = Problem(random_nodes(rng, n, 0.9), [random_in_ball(rng, 1.0) for _ in range(n)])
        pick = build_pick(prob)
        assert pick.stein_residual() <= 1e-11 * (1.0 + pick.P.max_abs())


def test_problem_validations():
    with pytest.raises(DomainError):
        Problem([Quaternion(1.0)], [Quaternion(0.0)])
    with pytest.raises(DomainError):
        Problem([Quaternion(1.5)], [Quaternion(0.0)])
    with pytest.raises(DomainError):
        Problem([Quaternion(0.5), Quaternion(0.5)], [Quaternion(0), Quaternion(0)])
    with pytest.raises(DomainError):
        Problem([Quaternion(0.5)], [Quaternion(0), Quaternion(0)])


# -- reduction --------------------------------------------------------------------


def test_reduce_consistent_sphere_triple():
    prob = Problem([I * 0.5, J * 0.5, K * 0.5], [I * 0.5, J * 0.5, K * 0.5])
    red = reduce_problem(prob)
    assert red.consistent
    assert red.problem.n == 2
    assert red.removed == [2]


def test_reduce_inconsistent_perturbed_target():
    prob = Problem([I * 0.5, J * 0.5, K * 0.5], [I * 0.5, J * 0.5, K * 0.5 + Quaternion(0.1)])
    red = reduce_problem(prob)
    assert not red.consistent
    bad = [c for c in red.checks if not c.ok]
    assert len(bad) == 1 and bad[0].removed_index == 2
    assert abs(bad[0].expected - K * 0.5) <= 1e-12


def test_reduce_distinct_spheres_unchanged(rng):
    prob = Problem(random_nodes(rng, 4, 0.7), [random_in_ball(rng, 0.9) for _ in range(4)])
    red = reduce_problem(prob)
    assert red.consistent and red.problem.n == 4 and not red.checks


def test_reduce_keeps_two_per_sphere(rng):
    # five nodes: a sphere triple carrying slice-polynomial values plus two free nodes
    gen = identity_fn()
    tri = [I * 0.5, J * 0.5, K * 0.5]
    others = [Quaternion(0.3), Quaternion(-0.2, 0.1, 0, 0)]
    nodes = tri + others
    prob = Problem(nodes, [gen.eval(p) for p in nodes])
    red = reduce_problem(prob)
    assert red.consistent and red.problem.n == 4


# -- classification ----------------------------------------------------------------


def test_classify_indeterminate():
    cl = classify(Problem([Quaternion(0)], [Quaternion(0.5)]))
    assert cl.solvable and not cl.determinate and cl.rank == 1


def test_classify_determinate_boundary_target():
    cl = classify(Problem([Quaternion(0)], [Quaternion(1.0)]))
    assert cl.solvable and cl.determinate and cl.rank == 0


def test_classify_unsolvable():
    cl = classify(Problem([Quaternion(0)], [Quaternion(1.5)]))
    assert not cl.solvable


def test_necessity_on_schur_generated_data(rng):
    for _ in range(25):
        gen = random_schur_generator(rng)
        n = int(rng.integers(1, 6))
        prob = problem_from_generator(rng, gen, n, radius=0.8)
        cl = classify(prob, tol=1e-9)
        assert cl.solvable
        assert cl.min_pivot >= -1e-9


# -- determinate route --------------------------------------------------------------


def test_determinate_unimodular_constant(rng):
    s = random_unimodular(rng)
    prob = Problem([Quaternion(0)], [s])
    sol = determinate_solve(prob, tol=1e-9)
    p = random_in_ball(rng, 0.8)
    assert abs(sol.eval(p) - s) <= 1e-14
    assert sol.max_residual() <= 1e-14


def test_determinate_identity_map(rng):
    prob = Problem([Quaternion(0), Quaternion(0.5)], [Quaternion(0), Quaternion(0.5)])
    sol = determinate_solve(prob)
    pts = random_in_ball_many(rng, 40, 0.8)
    assert float(qnorm(sol.eval_many(pts) - pts).max()) <= 1e-12
    ser = sol.series(32)
    assert abs(ser.coeff(1) - ONE) <= 1e-12
    assert max(abs(ser.coeff(k)) for k in (0, 2, 3, 4)) <= 1e-12


def test_determinate_requires_singular():
    with pytest.raises(PreconditionError):
        determinate_solve(Problem([Quaternion(0)], [Quaternion(0.5)]))


def test_determinate_requires_psd():
    with pytest.raises(PreconditionError):
        determinate_solve(Problem([Quaternion(0)], [Quaternion(1.5)]))


def test_determinate_generated_problems(rng):
    for _ in range(10):
        n = int(rng.integers(2, 5))
        prob, gen = singular_problem(rng, 1, n)
        sol = determinate_solve(prob, tol=1e-9)
        assert sol.max_residual() <= 1e-8
        pts = random_in_ball_many(rng, 30, 0.7)
        assert float(qnorm(sol.eval_many(pts) - gen.eval_many(pts)).max()) <= 1e-8


def test_determinate_independent_of_null_vector(rng):
    # rank deficiency 2: two different null directions must give the same map
    prob, gen = singular_problem(rng, 1, 4)
    pick = build_pick(prob)
    rep = ldl_psd(pick.P, tol=1e-9)
    assert len(rep.null_basis) >= 2
    from quatpick.npsolve import SumFn, StarInvFn, StarProdFn, KernelFn

    sols = []
    for y in rep.null_basis[:2]:
        alphas = [Quaternion.from_array(y[i]) for i in range(prob.n)]
        r_terms = [KernelFn(prob.nodes[i].conj(), right=alphas[i]) for i in range(prob.n)]
        q_terms = [
            KernelFn((prob.targets[i].inverse() * prob.nodes[i] * prob.targets[i]).conj(), right=prob.targets[i].conj() * alphas[i])
            for i in range(prob.n)
            if not prob.targets[i].is_zero()
        ]
        sols.append(StarProdFn(SumFn(r_terms), StarInvFn(SumFn(q_terms))))
    pts = random_in_ball_many(rng, 25, 0.6)
    assert float(qnorm(sols[0].eval_many(pts) - sols[1].eval_many(pts)).max()) <= 1e-9


# -- the 2x2 coefficient function -----------------------------------------------------


def test_theta_single_node_origin_zero_target():
    theta = theta_build(build_pick(Problem([Quaternion(0)], [Quaternion(0)])))
    p = Quaternion(0.3, 0.2, -0.1, 0.15)
    vals = theta.eval(p)
    assert abs(vals[0][0] - p) <= 1e-14
    assert abs(vals[0][1]) <= 1e-14 and abs(vals[1][0]) <= 1e-14
    assert abs(vals[1][1] - ONE) <= 1e-14


def test_theta_single_node_blaschke_entry():
    theta = theta_build(build_pick(Problem([Quaternion(0.6)], [Quaternion(0)])))
    for x in (0.0, 0.3, -0.5):
        vals = theta.eval(Quaternion(x))
        expect = (x - 0.6) / (1 - 0.6 * x)
        assert abs(vals[0][0] - Quaternion(expect)) <= 1e-13
        assert abs(vals[1][1] - ONE) <= 1e-14


def test_theta_identity_at_one(rng):
    gen = random_schur_generator(rng)
    prob = problem_from_generator(rng, gen, 3)
    theta = theta_build(build_pick(prob))
    assert theta.identity_residual() == 0.0


def test_theta_requires_positive_definite():
    with pytest.raises(PreconditionError):
        theta_build(build_pick(Problem([Quaternion(0), Quaternion(0.5)], [Quaternion(0), Quaternion(0.5)])))


def test_theta_series_matches_entry_functions(rng):
    gen = random_schur_generator(rng)
    prob = problem_from_generator(rng, gen, 2)
    theta = theta_build(build_pick(prob))
    entries = theta.series_entries(24)
    for a in range(2):
        for b in range(2):
            via_fn = theta.entry_fn(a, b).series(24)
            assert np.abs(entries[a][b].coeffs - via_fn.coeffs).max() <= 1e-12


def test_theta_eval_matches_entry_functions(rng):
    gen = random_schur_generator(rng)
    prob = problem_from_generator(rng, gen, 3)
    theta = theta_build(build_pick(prob))
    pts = random_in_ball_many(rng, 15, 0.8)
    grid = theta.eval_many(pts)
    for a in range(2):
        for b in range(2):
            direct = theta.entry_fn(a, b).eval_many(pts)
            assert float(qnorm(grid[:, a, b, :] - direct).max()) <= 1e-12


def test_theta_j_gram_single_node():
    theta = theta_build(build_pick(Problem([Quaternion(0)], [Quaternion(0)])))
    kg = theta_j_check(theta, [Quaternion(0.3)])
    expect = np.zeros((2, 2, 4))
    expect[0, 0, 0] = 1.0
    assert np.allclose(kg.gram.data, expect, atol=1e-13)
    assert kg.psd.is_psd
    # the lower-right function entry sits exactly on the unit boundary here
    assert kg.meta["theta22_min_abs"] == pytest.approx(1.0, abs=1e-14)
    assert kg.meta["theta22_ok"]


def test_theta_j_gram_random_points(rng):
    gen = random_schur_generator(rng)
    prob = problem_from_generator(rng, gen, 3)
    theta = theta_build(build_pick(prob))
    pts = [random_in_ball(rng, 0.8) for _ in range(4)]
    kg = theta_j_check(theta, pts)
    assert kg.psd.min_pivot >= -1e-9 * max(1.0, kg.gram.max_abs())
    assert kg.meta["theta22_ok"]
    # cross-check one diagonal block against the kernel definition:
    # sum p^k (J - Theta(p) J Theta(p)*) conj(p)^k entrywise
    from quatpick.qlinalg import sylvester_unit

    p = pts[0]
    tv = theta.eval(p)
    Jdiag = [1.0, -1.0]
    block = np.zeros((2, 2, 4))
    for a in range(2):
        for b in range(2):
            acc = Quaternion(1.0 if a == b else 0.0) * Jdiag[a] - sum(
                (tv[a][c] * Jdiag[c]) * tv[b][c].conj() for c in range(2)
            )
            block[a, b] = sylvester_unit(p, p.conj(), acc).as_array()
    assert np.allclose(block, kg.gram.data[:2, :2], atol=1e-10 * max(1.0, kg.gram.max_abs()))


# -- linear fractional parametrization ---------------------------------------------------


def test_lft_single_node_unimodular_parameter(rng):
    theta = theta_build(build_pick(Problem([Quaternion(0)], [Quaternion(0)])))
    gamma = random_unimodular(rng)
    sol = lft_solution(theta, gamma)
    pts = random_in_ball_many(rng, 20, 0.8)
    from quatpick.quat import qmul

    expect = qmul(pts, gamma.as_array())
    assert float(qnorm(sol.eval_many(pts) - expect).max()) <= 1e-13
    assert abs(sol.eval(Quaternion(0))) <= 1e-14


def test_lft_central_solution_interpolates(rng):
    for _ in range(5):
        gen = random_schur_generator(rng)
        n = int(rng.integers(1, 5))
        prob = problem_from_generator(rng, gen, n)
        cl = classify(prob, tol=1e-9)
        if not cl.rank == prob.n:
            continue
        theta = theta_build(cl.pick)
        sol = lft_solution(theta, QSeries.zero())
        assert sol.max_residual() <= 1e-8
        assert sol.series_residuals().max() <= 1e-6


def test_lft_parameter_matching_target(rng):
    p1, s1 = Quaternion(0.2, 0.1, 0, 0), Quaternion(0.3, 0, 0.2, 0)
    theta = theta_build(build_pick(Problem([p1], [s1])))
    sol = lft_solution(theta, QSeries.constant(s1))
    assert abs(sol.eval(p1) - s1) <= 1e-12


def test_lft_many_parameters_interpolate(rng):
    gen = random_schur_generator(rng)
    prob = problem_from_generator(rng, gen, 3)
    theta = theta_build(build_pick(prob))
    params = [QSeries.zero(), QSeries.constant(random_unimodular(rng)), QSeries.constant(I * 0.5)]
    params.append(blaschke(Quaternion(0.4, 0.2, 0, 0)).series(32))
    params.append(QSeries.from_quaternions([Quaternion(0.2), I * 0.4, J * 0.3]))
    for par in params:
        sol = lft_solution(theta, par)
        assert sol.max_residual() <= 1e-8
        assert sol.series_residuals().max() <= 1e-6


def test_lft_rejects_expanding_parameter():
    theta = theta_build(build_pick(Problem([Quaternion(0)], [Quaternion(0)])))
    with pytest.raises(InvalidParameterError):
        lft_solution(theta, QSeries.constant(Quaternion(1.2)))


def test_lft_solutions_stay_contractive(rng):
    gen = random_schur_generator(rng)
    prob = problem_from_generator(rng, gen, 2)
    theta = theta_build(build_pick(prob))
    sol = lft_solution(theta, QSeries.constant(random_unimodular(rng)))
    pts = random_in_ball_many(rng, 300, 0.95)
    assert float(qnorm(sol.eval_many(pts)).max()) <= 1.0 + 1e-10


# -- extended route -----------------------------------------------------------------------


def test_extended_identity_case(rng):
    prob = Problem([Quaternion(0), Quaternion(0.5)], [Quaternion(0), Quaternion(0.5)])
    sol = extended_gamma_solve(prob)
    assert abs(sol.parameter - ONE) <= 1e-12
    pts = random_in_ball_many(rng, 20, 0.8)
    assert float(qnorm(sol.eval_many(pts) - pts).max()) <= 1e-12


def test_extended_agrees_with_determinate(rng):
    for deg, n in ((1, 2), (1, 3), (2, 3), (2, 4)):
        prob, gen = singular_problem(rng, deg, n)
        a = determinate_solve(prob, tol=1e-9)
        b = extended_gamma_solve(prob, tol=1e-9)
        pts = random_in_ball_many(rng, 50, 0.7)
        assert float(qnorm(a.eval_many(pts) - b.eval_many(pts)).max()) <= 1e-8
        assert b.max_residual() <= 1e-8


def test_extended_unimodular_parameter_norm(rng):
    prob, _ = singular_problem(rng, 1, 3)
    sol = extended_gamma_solve(prob, tol=1e-9)
    assert abs(abs(sol.parameter) - 1.0) <= 1e-12


def test_extended_uv_cross_formula(rng):
    # the closed-form row expressions for (u, v) at the excess node must match
    # direct evaluation of the subproblem parametrizer at the shifted point,
    # and carry equal moduli (which is what pins a unimodular parameter)
    from quatpick.npsolve import _greedy_pd_subset

    for _ in range(6):
        prob, _ = singular_problem(rng, 1, 3)
        pick = build_pick(prob)
        selected = _greedy_pd_subset(pick.P, tol=1e-9)
        excess = [i for i in range(prob.n) if i not in selected][0]
        pe, se = prob.nodes[excess], prob.targets[excess]
        theta = theta_build(build_pick(prob.subproblem(selected)), tol=1e-9)
        tv_e = theta.eval(pe)
        shifted = se.inverse() * pe * se if not se.is_zero() else pe
        tv_s = theta.eval(shifted)
        u = tv_e[0][0] - se * tv_s[1][0] if not se.is_zero() else tv_e[0][0]
        v = tv_e[0][1] - se * tv_s[1][1] if not se.is_zero() else tv_e[0][1]
        assert abs(abs(u) - abs(v)) <= 1e-10 * (1.0 + abs(u))
        assert abs(u) > 1e-8
        gamma = -(u.inverse() * v)
        sol = extended_gamma_solve(prob, tol=1e-9)
        assert abs(gamma / abs(gamma) - sol.parameter) <= 1e-9


def test_extended_rank_zero_constant(rng):
    s = random_unimodular(rng)
    sol = extended_gamma_solve(Problem([Quaternion(0)], [s]), tol=1e-9)
    assert sol.kind == "extended-gamma"
    assert abs(sol.eval(random_in_ball(rng, 0.5)) - s) <= 1e-14


def test_extended_requires_singular():
    with pytest.raises(PreconditionError):
        extended_gamma_solve(Problem([Quaternion(0)], [Quaternion(0.5)]))


# -- Blaschke handle ------------------------------------------------------------------------


def test_blaschke_handle():
    b = blaschke(Quaternion(0.6))
    assert abs(b.eval(Quaternion(0.6))) <= 1e-15
    assert abs(b.eval(Quaternion(0.3)) - Quaternion(-0.3 / 0.82)) <= 1e-14
    assert b.max_residual() <= 1e-15
    b0 = blaschke(Quaternion(0.0))
    p = Quaternion(0.1, 0.2, 0.3, 0.4)
    assert abs(b0.eval(p) - p) <= 1e-15
    with pytest.raises(DomainError):
        blaschke(Quaternion(1.0))


# -- Schwarz-Pick ----------------------------------------------------------------------------


def test_schwarz_pick_identity_equality(rng):
    from quatpick.npsolve import SolutionHandle

    ident = SolutionHandle(fn=identity_fn(), problem=None, kind="identity")
    pts = random_in_ball_many(rng, 200, 0.9)
    res = schwarz_pick_check(ident, random_in_ball(rng, 0.6), pts)
    assert res.max_violation <= 1e-12
    assert len(res.equality_points) == 200


def test_schwarz_pick_constant(rng):
    from quatpick.npsolve import SolutionHandle

    c = SolutionHandle(fn=PolyFn([Quaternion(0.3, 0.2, 0, 0)]), problem=None, kind="constant")
    pts = random_in_ball_many(rng, 100, 0.9)
    res = schwarz_pick_check(c, random_in_ball(rng, 0.5), pts)
    assert np.all(res.lhs <= 1e-14)
    assert res.max_violation <= 0.0


def test_schwarz_pick_blaschke_automorphism(rng):
    b = blaschke(Quaternion(0.25, -0.3, 0.1, 0.2))
    pts = random_in_ball_many(rng, 300, 0.9)
    res = schwarz_pick_check(b, random_in_ball(rng, 0.7), pts)
    assert res.max_violation <= 1e-12
    assert np.abs(res.lhs - res.rhs).max() <= 1e-12


def test_schwarz_pick_strict_for_nonautomorphisms(rng):
    gen = random_schur_generator(rng)
    prob = problem_from_generator(rng, gen, 2)
    theta = theta_build(build_pick(prob))
    sol = lft_solution(theta, QSeries.zero())
    pts = random_in_ball_many(rng, 500, 0.85)
    res = schwarz_pick_check(sol, prob.nodes[0], pts)
    assert res.max_violation <= 1e-10


# -- block kernel Gram -------------------------------------------------------------------------


def test_solution_block_gram_psd(rng):
    for _ in range(3):
        gen = random_schur_generator(rng)
        prob = problem_from_generator(rng, gen, 2)
        cl = classify(prob, tol=1e-9)
        if cl.rank < prob.n:
            sol = determinate_solve(prob, tol=1e-9)
        else:
            sol = lft_solution(theta_build(cl.pick), QSeries.zero())
        qpts = [random_in_ball(rng, 0.7) for _ in range(4)]
        kg = solution_block_gram(cl.pick, sol, qpts)
        assert kg.psd.min_pivot >= -1e-9 * max(1.0, kg.gram.max_abs())


def test_block_gram_detects_non_solution(rng):
    # a map that misses the target badly cannot produce a PSD block kernel
    prob = Problem([Quaternion(0)], [Quaternion(0.9)])
    pick = build_pick(prob)
    wrong = PolyFn([Quaternion(-0.9)])
    qpts = [Quaternion(0.1), Quaternion(0.2, 0.3, 0, 0)]
    kg = solution_block_gram(pick, wrong, qpts)
    assert not kg.psd.is_psd


# -- handle internals ----------------------------------------------------------------------------


def test_solution_series_agrees_with_pointwise(rng):
    prob, gen = singular_problem(rng, 1, 3)
    sol = determinate_solve(prob, tol=1e-9)
    pts = random_in_ball_many(rng, 40, 0.7)
    ser = sol.series(256)
    from quatpick import eval_series_many, tail_bound

    gap = qnorm(sol.eval_many(pts) - eval_series_many(ser, pts))
    assert float(gap.max()) <= tail_bound(ser, 0.7) + 1e-9

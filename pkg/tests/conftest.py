"""Shared generators for the test suite (seeded, deterministic)."""

import numpy as np
import pytest

from quatpick import Problem, Quaternion
from quatpick.sampling import random_in_ball, random_quaternion, random_unimodular
from quatpick.slicefn import PolyFn, SliceFunction, StarProdFn, blaschke_fn


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def random_schur_poly(rng, degree, rho_max=0.95):
    """Polynomial with coefficient norms summing to at most rho_max < 1."""
    coeffs = [random_quaternion(rng) for _ in range(degree + 1)]
    total = sum(abs(c) for c in coeffs)
    scale = rng.uniform(0.3, rho_max) / total
    return PolyFn([c * scale for c in coeffs])


def random_schur_generator(rng) -> SliceFunction:
    """Random member of the Schur class: polynomial, Blaschke factor, or a
    star product of the two."""
    kind = rng.integers(0, 4)
    if kind == 0:
        return random_schur_poly(rng, int(rng.integers(0, 4)))
    if kind == 1:
        return blaschke_fn(random_in_ball(rng, 0.7))
    if kind == 2:
        return StarProdFn(blaschke_fn(random_in_ball(rng, 0.6)), random_schur_poly(rng, 2))
    return StarProdFn(random_schur_poly(rng, 1), blaschke_fn(random_in_ball(rng, 0.6)))


def random_nodes(rng, n, radius=0.7):
    nodes = []
    while len(nodes) < n:
        p = random_in_ball(rng, radius)
        if all(abs(p - q) > 1e-3 for q in nodes):
            nodes.append(p)
    return nodes


def problem_from_generator(rng, gen: SliceFunction, n: int, radius=0.7) -> Problem:
    nodes = random_nodes(rng, n, radius)
    targets = [gen.eval(p) for p in nodes]
    return Problem(nodes, targets)


def singular_problem(rng, degree: int, n: int):
    """Problem whose Pick matrix has rank == degree < n, plus its generator."""
    fn = blaschke_fn(random_in_ball(rng, 0.55))
    for _ in range(degree - 1):
        fn = StarProdFn(fn, blaschke_fn(random_in_ball(rng, 0.55)))
    gamma = random_unimodular(rng)
    gen = StarProdFn(fn, PolyFn([gamma]))
    return problem_from_generator(rng, gen, n, radius=0.65), gen


def random_sphere_triple(rng, y_min=0.1):
    """Three distinct points on one similarity sphere with y >= y_min."""
    x = rng.uniform(-0.5, 0.5)
    y = rng.uniform(y_min, np.sqrt(max(0.81 - x * x, y_min**2 + 1e-4)))
    units = []
    while len(units) < 3:
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        unit = Quaternion(0.0, *v)
        if all(abs(unit - u) > 1e-2 and abs(unit + u) > 1e-2 for u in units):
            units.append(unit)
    return [Quaternion(x) + u * y for u in units]

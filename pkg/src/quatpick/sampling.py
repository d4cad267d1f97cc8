"""Deterministic random sampling helpers (shared by the CLI and the tests)."""

from __future__ import annotations

import numpy as np

from .quat import Quaternion

__all__ = [
    "random_in_ball",
    "random_in_ball_many",
    "random_unimodular",
    "random_quaternion",
]


def random_quaternion(rng: np.random.Generator, scale: float = 1.0) -> Quaternion:
    return Quaternion.from_array(rng.normal(size=4) * scale)


def random_unimodular(rng: np.random.Generator) -> Quaternion:
    v = rng.normal(size=4)
    return Quaternion.from_array(v / np.linalg.norm(v))


def random_in_ball(rng: np.random.Generator, radius: float = 0.9) -> Quaternion:
    return Quaternion.from_array(random_in_ball_many(rng, 1, radius)[0])


def random_in_ball_many(rng: np.random.Generator, count: int, radius: float = 0.9) -> np.ndarray:
    """(count, 4) array of points with |p| <= radius, uniform in the ball."""
    v = rng.normal(size=(count, 4))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    r = radius * rng.uniform(size=(count, 1)) ** 0.25
    return v * r

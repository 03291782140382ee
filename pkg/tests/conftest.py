"""Shared pytest fixtures for all test modules."""

import numpy as np
import pytest
from rich.console import Console

from dcdual.fixtures import fixture_path
from dcdual.models import PrimalProblem, SolveConfig, load_problem


@pytest.fixture
def console() -> Console:
    """
    Rich Console configured for tests with recording enabled.

    :return: A Console instance with record=True for capturing output
    :rtype: Console
    """
    return Console(record=True, width=200)


@pytest.fixture
def serial_config() -> SolveConfig:
    """
    Default solver configuration forced to run serially.

    :return: SolveConfig with serial=True
    :rtype: SolveConfig
    """
    return SolveConfig(serial=True)


def _load(name: str) -> PrimalProblem:
    return load_problem(fixture_path(name))[1]


@pytest.fixture
def example1() -> PrimalProblem:
    """Convex-dominated example: a single S_a+ critical point."""
    return _load("example1")


@pytest.fixture
def example2() -> PrimalProblem:
    """Example with a MIN_MAX and a DOUBLE_MAX pair."""
    return _load("example2")


@pytest.fixture
def example3() -> PrimalProblem:
    """Example with a large-tau DOUBLE_MAX pair and a secondary local minimum."""
    return _load("example3")


@pytest.fixture
def example4() -> PrimalProblem:
    """Example exhibiting MIN_MAX, DOUBLE_MAX and DOUBLE_MIN pairs."""
    return _load("example4")


@pytest.fixture
def random_problem():
    """
    Return a factory producing seeded random instances.

    A_i are symmetric (possibly indefinite), B_j and C are symmetric positive
    definite, and at least one quartic term is present so Pi is coercive.

    Usage:
        problem = random_problem(seed, n=2, p=1, r=1)

    :return: Factory function creating PrimalProblem instances
    :rtype: Callable
    """

    def _spd(rng: np.random.Generator, n: int) -> np.ndarray:
        m = rng.normal(size=(n, n))
        return m @ m.T / n + 0.5 * np.eye(n)

    def _make(seed: int, n: int = 2, p: int = 1, r: int = 1) -> PrimalProblem:
        rng = np.random.default_rng(seed)
        A = []
        for _ in range(p):
            m = rng.normal(size=(n, n))
            A.append((m + m.T) / 2.0)
        return PrimalProblem(
            A=np.array(A).reshape(p, n, n),
            alpha=rng.uniform(-1.0, 2.0, size=p),
            B=np.array([_spd(rng, n) for _ in range(r)]).reshape(r, n, n),
            beta=rng.uniform(0.0, 2.0, size=r),
            C=_spd(rng, n),
            f=rng.uniform(-2.0, 2.0, size=n),
        )

    return _make

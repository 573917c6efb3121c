import numpy as np
import pytest


def random_values(rng, n_points: int, dist: str) -> np.ndarray:
    """Random path values from one of three families used across the suite."""
    if dist == "uniform":
        return rng.uniform(-1.0, 1.0, size=n_points)
    if dist == "gaussian":
        return np.cumsum(rng.normal(size=n_points))
    if dist == "jumpy":
        # mostly flat steps with occasional large jumps
        steps = rng.normal(scale=0.05, size=n_points)
        jumps = rng.binomial(1, 0.2, size=n_points) * rng.choice([-1.0, 1.0], size=n_points)
        jumps *= rng.uniform(0.5, 3.0, size=n_points)
        return np.cumsum(steps + jumps)
    raise ValueError(dist)


DISTS = ("uniform", "gaussian", "jumpy")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)

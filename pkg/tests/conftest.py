import numpy as np
import pytest

from rsgrowth import Grid, default_x_max, make_preset, solve


@pytest.fixture(scope="session")
def mult_model():
    return make_preset("multiplicative")


@pytest.fixture(scope="session")
def mult_grid(mult_model):
    return Grid.uniform(200, default_x_max(mult_model))


@pytest.fixture(scope="session")
def mult_solved(mult_model, mult_grid):
    return solve(mult_model, mult_grid, tol=1e-8)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

import numpy as np
import pytest

from lorenzlab import (
    CoefficientSpec,
    ConstantDiffusion,
    Domain,
    LorenzCurve,
    SpatialGrid,
    gaussian_density,
    uniform_density,
)


@pytest.fixture
def real_grid():
    return SpatialGrid.uniform(-1.5, 3.5, 257)


@pytest.fixture
def positive_grid():
    return SpatialGrid.uniform(0.0, 4.0, 257, Domain.POSITIVE)


@pytest.fixture
def unit_gaussian(real_grid):
    return gaussian_density(real_grid, 1.0, 0.05)


@pytest.fixture
def unit_uniform(positive_grid):
    """Uniform on [0, 2]: mean 1, Lorenz curve exactly f^2."""
    return uniform_density(positive_grid, 0.0, 2.0)


@pytest.fixture
def quadratic_curve():
    f = np.linspace(0.0, 1.0, 257)
    return LorenzCurve(f, f * f, domain=Domain.POSITIVE)


@pytest.fixture
def heat_coeffs():
    return CoefficientSpec(ConstantDiffusion(1.0))

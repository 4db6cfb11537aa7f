import numpy as np
import pytest

from netclt import (
    build_constant,
    build_geometric,
    build_poisson,
    build_power_cutoff,
)

# statistical tests use a conservative significance level so that false
# failures are vanishingly rare
ALPHA = 1e-3


@pytest.fixture(scope="session")
def families():
    return {
        "const5": build_constant(5),
        "po5": build_poisson(5.0),
        "geom": build_geometric(1.0 / 6.0),
        "power": build_power_cutoff(1.0, 13.796),
    }


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)

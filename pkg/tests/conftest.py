import numpy as np
import pytest

from src.sat_core.models import SatInstance


@pytest.fixture
def two_clause_instance() -> SatInstance:
    """(v1 OR NOT v2) AND (v2 OR v3) over three variables."""
    return SatInstance.from_literals(3, [[1, -2], [2, 3]])


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)

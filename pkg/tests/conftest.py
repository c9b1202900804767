import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for the oracles module

from ptphos.dataset import DesignMatrix


def make_matrix(X) -> DesignMatrix:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    columns = tuple(f"x{j}" for j in range(X.shape[1]))
    return DesignMatrix(columns, X, {c: c for c in columns})


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)

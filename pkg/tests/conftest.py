import numpy as np
import pytest

from smalg.quasiorder import closure


@pytest.fixture
def fan4():
    """Two source rows feeding two sink columns; the criterion fails at (1,3)."""
    return closure(4, {(1, 3), (1, 4), (2, 3), (2, 4)})


@pytest.fixture
def cocycle7():
    """7x7 pattern carrying a nontrivial transitive map while the criterion holds."""
    pairs = {(i, j) for i in range(1, 4) for j in range(4, 8)}
    pairs |= {(1, 3), (4, 5), (6, 7)}
    return closure(7, pairs)


@pytest.fixture
def two_blocks6():
    """Direct sum of two full 3x3 blocks."""
    pairs = {(i, j) for i in range(1, 4) for j in range(1, 4)}
    pairs |= {(i, j) for i in range(4, 7) for j in range(4, 7)}
    return closure(6, pairs)


@pytest.fixture
def sympair3():
    """A full 2x2 central block plus a singleton."""
    return closure(3, {(1, 2), (2, 1)})


@pytest.fixture
def rng():
    return np.random.default_rng(0)

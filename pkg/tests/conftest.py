import numpy as np
import pytest

import bifree.matrices as mx
from bifree.families import OperatorExpectation
from bifree.fock import FockSpace
from bifree.operators import OpElement


def random_left_op(space, d, rng, letters=None):
    """Left block element with random small combinations of creation and
    annihilation entries."""
    letters = letters if letters is not None else range(space.k)
    grid = [[None] * d for _ in range(d)]
    for i in range(d):
        for j in range(d):
            acc = None
            for g in letters:
                for kind in ("l", "l*"):
                    if rng.random() < 0.4:
                        c = complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) * 0.6
                        term = c * space.op(kind, g)
                        acc = term if acc is None else acc + term
            grid[i][j] = acc
    return OpElement.left_block(space, d, grid, label="randL")


def random_right_op(space, d, rng, letters=None):
    letters = letters if letters is not None else range(space.k)
    grid = [[None] * d for _ in range(d)]
    for i in range(d):
        for j in range(d):
            acc = None
            for g in letters:
                for kind in ("r", "r*"):
                    if rng.random() < 0.4:
                        c = complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) * 0.6
                        term = c * space.op(kind, g)
                        acc = term if acc is None else acc + term
            grid[i][j] = acc
    return OpElement.right_block(space, d, grid, label="randR")


def random_op(space, d, rng, tag, letters=None):
    if tag == "l":
        return random_left_op(space, d, rng, letters)
    return random_right_op(space, d, rng, letters)


@pytest.fixture(scope="session")
def small_ctx():
    """Coefficient dimension 2 over a 2-generator depth-6 space."""
    space = FockSpace(2, 6, max_dim=None)
    return OperatorExpectation(space, 2)


@pytest.fixture(scope="session")
def scalar_ctx():
    space = FockSpace(2, 8, max_dim=None)
    return OperatorExpectation(space, 1)

import math

import numpy as np
import pytest

SQRT5 = math.sqrt(5.0)
GOLDEN = (1.0 + SQRT5) / 2.0


def nst6_matrices():
    """Exact optimal pair for the six-event counterexample."""
    c = (SQRT5 - 1.0) / 2.0
    z = np.array([
        [SQRT5, -1, -1, -1, -1, -1, -1],
        [-1, 1, 0, c, c, 0, c],
        [-1, 0, 1, 0, c, c, c],
        [-1, c, 0, 1, 0, c, 0],
        [-1, c, c, 0, 1, 0, 1],
        [-1, 0, c, c, 0, 1, 0],
        [-1, c, c, 0, 1, 0, 1],
    ])
    f = 1.0 / SQRT5
    h = f / 2.0
    k = (5.0 - SQRT5) / 10.0
    r = k / 2.0
    x = np.array([
        [1, f, f, f, h, f, h],
        [f, f, k, 0, 0, k, 0],
        [f, k, f, k, 0, 0, 0],
        [f, 0, k, f, r, 0, r],
        [h, 0, 0, r, h, r, 0],
        [f, k, 0, 0, r, f, r],
        [h, 0, 0, r, 0, r, h],
    ])
    return x, z


@pytest.fixture
def nst6_pair():
    return nst6_matrices()


def antihole_theta_oracle(n):
    c = math.cos(math.pi / n)
    return (1.0 + c) / c


def hole_theta_oracle(n):
    c = math.cos(math.pi / n)
    return n * c / (1.0 + c)

import numpy as np
import pytest

from hardy_perturb import (
    BlaschkeProduct,
    TridiagonalKernel,
    shift_from_columns,
    shift_from_kernel,
)

NW = 96


@pytest.fixture
def nw():
    return NW


@pytest.fixture
def theta_half():
    """The Blaschke factor with a single zero at 1/2."""
    return BlaschkeProduct(1.0, (0.5,))


@pytest.fixture
def one_plus_z_kernel():
    """Kernel whose first basis vector is 1 + z (a0 = b0 = 1), rest plain."""
    return TridiagonalKernel(1, (1.0,), (1.0,))


@pytest.fixture
def one_plus_z_shift(one_plus_z_kernel):
    return shift_from_kernel(one_plus_z_kernel, NW)


@pytest.fixture
def two_perturbation_shift():
    """The rank-one 2-perturbation sending both 1 and z to z^2."""
    return shift_from_columns(2, [[0, 0, 1.0], [0, 0, 1.0]], NW)


@pytest.fixture
def weighted_shift():
    """The 1-shift sending 1 to 2z (weights 2, 1, 1, ...)."""
    return shift_from_columns(1, [[0.0, 1.0]], NW)


def rank_one_shift(a0, b0, nw=NW):
    """The 1-shift sending 1 to a0 z + b0 z^2 via explicit columns."""
    return shift_from_columns(1, [[0.0, a0 - 1.0, b0]], nw)


def theta_half_taylor_oracle(nw):
    """Geometric-series expansion of (1/2 - z)/(1 - z/2), fully by hand:
    (1/2 - z) * sum_k (z/2)^k, so c_0 = 1/2 and c_k = 2^-(k+1) - 2^-(k-1).
    """
    c = np.zeros(nw, dtype=np.complex128)
    c[0] = 0.5
    for k in range(1, nw):
        c[k] = 2.0 ** -(k + 1) - 2.0 ** -(k - 1)
    return c

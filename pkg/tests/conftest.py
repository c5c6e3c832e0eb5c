import numpy as np
import pytest

from starwave import NetworkFunction, StarNetwork, reference_network


@pytest.fixture(scope="session")
def net_a() -> StarNetwork:
    return reference_network("A")


@pytest.fixture(scope="session")
def net_b() -> StarNetwork:
    return reference_network("B")


@pytest.fixture(scope="session")
def net_c() -> StarNetwork:
    return reference_network("C")


def make_bump(net: StarNetwork, dx: float, length: float, branch: int = 0,
              center: float = 3.0, width: float = 0.5) -> NetworkFunction:
    """Gaussian on one internal branch, zero elsewhere, zero stamped at the node."""
    m = int(np.floor(length / dx)) + 1
    x = np.arange(m) * dx
    values = []
    for k in range(net.n):
        if k == branch:
            v = np.exp(-(((x - center) / width) ** 2)).astype(np.complex128)
        else:
            v = np.zeros(m, dtype=np.complex128)
        v[0] = 0.0  # clip the far Gaussian tail so all node samples agree
        values.append(v)
    return NetworkFunction((dx,) * net.n, values)

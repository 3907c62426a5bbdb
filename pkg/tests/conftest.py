import cmath

import pytest

from schottkylab.moebius import MoebiusMap
from schottkylab.schottky import Circle, CirclePairing, SchottkyGroup


def four_circle_group(r=1.0, twist=0.0):
    """Circles of radius r at -3, -3i, 3, 3i; generator i maps circle i
    onto circle i+2 (pairing across)."""
    w = r * r * cmath.exp(1j * twist)
    g1 = MoebiusMap.from_entries(3, 9 + w, 1, 3)
    g2 = MoebiusMap.from_entries(3j, w - 9, 1, 3j)
    circles = (Circle(-3, r), Circle(-3j, r), Circle(3, r), Circle(3j, r))
    return SchottkyGroup((g1, g2), CirclePairing(circles))


def cyclic_group():
    """gamma(z) = 3 + 1/(z+3) pairing |z+3|=1 onto |z-3|=1."""
    gam = MoebiusMap.from_entries(3, 10, 1, 3)
    return SchottkyGroup((gam,), CirclePairing((Circle(-3, 1.0), Circle(3, 1.0))))


def diag_cyclic_group():
    """z -> 4z as a rank-1 group without pairing (displacement 2n ln 2)."""
    return SchottkyGroup((MoebiusMap.from_entries(2, 0, 0, 0.5),))


def fuchsian_group(b=2.0):
    """All-real maps; circles of radius 1 at -3b, -b, 3b, b; the limit set
    lies on the real axis."""
    g1 = MoebiusMap.from_entries(3 * b, 9 * b * b + 1, 1, 3 * b)
    g2 = MoebiusMap.from_entries(b, b * b + 1, 1, b)
    circles = (Circle(-3 * b, 1.0), Circle(-b, 1.0), Circle(3 * b, 1.0), Circle(b, 1.0))
    return SchottkyGroup((g1, g2), CirclePairing(circles))


def hex_cluster_group(gap=0.01, twist=0.0):
    """Rank-6 near-tangent cluster: 12 hex-packed circles, antipodal
    pairing; small gaps push the dimension above one."""
    s3 = 0.8660254037844386
    sites = [
        1 + 0j, 0.5 + s3 * 1j, -0.5 + s3 * 1j, -1 + 0j, -0.5 - s3 * 1j,
        0.5 - s3 * 1j, 1.5 + s3 * 1j, 0 + 2 * s3 * 1j, -1.5 + s3 * 1j,
        -1.5 - s3 * 1j, 0 - 2 * s3 * 1j, 1.5 - s3 * 1j,
    ]
    order = sorted(sites, key=lambda z: (cmath.phase(z), abs(z)))
    rho = (1.0 - gap) / 2.0
    g = 6
    circles = tuple(Circle(c, rho) for c in order)
    gens = []
    for i in range(g):
        c, cp = order[i], order[i + g]
        w = rho * rho * cmath.exp(1j * twist)
        gens.append(MoebiusMap.from_entries(cp, w - c * cp, 1, -c))
    return SchottkyGroup(tuple(gens), CirclePairing(circles))


@pytest.fixture
def four_circle():
    return four_circle_group()


@pytest.fixture
def cyclic():
    return cyclic_group()


@pytest.fixture
def diag_cyclic():
    return diag_cyclic_group()


@pytest.fixture
def fuchsian():
    return fuchsian_group()

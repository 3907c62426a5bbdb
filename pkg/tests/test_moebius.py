import cmath
import math

import numpy as np
import pytest

from schottkylab.errors import CIsZeroError, IdentityError, PoleError
from schottkylab.moebius import (
    ELLIPTIC_TAG,
    IDENTITY_TAG,
    INFINITY,
    LOXODROMIC_TAG,
    PARABOLIC_TAG,
    MoebiusMap,
    from_fixed_points_multiplier,
    is_infinity,
    projectively_equal,
)


def random_map(rng):
    while True:
        entries = rng.standard_normal(8)
        a, b = complex(entries[0], entries[1]), complex(entries[2], entries[3])
        c, d = complex(entries[4], entries[5]), complex(entries[6], entries[7])
        if abs(a * d - b * c) > 0.1:
            return MoebiusMap.from_entries(a, b, c, d)


def test_compose_identity():
    g = MoebiusMap.from_entries(1, 2, 3, 7)
    assert projectively_equal(MoebiusMap.identity() @ g, g)
    assert projectively_equal(g @ MoebiusMap.identity(), g)


def test_compose_diagonal_powers():
    d2 = MoebiusMap.from_entries(2, 0, 0, 0.5)
    d4 = d2 @ d2
    assert projectively_equal(d4, MoebiusMap.from_entries(4, 0, 0, 0.25))


def test_compose_inverse_is_identity():
    rng = np.random.default_rng(1)
    for _ in range(20):
        f = random_map(rng)
        assert projectively_equal(f @ f.inverse(), MoebiusMap.identity())


def test_apply_basics():
    ident = MoebiusMap.identity()
    assert ident(1.5 + 2j) == 1.5 + 2j
    inv = MoebiusMap.from_entries(0, -1, 1, 0)  # z -> -1/z
    assert abs(inv(2) - (-0.5)) < 1e-15
    assert is_infinity(inv(0))
    assert abs(inv(INFINITY) - 0) < 1e-15


def test_apply_homomorphism():
    rng = np.random.default_rng(2)
    for _ in range(50):
        f, g = random_map(rng), random_map(rng)
        z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        gz = g(z)
        if is_infinity(gz) or abs(f.c * gz + f.d) < 0.1 or abs(g.c * z + g.d) < 0.1:
            continue
        assert abs((f @ g)(z) - f(gz)) < 1e-10


def test_composition_associative():
    rng = np.random.default_rng(3)
    for _ in range(100):
        f, g, h = (random_map(rng) for _ in range(3))
        lhs = (f @ g) @ h
        rhs = f @ (g @ h)
        assert projectively_equal(lhs, rhs, tol=1e-12)
        assert abs(lhs.det - 1) < 1e-12


def test_derivative_trivials():
    assert MoebiusMap.identity().derivative_modulus(3 + 1j) == 1.0
    inv = MoebiusMap.from_entries(0, -1, 1, 0)
    assert abs(inv.derivative_modulus(2) - 0.25) < 1e-14


def test_derivative_pole():
    inv = MoebiusMap.from_entries(0, -1, 1, 0)
    with pytest.raises(PoleError):
        inv.derivative_modulus(0)


def test_derivative_matches_finite_differences():
    rng = np.random.default_rng(4)
    step = 1e-6
    for _ in range(200):
        f = random_map(rng)
        z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        if abs(f.c * z + f.d) < 0.1:
            continue
        exact = f.derivative_modulus(z)
        fd = abs(f(z + step) - f(z - step)) / (2 * step)
        assert abs(fd - exact) / exact < 1e-6


def test_chain_rule():
    rng = np.random.default_rng(5)
    for _ in range(100):
        f, g = random_map(rng), random_map(rng)
        z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        gz = g(z)
        if is_infinity(gz) or abs(g.c * z + g.d) < 0.2 or abs(f.c * gz + f.d) < 0.2:
            continue
        lhs = (f @ g).derivative_modulus(z)
        rhs = f.derivative_modulus(gz) * g.derivative_modulus(z)
        assert abs(lhs - rhs) / rhs < 1e-10


def test_classify_table():
    assert MoebiusMap.identity().classify() == IDENTITY_TAG
    assert MoebiusMap.from_entries(-1, 0, 0, -1).classify() == IDENTITY_TAG
    assert MoebiusMap.from_entries(1, 1, 0, 1).classify() == PARABOLIC_TAG
    assert MoebiusMap.from_entries(2, 0, 0, 0.5).classify() == LOXODROMIC_TAG
    theta = 0.7
    rot = MoebiusMap.from_entries(cmath.exp(1j * theta), 0, 0, cmath.exp(-1j * theta))
    assert rot.classify() == ELLIPTIC_TAG


def test_fixed_points_diagonal():
    d = MoebiusMap.from_entries(2, 0, 0, 0.5)
    att, rep = d.fixed_points()
    assert is_infinity(att)
    assert abs(rep) < 1e-12


def test_fixed_points_parabolic_double():
    p = MoebiusMap.from_entries(1, 1, 0, 1)
    a, b = p.fixed_points()
    assert is_infinity(a) and is_infinity(b)


def test_fixed_points_identity_raises():
    with pytest.raises(IdentityError):
        MoebiusMap.identity().fixed_points()


def test_fixed_points_are_fixed_and_attract():
    rng = np.random.default_rng(6)
    for _ in range(50):
        f = random_map(rng)
        if f.classify() != LOXODROMIC_TAG:
            continue
        att, rep = f.fixed_points()
        if is_infinity(att) or is_infinity(rep):
            continue
        assert abs(f(att) - att) < 1e-9 * max(1.0, abs(att))
        assert abs(f(rep) - rep) < 1e-9 * max(1.0, abs(rep))
        if abs(f.multiplier()) < 1.5:
            continue  # too weakly contracting for a 50-step oracle
        # Iteration from a generic point converges to the first output.
        z = att + 1.7 + 0.9j
        for _ in range(50):
            z = f(z)
            if is_infinity(z):
                break
        if not is_infinity(z):
            assert abs(z - att) < 1e-6 * max(1.0, abs(att))


def test_isometric_circle():
    inv = MoebiusMap.from_entries(0, -1, 1, 0)
    circ = inv.isometric_circle()
    assert abs(circ.center) < 1e-14 and abs(circ.radius - 1) < 1e-14
    f = MoebiusMap.from_entries(3, -8, 1, -3)
    circ = f.isometric_circle()
    assert abs(circ.center - 3) < 1e-12
    assert abs(circ.radius - 1) < 1e-12
    # |f'| = 1 on 32 samples of the circle.
    for k in range(32):
        z = circ.point_at(2 * math.pi * k / 32)
        assert abs(f.derivative_modulus(z) - 1) < 1e-9


def test_isometric_circle_c_zero():
    with pytest.raises(CIsZeroError):
        MoebiusMap.from_entries(2, 1, 0, 0.5).isometric_circle()


def test_base_displacement():
    assert MoebiusMap.identity().base_displacement() == 0.0
    d = MoebiusMap.from_entries(2, 0, 0, 0.5)
    assert abs(d.base_displacement() - 2 * math.log(2)) < 1e-12


def test_displacement_slope_is_translation_length():
    rng = np.random.default_rng(7)
    f = random_map(rng)
    while f.classify() != LOXODROMIC_TAG:
        f = random_map(rng)
    u = random_map(rng)
    conj = u @ f @ u.inverse()
    n = 64
    fn, cn = f, conj
    for _ in range(n - 1):
        fn = fn @ f
        cn = cn @ conj
    ell = f.translation_length()
    assert abs(fn.base_displacement() / n - ell) < 0.2 * max(ell, 0.1)
    assert abs(cn.base_displacement() / n - ell) < 0.2 * max(ell, 0.1)


def test_from_fixed_points_multiplier():
    f = from_fixed_points_multiplier(1 + 1j, -2, 4.0)
    att, rep = f.fixed_points()
    assert abs(att - (1 + 1j)) < 1e-9
    assert abs(rep - (-2)) < 1e-9
    assert abs(abs(f.multiplier()) - 4.0) < 1e-9


def test_json_round_trip():
    f = MoebiusMap.from_entries(3, 10, 1, 3)
    data = f.to_json()
    assert len(data) == 4 and all(len(p) == 2 for p in data)
    g = MoebiusMap.from_json(data)
    assert projectively_equal(f, g)

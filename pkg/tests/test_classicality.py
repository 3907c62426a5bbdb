import math

import numpy as np
import pytest

from schottkylab.classicality import (
    ClassicalCertificate,
    FailureReport,
    check_witness_words,
    classify_domain_sequence,
    deform_toward_classical,
    search_classical_generators,
    verify_classical_domain,
)
from schottkylab.errors import (
    DisjointnessViolation,
    InconsistentSequence,
    OrientationViolation,
    PairingViolation,
)
from schottkylab.moebius import MoebiusMap, from_fixed_points_multiplier, projectively_equal
from schottkylab.schottky import Circle, CirclePairing, DegeneratePoint, SchottkyGroup

from conftest import cyclic_group, four_circle_group


def test_verify_rank1_certificate():
    G = cyclic_group()
    cert = verify_classical_domain(G.generators, G.pairing)
    assert abs(cert.margin - 4.0) < 1e-12


def test_verify_four_circle_margin():
    G = four_circle_group()
    cert = verify_classical_domain(G.generators, G.pairing)
    assert abs(cert.margin - (3 * math.sqrt(2) - 2)) < 1e-12


def test_verify_overlapping_disks_names_pair():
    G = four_circle_group()
    fat = CirclePairing(tuple(Circle(c.center, 2.2) for c in G.pairing.circles))
    with pytest.raises(DisjointnessViolation) as err:
        verify_classical_domain(G.generators, fat)
    assert err.value.index in {(0, 1), (0, 3), (1, 2), (2, 3)}


def test_verify_pairing_violation():
    G = four_circle_group()
    wrong = CirclePairing(
        (
            G.pairing.circles[0],
            G.pairing.circles[1],
            Circle(3 + 0j, 0.5),  # wrong target radius
            G.pairing.circles[3],
        )
    )
    with pytest.raises(PairingViolation) as err:
        verify_classical_domain(G.generators, wrong)
    assert err.value.index == 0


def test_verify_orientation_violation():
    # Swapping source and target circles flips the orientation: the
    # generator maps the exterior of the "source" onto the exterior side.
    G = cyclic_group()
    swapped = CirclePairing((G.pairing.circles[1], G.pairing.circles[0]))
    with pytest.raises((OrientationViolation, PairingViolation)):
        verify_classical_domain(G.generators, swapped)


def test_certificate_implies_ping_pong():
    G = four_circle_group()
    cert = verify_classical_domain(G.generators, G.pairing)
    g = len(cert.generators)
    for i, gen in enumerate(cert.generators):
        src = cert.pairing.circles[i]
        tgt = cert.pairing.circles[i + g]
        for t in range(64):
            z = src.center + 1.3 * src.radius * np.exp(2j * np.pi * t / 64)
            assert tgt.contains(gen(z))


# --- singularity classification ---


def _const_steps(n=6):
    return [[Circle(0, 1.0), Circle(5 + 0j, 1.0)] for _ in range(n)]


def test_classify_constant_none():
    report = classify_domain_sequence(_const_steps())
    assert report.kind == "None"


def test_classify_tangency():
    steps = [[Circle(0, 1.0), Circle(2 + 4.0**-n, 1.0)] for n in range(1, 9)]
    report = classify_domain_sequence(steps)
    assert report.kind == "Tangency"
    assert report.indices == (0, 1)
    assert abs(report.witness_point - (1 + 0j)) < 1e-6


def test_classify_degeneration():
    steps = [[Circle(0, 1.0), Circle(5 + 0j, 4.0**-n)] for n in range(1, 9)]
    report = classify_domain_sequence(steps)
    assert report.kind == "Degeneration"
    assert report.indices == (1,)
    assert abs(report.witness_point - 5) < 1e-6


def test_classify_degeneration_with_point_entries():
    steps = [[Circle(0, 1.0), Circle(5 + 0j, 4.0**-n)] for n in range(1, 6)]
    steps.append([Circle(0, 1.0), DegeneratePoint(5 + 0j)])
    report = classify_domain_sequence(steps)
    assert report.kind == "Degeneration"


def test_classify_collapsing_concentric():
    # The paper's geometry: two concentric circles collapsing into one.
    steps = [[Circle(0, 1.0), Circle(0j, 1.0 + 4.0**-n)] for n in range(1, 9)]
    report = classify_domain_sequence(steps)
    assert report.kind == "Collapsing"
    assert report.indices == (0, 1)
    assert abs(report.witness_circle.radius - 1.0) < 1e-6


def test_degeneration_beats_tangency():
    # A circle shrinking onto another: radius -> 0 also closes the gap.
    steps = [
        [Circle(0, 1.0), Circle(1 + 4.0**-n + 0j, 4.0**-n)] for n in range(1, 9)
    ]
    report = classify_domain_sequence(steps)
    assert report.kind == "Degeneration"


def test_classify_rejects_inconsistent():
    steps = _const_steps(4)
    steps[2] = steps[2] + [Circle(9 + 0j, 1.0)]
    with pytest.raises(InconsistentSequence):
        classify_domain_sequence(steps)


def test_classify_needs_three_steps():
    with pytest.raises(ValueError):
        classify_domain_sequence(_const_steps(2))


# --- classical search ---


def test_search_already_classical():
    G = four_circle_group()
    result = search_classical_generators(G, 100)
    assert isinstance(result, ClassicalCertificate)
    assert result.expansions == 1
    assert result.margin > 0
    assert check_witness_words(G, result)


def test_search_cyclic_isometric_pair():
    G = cyclic_group()
    result = search_classical_generators(G, 100)
    assert isinstance(result, ClassicalCertificate)


def _random_classical_group(rng, g=2):
    """Random disjoint circles with generous margins plus pairing maps."""
    while True:
        centers = []
        radii = []
        ok = True
        for _ in range(2 * g):
            for _attempt in range(200):
                c = complex(rng.uniform(-6, 6), rng.uniform(-6, 6))
                r = rng.uniform(0.4, 0.9)
                if all(
                    abs(c - c2) >= r + r2 + 2.0 for c2, r2 in zip(centers, radii)
                ):
                    centers.append(c)
                    radii.append(r)
                    break
            else:
                ok = False
                break
        if not ok:
            continue
        gens = []
        for i in range(g):
            c, cp = centers[i], centers[i + g]
            r, rp = radii[i], radii[i + g]
            phase = np.exp(1j * rng.uniform(0, 2 * np.pi))
            # z -> cp + r rp phase / (z - c) maps circle i onto circle i+g.
            gens.append(MoebiusMap.from_entries(cp, r * rp * phase - c * cp, 1, -c))
        circles = tuple(Circle(c, r) for c, r in zip(centers, radii))
        try:
            return SchottkyGroup(tuple(gens), CirclePairing(circles))
        except Exception:
            continue


def _scramble(rng, group, moves=3):
    gens = list(group.generators)
    g = len(gens)
    for _ in range(moves):
        kind = rng.integers(3)
        i = int(rng.integers(g))
        j = int((i + 1 + rng.integers(g - 1)) % g) if g > 1 else i
        if kind == 0:
            gens[i] = gens[i].inverse()
        elif kind == 1 and g > 1:
            gens[i] = gens[i] @ gens[j]
        elif g > 1:
            gens[i], gens[j] = gens[j], gens[i]
    angle = rng.uniform(0, 2 * np.pi)
    u = MoebiusMap.from_entries(np.exp(1j * angle), rng.uniform(-1, 1), 0.1, 1)
    return SchottkyGroup(tuple(u @ h @ u.inverse() for h in gens))


def test_scramble_round_trip():
    rng = np.random.default_rng(123)
    for _ in range(5):
        G = _random_classical_group(rng)
        scrambled = _scramble(rng, G)
        result = search_classical_generators(scrambled, 100_000)
        assert isinstance(result, ClassicalCertificate)
        assert check_witness_words(scrambled, result)


def test_search_reports_failure_budget():
    G = four_circle_group()
    g1, g2 = G.generators
    scr = SchottkyGroup((g1 @ g2, g2 @ g1 @ g2))
    result = search_classical_generators(scr, 2)
    if isinstance(result, FailureReport):
        assert result.expansions <= 2
        assert result.budget == 2


# --- deformation flow ---


def test_deform_already_classical_stops_immediately():
    G = four_circle_group()
    trace = deform_toward_classical(G, steps=20, depth=6)
    assert len(trace) == 1
    assert trace[0][2] is not None  # certificate at step 0


def test_deform_scrambled_near_touching():
    G = four_circle_group(1.9)
    g1, g2 = G.generators
    u = MoebiusMap.from_entries(1, 0.4 + 0.1j, 0.15, 1.05)
    scrambled = SchottkyGroup(
        (u @ (g1 @ g2) @ u.inverse(), u @ (g2 @ g1 @ g2) @ u.inverse())
    )
    trace = deform_toward_classical(scrambled, steps=20, depth=7, search_budget=300)
    values = [est.value for _, est, _ in trace]
    assert all(b <= a + 0.02 for a, b in zip(values, values[1:]))
    assert trace[-1][2] is not None
    assert trace[-1][2].margin > 0.1


def test_deform_cyclic_trace_zero():
    G = cyclic_group()
    trace = deform_toward_classical(G, steps=5, depth=6)
    assert all(est.value <= 0.05 for _, est, _ in trace)


def test_deform_inflation_keeps_fixed_points():
    from schottkylab.classicality import _inflate

    f = from_fixed_points_multiplier(1 + 1j, -2 + 0j, 3.0)
    inflated = _inflate(f, 1.5)
    p0, q0 = f.fixed_points()
    p1, q1 = inflated.fixed_points()
    assert abs(p0 - p1) < 1e-9 and abs(q0 - q1) < 1e-9
    assert abs(abs(inflated.multiplier()) - 4.5) < 1e-9

import math

import numpy as np
import pytest

from schottkylab.curves import (
    ARC,
    SEG,
    Piece,
    PolyCurve,
    arc_between,
    build_quasicircle,
    circle_curve,
    classify_quasicircle,
    curve_from_csv_rows,
    curve_to_csv_rows,
    default_generating_curve,
    frechet_distance,
    is_invariant,
    is_simple,
    map_piece,
    piece_intersections,
    quasicircle_length_estimate,
    segment,
)
from schottkylab.errors import NoPairingError, OrderingError
from schottkylab.moebius import MoebiusMap
from schottkylab.schottky import SchottkyGroup, count_reduced_words, max_disk_radius

from conftest import cyclic_group, four_circle_group, fuchsian_group


# --- generating curves ---


def test_default_curve_rank1_contains_front_segment():
    G = cyclic_group()
    zeta = default_generating_curve(G)
    assert zeta.arc_count == 2  # necklace of 2g arcs
    # One arc is the straight run [-2, 2] along the line of centers.
    straight = None
    for path in zeta.arcs:
        ends = sorted((path[0].start, path[-1].end), key=lambda z: z.real)
        if abs(ends[0] - (-2)) < 1e-9 and abs(ends[1] - 2) < 1e-9:
            straight = path
    assert straight is not None
    for piece in straight:
        assert piece.kind == SEG
        assert abs(piece.start.imag) < 1e-9 and abs(piece.end.imag) < 1e-9


def test_default_curve_gates_match_generator_images():
    G = four_circle_group()
    zeta = default_generating_curve(G)
    g = G.rank
    for i in range(g):
        gen = G.generators[i]
        assert abs(gen(zeta.gates_in[i]) - zeta.gates_in[i + g]) < 1e-9
        assert abs(gen(zeta.gates_out[i]) - zeta.gates_out[i + g]) < 1e-9


def test_default_curve_orthogonal_at_gates():
    G = four_circle_group()
    zeta = default_generating_curve(G)
    circles = G.pairing.circles
    for m, path in enumerate(zeta.arcs):
        j = zeta.necklace[m]
        k = zeta.necklace[(m + 1) % len(zeta.necklace)]
        for piece, circ, z in (
            (path[0], circles[j], path[0].start),
            (path[-1], circles[k], path[-1].end),
        ):
            tangent = piece._tangent(z)
            radial = (z - circ.center) / abs(z - circ.center)
            cross = abs(tangent.real * radial.imag - tangent.imag * radial.real)
            assert cross < 1e-6  # tangent parallel to radial = orthogonal hit


def test_default_curve_arcs_disjoint_and_outside_disks():
    G = four_circle_group()
    zeta = default_generating_curve(G)
    flat = [p for path in zeta.arcs for p in path]
    for a in range(len(flat)):
        for b in range(a + 2, len(flat)):
            hits = piece_intersections(flat[a], flat[b])
            shared = {flat[a].start, flat[a].end} & {flat[b].start, flat[b].end}
            hits = [z for z in hits if not any(abs(z - s) < 1e-9 for s in shared)]
            assert not hits


def test_default_curve_without_pairing():
    G = SchottkyGroup(four_circle_group().generators)
    with pytest.raises(NoPairingError):
        default_generating_curve(G)


# --- quasicircle construction ---


def test_depth0_rank1_is_arcs_plus_chords():
    G = cyclic_group()
    zeta = default_generating_curve(G)
    curve = build_quasicircle(G, zeta, 0)
    stats = curve.build_stats
    assert stats.arc_images == 2 and stats.chords == 2
    chords = [p for p in curve.pieces if p.kind == SEG]
    assert len(curve.pieces) == sum(len(p) for p in zeta.arcs) + 2


def test_piece_count_formula():
    G = four_circle_group()
    zeta = default_generating_curve(G)
    for depth in range(0, 5):
        curve = build_quasicircle(G, zeta, depth)
        stats = curve.build_stats
        words = sum(count_reduced_words(2, k) for k in range(depth + 1))
        assert stats.arc_images == zeta.arc_count * words
        assert stats.chords == 4 * 3**depth
        assert stats.words == words


def test_length_nondecreasing_in_depth():
    G = four_circle_group()
    zeta = default_generating_curve(G)
    lengths = [build_quasicircle(G, zeta, k).length for k in range(0, 6)]
    assert all(b >= a - 1e-12 for a, b in zip(lengths, lengths[1:]))


def test_quasicircle_simple():
    for G in (cyclic_group(), four_circle_group(), fuchsian_group()):
        zeta = default_generating_curve(G)
        assert is_simple(build_quasicircle(G, zeta, 5))


def test_length_increments_decay_for_low_dimension():
    for G in (four_circle_group(), fuchsian_group()):
        zeta = default_generating_curve(G)
        lengths = [build_quasicircle(G, zeta, k).length for k in range(3, 8)]
        incs = [b - a for a, b in zip(lengths, lengths[1:])]
        ratios = [b / a for a, b in zip(incs, incs[1:])]
        assert all(r < 0.9 for r in ratios)


def test_length_estimate_bounded_ratio():
    G = four_circle_group()
    zeta = default_generating_curve(G)
    for depth in range(3, 8):
        est = quasicircle_length_estimate(G, zeta, depth)
        assert 0.1 <= est.ratio <= 10.0


def test_length_estimate_cyclic_bounded():
    G = cyclic_group()
    zeta = default_generating_curve(G)
    prev = None
    for depth in (4, 6, 8):
        est = quasicircle_length_estimate(G, zeta, depth)
        if prev is not None:
            assert est.series_estimate - prev < 0.05  # converging series
        prev = est.series_estimate


def test_invariance_with_cover_tolerance():
    G = four_circle_group()
    zeta = default_generating_curve(G)
    depth = 4
    curve = build_quasicircle(G, zeta, depth)
    tol = 2 * max_disk_radius(G, depth)
    assert is_invariant(G, curve, tol)


def test_invariance_of_mapped_curve():
    G = four_circle_group()
    zeta = default_generating_curve(G)
    depth = 4
    curve = build_quasicircle(G, zeta, depth)
    tol = 2 * max_disk_radius(G, depth)
    gen = G.generators[0]
    mapped = PolyCurve(tuple(map_piece(gen, p) for p in curve.pieces))
    assert is_invariant(G, mapped, 2 * tol)


def test_random_circle_not_invariant():
    G = four_circle_group()
    assert not is_invariant(G, circle_curve(10 + 10j, 0.5), 1e-3)


# --- predicates ---


def test_is_simple_polygons():
    assert is_simple(PolyCurve.from_vertices([0, 2, 2 + 2j, 2j]))
    assert not is_simple(PolyCurve.from_vertices([0 + 0j, 2 + 0j, 0 + 2j, 2 + 2j]))
    eight = PolyCurve.from_vertices([-2 + 0j, -1 + 1j, 1 - 1j, 2 + 0j, 1 + 1j, -1 - 1j])
    assert not is_simple(eight)


def test_classify_default_curve_transverse():
    G = four_circle_group()
    zeta = default_generating_curve(G)
    curve = build_quasicircle(G, zeta, 3)
    flags = classify_quasicircle(G, curve)
    assert flags.linear
    assert flags.transverse
    assert not flags.parallel


def test_classify_parallel_curve():
    G = four_circle_group()
    circ = G.pairing.circles[0]
    curve = circle_curve(circ.center, circ.radius)
    flags = classify_quasicircle(G, curve)
    assert flags.parallel
    assert not flags.transverse


def test_transverse_parallel_exclusive():
    G = four_circle_group()
    zeta = default_generating_curve(G)
    for curve in (
        build_quasicircle(G, zeta, 2),
        circle_curve(G.pairing.circles[1].center, G.pairing.circles[1].radius),
        circle_curve(0, 0.5),
    ):
        flags = classify_quasicircle(G, curve)
        assert not (flags.transverse and flags.parallel)


def test_classify_conformal_invariance():
    # Conjugating group, pairing, and curve together preserves the angle
    # flags (Moebius maps are conformal).
    G = four_circle_group()
    zeta = default_generating_curve(G)
    curve = build_quasicircle(G, zeta, 2)
    u = MoebiusMap.from_entries(1, 0.2 + 0.1j, 0.05, 1.1)
    from schottkylab.schottky import CirclePairing, map_circle

    conj_group = SchottkyGroup(
        tuple(u @ g @ u.inverse() for g in G.generators),
        CirclePairing(tuple(map_circle(u, c) for c in G.pairing.circles)),
    )
    conj_curve = PolyCurve(tuple(map_piece(u, p) for p in curve.pieces))
    base = classify_quasicircle(G, curve)
    conj = classify_quasicircle(conj_group, conj_curve)
    assert base.transverse == conj.transverse
    assert base.parallel == conj.parallel


# --- Frechet metric ---


def test_frechet_identical_zero():
    c = PolyCurve.from_vertices([0, 3, 3 + 2j, 2j])
    assert frechet_distance(c, c) == 0.0


def test_frechet_concentric_circles():
    c1 = circle_curve(0, 1.0)
    c2 = circle_curve(0, 2.0)
    value = frechet_distance(c1, c2)
    assert abs(value - (1.0 + 2.0 * math.pi)) <= 0.01


def test_frechet_classical_variant():
    c1 = circle_curve(0, 1.0)
    c2 = circle_curve(0, 2.0)
    value = frechet_distance(c1, c2, include_length_term=False)
    assert abs(value - 1.0) <= 0.01


def _random_polycurve(rng, n):
    angles = np.sort(rng.uniform(0, 2 * np.pi, n))
    radii = rng.uniform(0.5, 2.0, n)
    pts = radii * np.exp(1j * angles) + complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
    return PolyCurve.from_vertices(pts)


def test_frechet_metric_axioms():
    rng = np.random.default_rng(9)
    for _ in range(100):
        a = _random_polycurve(rng, int(rng.integers(5, 12)))
        b = _random_polycurve(rng, int(rng.integers(5, 12)))
        c = _random_polycurve(rng, int(rng.integers(5, 12)))
        res = max(a.length, b.length, c.length) / 64.0
        dab = frechet_distance(a, b, resolution=res)
        dba = frechet_distance(b, a, resolution=res)
        dac = frechet_distance(a, c, resolution=res)
        dbc = frechet_distance(b, c, resolution=res)
        assert dab >= 0.0
        assert abs(dab - dba) < 1e-9
        assert dac <= dab + dbc + 1e-9


def test_frechet_zero_for_rotated_start():
    verts = [0, 2, 2 + 2j, 1 + 3j, 2j]
    a = PolyCurve.from_vertices(verts)
    b = PolyCurve.from_vertices(verts[2:] + verts[:2])
    assert frechet_distance(a, b) < 1e-9


# --- geometry plumbing ---


def test_map_piece_exactness():
    f = MoebiusMap.from_entries(3, 10, 1, 3)
    piece = segment(-2 + 0j, 2 + 0j)
    image = map_piece(f, piece)
    # Real axis maps to the real axis: image stays a segment.
    assert image.kind == SEG
    assert abs(image.start - f(-2)) < 1e-12 and abs(image.end - f(2)) < 1e-12
    bow = arc_between(0, 1.0, 0.0, math.pi)
    image = map_piece(f, bow)
    assert image.kind == ARC
    for t in (0.1, 0.5, 0.9):
        z = bow.point_at(t)
        w = f(z)
        assert abs(abs(w - image.center) - image.radius) < 1e-9


def test_polycurve_requires_closure():
    with pytest.raises(OrderingError):
        PolyCurve((segment(0, 1), segment(2, 3), segment(3, 0)))


def test_curve_csv_round_trip():
    G = four_circle_group()
    zeta = default_generating_curve(G)
    curve = build_quasicircle(G, zeta, 1)
    rows = curve_to_csv_rows(curve)
    back = curve_from_csv_rows(rows)
    assert len(back.pieces) == len(curve.pieces)
    assert abs(back.length - curve.length) < 1e-9
    for p, q in zip(curve.pieces, back.pieces):
        assert p.kind == q.kind
        assert abs(p.start - q.start) < 1e-12
        if p.kind == ARC:
            assert p.ccw == q.ccw and abs(p.radius - q.radius) < 1e-12

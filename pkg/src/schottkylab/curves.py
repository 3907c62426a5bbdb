"""Generating curves, truncated quasi-circles, curve predicates, and the
Frechet metric with the length term.

Curves are closed chains of exact pieces (line segments and circular
arcs); Moebius images of pieces stay in this class, so refinement never
approximates geometry.  A generating system is a "necklace": the 2g
pairing circles in a cyclic visiting order, two gate points per circle
(entry and exit), and one connecting arc per consecutive pair.  Gates on
target circles are the generator images of the source gates, which is
what makes the refinement chain up into a closed invariant curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels
from .errors import DegenerateImage, DisjointnessError, NoPairingError, OrderingError
from .moebius import MoebiusMap, is_infinity
from .schottky import Circle, SchottkyGroup, count_reduced_words

SEG = "seg"
ARC = "arc"
_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Piece:
    """One curve edge: a segment or a circular arc with orientation."""

    kind: str
    start: complex
    end: complex
    center: complex = 0j
    radius: float = 0.0
    ccw: bool = True

    @cached_property
    def length(self) -> float:
        if self.kind == SEG:
            return abs(self.end - self.start)
        return self.radius * self.sweep

    @cached_property
    def sweep(self) -> float:
        """Unsigned angular extent of an arc (2*pi for a full circle)."""
        a0 = _angle(self.start - self.center)
        a1 = _angle(self.end - self.center)
        if abs(self.start - self.end) < 1e-14 * max(1.0, self.radius):
            return _TWO_PI
        if self.ccw:
            return (a1 - a0) % _TWO_PI
        return (a0 - a1) % _TWO_PI

    def reversed(self) -> "Piece":
        return Piece(self.kind, self.end, self.start, self.center, self.radius, not self.ccw)

    def point_at(self, t: float) -> complex:
        if self.kind == SEG:
            return self.start + t * (self.end - self.start)
        a0 = _angle(self.start - self.center)
        a = a0 + (t * self.sweep if self.ccw else -t * self.sweep)
        return self.center + self.radius * complex(math.cos(a), math.sin(a))

    @cached_property
    def midpoint(self) -> complex:
        return self.point_at(0.5)

    def tangent_at_start(self) -> complex:
        return self._tangent(self.start)

    def tangent_at_end(self) -> complex:
        return self._tangent(self.end)

    def _tangent(self, z: complex) -> complex:
        if self.kind == SEG:
            d = self.end - self.start
            return d / abs(d)
        t = 1j * (z - self.center)
        t /= abs(t)
        return t if self.ccw else -t

    def bbox(self):
        if self.kind == SEG:
            xs = (self.start.real, self.end.real)
            ys = (self.start.imag, self.end.imag)
            return min(xs), min(ys), max(xs), max(ys)
        pts = [self.start, self.end]
        for k in range(4):
            a = 0.5 * math.pi * k
            z = self.center + self.radius * complex(math.cos(a), math.sin(a))
            if self.contains_angle(a):
                pts.append(z)
        xs = [p.real for p in pts]
        ys = [p.imag for p in pts]
        return min(xs), min(ys), max(xs), max(ys)

    def contains_angle(self, theta: float, slack: float = 1e-12) -> bool:
        """Is the given polar angle inside the arc's angular range?"""
        a0 = _angle(self.start - self.center)
        sweep = self.sweep
        off = (theta - a0) % _TWO_PI if self.ccw else (a0 - theta) % _TWO_PI
        return off <= sweep + slack or off >= _TWO_PI - slack


def _angle(z: complex) -> float:
    return math.atan2(z.imag, z.real)


def segment(p: complex, q: complex) -> Piece:
    return Piece(SEG, p, q)


def arc_between(center: complex, radius: float, a0: float, a1: float, ccw: bool = True) -> Piece:
    p = center + radius * complex(math.cos(a0), math.sin(a0))
    q = center + radius * complex(math.cos(a1), math.sin(a1))
    return Piece(ARC, p, q, center, radius, ccw)


@dataclass(frozen=True)
class BuildStats:
    depth: int
    arc_images: int
    chords: int
    words: int


@dataclass(frozen=True)
class PolyCurve:
    """Closed chain of pieces; consecutive pieces share endpoints."""

    pieces: tuple
    approximated: bool = False
    build_stats: BuildStats | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.pieces:
            raise ValueError("curve needs at least one piece")
        scale = max(1.0, max(abs(p.start) for p in self.pieces))
        for cur, nxt in zip(self.pieces, self.pieces[1:] + self.pieces[:1]):
            if abs(cur.end - nxt.start) > 1e-9 * scale:
                raise OrderingError(
                    f"chain break: piece ends at {cur.end:.6g}, next starts at {nxt.start:.6g}"
                )

    @cached_property
    def length(self) -> float:
        return float(sum(p.length for p in self.pieces))

    @cached_property
    def vertices(self) -> tuple:
        return tuple(p.start for p in self.pieces)

    @classmethod
    def from_vertices(cls, vertices, **kw) -> "PolyCurve":
        vs = [complex(v) for v in vertices]
        if len(vs) < 3:
            raise ValueError("closed polyline needs at least 3 vertices")
        return cls(tuple(segment(a, b) for a, b in zip(vs, vs[1:] + vs[:1])), **kw)

    def sample(self, count: int) -> np.ndarray:
        """Arclength-uniform samples, starting at the first vertex."""
        lengths = np.array([p.length for p in self.pieces])
        cum = np.concatenate([[0.0], np.cumsum(lengths)])
        total = cum[-1]
        ts = np.arange(count) * (total / count)
        idx = np.clip(np.searchsorted(cum, ts, side="right") - 1, 0, len(self.pieces) - 1)
        out = np.empty(count, dtype=np.complex128)
        for k in range(count):
            i = idx[k]
            local = (ts[k] - cum[i]) / lengths[i] if lengths[i] > 0 else 0.0
            out[k] = self.pieces[i].point_at(float(local))
        return out

    def sample_by_pieces(self, delta: float) -> np.ndarray:
        """Samples anchored at the piece vertices, each piece subdivided at
        resolution ``delta``; reparameterized vertex cycles sample to the
        same point cycle."""
        pts = []
        for piece in self.pieces:
            n = max(1, math.ceil(piece.length / max(delta, 1e-12)))
            pts.extend(piece.point_at(k / n) for k in range(n))
        return np.asarray(pts, dtype=np.complex128)

    def reversed(self) -> "PolyCurve":
        return PolyCurve(
            tuple(p.reversed() for p in reversed(self.pieces)), self.approximated
        )


def circle_curve(center: complex, radius: float, ccw: bool = True) -> PolyCurve:
    """A full circle as two half arcs."""
    half1 = arc_between(center, radius, 0.0, math.pi, ccw=True)
    half2 = arc_between(center, radius, math.pi, _TWO_PI, ccw=True)
    if not ccw:
        return PolyCurve((half2.reversed(), half1.reversed()))
    return PolyCurve((half1, half2))


def map_piece(f: MoebiusMap, piece: Piece) -> Piece:
    """Exact Moebius image: circlines go to circlines."""
    w0 = f(piece.start)
    wm = f(piece.midpoint)
    w1 = f(piece.end)
    if any(is_infinity(w) for w in (w0, wm, w1)):
        raise DegenerateImage("piece image passes through infinity")
    cross = (wm - w0).real * (w1 - wm).imag - (wm - w0).imag * (w1 - wm).real
    scale = max(abs(wm - w0), abs(w1 - wm), 1e-300)
    if abs(cross) < 1e-12 * scale * scale:
        return Piece(SEG, w0, w1)
    from .schottky import circle_through_points

    try:
        image = circle_through_points(w0, wm, w1)
    except DegenerateImage:
        # Sub-resolution image: straight to machine precision.
        return Piece(SEG, w0, w1)
    return Piece(ARC, w0, w1, image.center, image.radius, ccw=cross > 0)


def _reverse_pieces(pieces) -> list:
    return [p.reversed() for p in reversed(pieces)]


# --- generating curves ------------------------------------------------------


@dataclass(frozen=True)
class GeneratingCurve:
    """Necklace generating system for the truncated quasi-circle.

    ``necklace`` lists the 2g circle indices in visiting order; the curve
    leaves circle j at ``gates_out[j]`` and enters the next circle at its
    ``gates_in``.  Gates on circle i+g are the generator-i images of the
    gates on circle i.  ``arcs[m]`` is the piece path from
    ``gates_out[necklace[m]]`` to ``gates_in[necklace[m+1]]``.
    """

    necklace: tuple
    gates_in: tuple
    gates_out: tuple
    arcs: tuple

    @cached_property
    def total_length(self) -> float:
        return float(sum(p.length for path in self.arcs for p in path))

    @property
    def arc_count(self) -> int:
        return len(self.arcs)


def _validate_generating_curve(group: SchottkyGroup, zeta: GeneratingCurve) -> None:
    circles = group.pairing.circles
    n = len(circles)
    scale = max(abs(c.center) + c.radius for c in circles)
    for j in range(n):
        for gate in (zeta.gates_in[j], zeta.gates_out[j]):
            if abs(abs(gate - circles[j].center) - circles[j].radius) > 1e-9 * max(1.0, scale):
                raise DisjointnessError(f"gate {gate:.6g} is not on circle {j}")
    g = group.rank
    for i in range(g):
        gen = group.generators[i]
        if abs(gen(zeta.gates_in[i]) - zeta.gates_in[i + g]) > 1e-9 * scale or abs(
            gen(zeta.gates_out[i]) - zeta.gates_out[i + g]
        ) > 1e-9 * scale:
            raise DisjointnessError(
                f"gates on circle {i + g} are not the generator-{i} images of circle {i}'s"
            )
    # Arcs keep clear of every open disk (touching only at their gates).
    for path in zeta.arcs:
        for piece in path:
            for j, circ in enumerate(circles):
                d = _piece_distance_to_point(piece, circ.center)
                if d < circ.radius - 1e-9 * max(1.0, scale):
                    raise DisjointnessError(
                        f"generating arc piece enters disk {j} (distance {d:.6g})"
                    )
    # Arcs are pairwise disjoint; within one path only endpoint contact.
    flat = []
    for m, path in enumerate(zeta.arcs):
        for t, piece in enumerate(path):
            flat.append((m, t, piece))
    for a in range(len(flat)):
        for b in range(a + 1, len(flat)):
            m1, t1, p1 = flat[a]
            m2, t2, p2 = flat[b]
            adjacent = m1 == m2 and abs(t1 - t2) == 1
            hits = piece_intersections(p1, p2)
            if adjacent:
                shared = p1.end if t2 == t1 + 1 else p1.start
                hits = [z for z in hits if abs(z - shared) > 1e-9 * max(1.0, scale)]
            if hits:
                raise DisjointnessError(
                    f"generating arcs {m1} and {m2} intersect near {hits[0]:.6g}"
                )


def _route(p: complex, q: complex, obstacles, depth: int = 0, side_flip: bool = False) -> list:
    """Taut-string routing of a segment around inflated disks.

    ``side_flip`` swaps the wrap-side preference at the top call only; the
    default tries the shorter detour first.
    """
    if depth > 12:
        raise DisjointnessError("routing recursion exceeded; supply custom arcs")
    worst = None
    worst_pen = 0.0
    for circ in obstacles:
        d = _point_segment_distance(circ.center, p, q)
        pen = circ.radius - d
        # Grazing contacts are ignored: the inflation margin keeps the
        # path clear of the real disks, and wrapping a barely-touched
        # circle would emit micro arcs that poison deep refinements.
        if pen > max(worst_pen, 1e-3 * circ.radius):
            worst_pen = pen
            worst = circ
    if worst is None:
        return [segment(p, q)]
    c, big_r = worst.center, worst.radius
    dp, dq = abs(p - c), abs(q - c)
    if dp <= big_r or dq <= big_r:
        raise DisjointnessError("route endpoint inside an inflated obstacle")
    ap, aq = _angle(p - c), _angle(q - c)
    bp, bq = math.acos(big_r / dp), math.acos(big_r / dq)
    candidates = []
    for side in (1.0, -1.0):
        tp = ap + side * bp
        tq = aq - side * bq
        t1 = c + big_r * complex(math.cos(tp), math.sin(tp))
        t2 = c + big_r * complex(math.cos(tq), math.sin(tq))
        around = arc_between(c, big_r, tp, tq, ccw=side > 0)
        length = abs(t1 - p) + around.length + abs(q - t2)
        candidates.append((length, side, t1, t2, around))
    candidates.sort(key=lambda item: item[0])
    if side_flip and depth == 0:
        candidates.reverse()
    last_error = None
    for _, _, t1, t2, around in candidates:
        try:
            head = _route(p, t1, [o for o in obstacles if o is not worst], depth + 1)
            tail = _route(t2, q, [o for o in obstacles if o is not worst], depth + 1)
            return head + [around] + tail
        except DisjointnessError as err:
            last_error = err
    raise last_error


def _boundary_pullback(gen: MoebiusMap, source: Circle, target: Circle, phi: float) -> float:
    """Source angle whose generator image sits at angle ``phi`` on the
    target circle (dense sampling of the boundary circle homeomorphism)."""
    want = target.point_at(phi)
    thetas = np.linspace(0.0, _TWO_PI, 1024, endpoint=False)
    pts = source.center + source.radius * np.exp(1j * thetas)
    # Vectorized Moebius evaluation on the boundary.
    images = (gen.a * pts + gen.b) / (gen.c * pts + gen.d)
    return float(thetas[int(np.argmin(np.abs(images - want)))])


def _gate_layouts(group: SchottkyGroup, necklace, pos):
    """Candidate gate-angle assignments for the source circles.

    Gates must satisfy two competing preferences: face the circle's own
    necklace neighbors, and land (after applying the generator) facing the
    target circle's neighbors.  Yield own-facing, pulled-back, and split
    combinations; the caller validates the assembled curve.
    """
    circles = group.pairing.circles
    centers = [c.center for c in circles]
    n = len(circles)
    g = group.rank

    def pref(j: int):
        prev_c = centers[necklace[(pos[j] - 1) % n]]
        next_c = centers[necklace[(pos[j] + 1) % n]]
        a_in = _angle(prev_c - centers[j])
        a_out = _angle(next_c - centers[j])
        if abs((a_in - a_out + math.pi) % _TWO_PI - math.pi) < 1e-6:
            a_in = a_out + math.pi
        return a_in, a_out

    own = [pref(i) for i in range(g)]
    pulled = []
    for i in range(g):
        t_in, t_out = pref(i + g)
        pulled.append(
            (
                _boundary_pullback(group.generators[i], circles[i], circles[i + g], t_in),
                _boundary_pullback(group.generators[i], circles[i], circles[i + g], t_out),
            )
        )

    def circular_mean(a: float, b: float) -> float:
        z = complex(math.cos(a) + math.cos(b), math.sin(a) + math.sin(b))
        if abs(z) < 1e-9:
            return a
        return _angle(z)

    balanced = [
        (circular_mean(own[i][0], pulled[i][0]), circular_mean(own[i][1], pulled[i][1]))
        for i in range(g)
    ]
    for mode in ("balanced", "own", "pulled", "in_own", "out_own"):
        gates = []
        for i in range(g):
            if mode == "balanced":
                a_in, a_out = balanced[i]
            elif mode == "own":
                a_in, a_out = own[i]
            elif mode == "pulled":
                a_in, a_out = pulled[i]
            elif mode == "in_own":
                a_in, a_out = own[i][0], pulled[i][1]
            else:
                a_in, a_out = pulled[i][0], own[i][1]
            if abs((a_in - a_out + math.pi) % _TWO_PI - math.pi) < 0.35:
                # Nearly coincident gates: spread to antipodes.
                a_in = a_out + math.pi
            gates.append((a_in, a_out))
        yield gates


def default_generating_curve(group: SchottkyGroup) -> GeneratingCurve:
    """Radial-gate necklace: arcs leave and enter circles orthogonally
    (radial stubs) and are routed around the remaining disks.

    Tries a small deterministic family of gate layouts and router side
    choices and returns the first that validates (disjoint arcs, clear of
    all disks); raises DisjointnessError when none does.
    """
    if group.pairing is None:
        raise NoPairingError("generating curves need a circle pairing")
    circles = group.pairing.circles
    n = len(circles)
    g = group.rank
    centers = [c.center for c in circles]

    min_gap = group.pairing.min_gap()
    min_radius = min(c.radius for c in circles)
    delta = min(0.3 * min_gap, 0.5 * min_radius)
    inflated = [Circle(c.center, c.radius + 0.5 * delta) for c in circles]

    last_error: Exception | None = None
    for necklace in _necklace_candidates(centers):
        pos = {j: m for m, j in enumerate(necklace)}
        for gates in _gate_layouts(group, necklace, pos):
            gates_in = [0j] * n
            gates_out = [0j] * n
            for i in range(g):
                a_in, a_out = gates[i]
                gates_in[i] = circles[i].point_at(a_in)
                gates_out[i] = circles[i].point_at(a_out)
            for i in range(g):
                gen = group.generators[i]
                gates_in[i + g] = gen(gates_in[i])
                gates_out[i + g] = gen(gates_out[i])
            for mask in range(2 ** n):
                try:
                    arcs = []
                    for m in range(n):
                        j = necklace[m]
                        k = necklace[(m + 1) % n]
                        start = gates_out[j]
                        end = gates_in[k]
                        tip_s = start + delta * (start - centers[j]) / abs(start - centers[j])
                        tip_e = end + delta * (end - centers[k]) / abs(end - centers[k])
                        path = [segment(start, tip_s)]
                        path += _route(tip_s, tip_e, inflated, side_flip=bool(mask >> m & 1))
                        path.append(segment(tip_e, end))
                        arcs.append(tuple(_clean_path(path)))
                    zeta = GeneratingCurve(
                        necklace, tuple(gates_in), tuple(gates_out), tuple(arcs)
                    )
                    _validate_generating_curve(group, zeta)
                    return zeta
                except DisjointnessError as err:
                    last_error = err
    raise DisjointnessError(
        f"no disjoint default arcs found; supply custom arcs ({last_error})"
    )


def _clean_path(path) -> list:
    """Drop micro pieces, welding the gap onto an adjacent segment."""
    scale = max(1.0, max(abs(p.start) for p in path))
    out = list(path)
    changed = True
    while changed:
        changed = False
        for i, piece in enumerate(out):
            if piece.length >= 1e-9 * scale or len(out) <= 1:
                continue
            nxt = out[i + 1] if i + 1 < len(out) else None
            prv = out[i - 1] if i > 0 else None
            if nxt is not None and nxt.kind == SEG:
                out[i + 1] = segment(piece.start, nxt.end)
            elif prv is not None and prv.kind == SEG:
                out[i - 1] = segment(prv.start, piece.end)
            else:
                continue
            del out[i]
            changed = True
            break
    return out


def _necklace_candidates(centers):
    """Cyclic visiting orders to try: angular around the centroid, linear
    along the principal axis, and a greedy nearest-neighbor tour."""
    n = len(centers)
    centroid = sum(centers) / n
    yield tuple(
        sorted(
            range(n),
            key=lambda j: (_angle(centers[j] - centroid), abs(centers[j] - centroid)),
        )
    )
    rel = np.array([c - centroid for c in centers])
    cov = np.array(
        [
            [np.sum(rel.real**2), np.sum(rel.real * rel.imag)],
            [np.sum(rel.real * rel.imag), np.sum(rel.imag**2)],
        ]
    )
    _, vecs = np.linalg.eigh(cov)
    axis = complex(vecs[0, 1], vecs[1, 1])  # dominant direction
    proj = [(centers[j] * axis.conjugate()).real for j in range(n)]
    yield tuple(sorted(range(n), key=lambda j: (proj[j], j)))
    tour = [0]
    remaining = set(range(1, n))
    while remaining:
        cur = tour[-1]
        nxt = min(remaining, key=lambda j: (abs(centers[j] - centers[cur]), j))
        tour.append(nxt)
        remaining.remove(nxt)
    yield tuple(tour)


# --- truncated quasi-circle -------------------------------------------------


def build_quasicircle(group: SchottkyGroup, zeta: GeneratingCurve, depth: int) -> PolyCurve:
    """Ordered concatenation of the word images of the necklace arcs,
    closed through the deepest disks by straight chords.

    Each disk traversal is the reversed image of the outside loop under
    the letter mapping into that disk; chords stand in for the portion of
    the limit set below the truncation depth.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    necklace = zeta.necklace
    n = len(necklace)
    pos = {j: m for m, j in enumerate(necklace)}
    letters = group.letters
    g = group.rank
    counts = {"arc_images": 0, "chords": 0}

    def disk_path(j: int, d: int, w: MoebiusMap | None) -> list:
        """Pieces from w(IN[j]) to w(OUT[j]) through disk w(D_j)."""
        gate_in = zeta.gates_in[j] if w is None else w(zeta.gates_in[j])
        gate_out = zeta.gates_out[j] if w is None else w(zeta.gates_out[j])
        if d == 0:
            counts["chords"] += 1
            return [segment(gate_in, gate_out)]
        into = (j + g) % (2 * g)  # letter whose map lands inside D_j
        new_w = letters[into] if w is None else w @ letters[into]
        sub = []
        start_pos = pos[into]
        for t in range(n):
            arc_idx = (start_pos + t) % n
            counts["arc_images"] += 1
            for p in zeta.arcs[arc_idx]:
                image = map_piece(new_w, p)
                # Sub-resolution images collapse to their endpoints.
                if image.length > 1e-14 * max(1.0, abs(image.start)):
                    sub.append(image)
            if t < n - 1:
                sub.extend(disk_path(necklace[(arc_idx + 1) % n], d - 1, new_w))
        return _reverse_pieces(sub)

    pieces = []
    for m in range(n):
        counts["arc_images"] += 1
        pieces.extend(zeta.arcs[m])
        pieces.extend(disk_path(necklace[(m + 1) % n], depth, None))
    words = sum(count_reduced_words(g, k) for k in range(depth + 1))
    stats = BuildStats(
        depth=depth,
        arc_images=counts["arc_images"],
        chords=counts["chords"],
        words=words,
    )
    return PolyCurve(tuple(pieces), build_stats=stats)


@dataclass(frozen=True)
class LengthEstimate:
    series_estimate: float
    direct_length: float

    @property
    def ratio(self) -> float:
        return self.direct_length / self.series_estimate


def quasicircle_length_estimate(
    group: SchottkyGroup, zeta: GeneratingCurve, depth: int, s: float = 1.0
) -> LengthEstimate:
    """Series bound length(zeta) * (1 + sum exp(-s d)) next to the measured
    length of the truncated curve."""
    from .dimension import poincare_partial_sum

    series = zeta.total_length * (1.0 + poincare_partial_sum(group, s, depth).partial_sum)
    direct = build_quasicircle(group, zeta, depth).length
    return LengthEstimate(series_estimate=series, direct_length=direct)


# --- exact piece intersections ----------------------------------------------


def _point_segment_distance(z: complex, a: complex, b: complex) -> float:
    u = b - a
    denom = abs(u) ** 2
    if denom < 1e-300:
        return abs(z - a)
    t = ((z - a).real * u.real + (z - a).imag * u.imag) / denom
    t = min(1.0, max(0.0, t))
    return abs(z - (a + t * u))


def _piece_distance_to_point(piece: Piece, z: complex) -> float:
    if piece.kind == SEG:
        return _point_segment_distance(z, piece.start, piece.end)
    if piece.contains_angle(_angle(z - piece.center)):
        return abs(abs(z - piece.center) - piece.radius)
    return min(abs(z - piece.start), abs(z - piece.end))


def _seg_seg(p1: Piece, p2: Piece, eps: float) -> list:
    a, b = p1.start, p1.end
    c, d = p2.start, p2.end
    u, v = b - a, d - c
    den = u.real * v.imag - u.imag * v.real
    w = c - a
    if abs(den) > eps * max(abs(u), 1e-300) * max(abs(v), 1e-300):
        t = (w.real * v.imag - w.imag * v.real) / den
        s = (w.real * u.imag - w.imag * u.real) / den
        tol = eps / max(abs(u), abs(v), 1e-300)
        if -tol <= t <= 1 + tol and -tol <= s <= 1 + tol:
            return [a + t * u]
        return []
    # Parallel: overlap only when collinear.
    if abs(w.real * u.imag - w.imag * u.real) > eps * max(abs(u), 1e-300):
        return []
    proj = lambda z: ((z - a).real * u.real + (z - a).imag * u.imag) / max(abs(u) ** 2, 1e-300)
    t0, t1 = sorted((proj(c), proj(d)))
    lo, hi = max(0.0, t0), min(1.0, t1)
    if lo > hi + eps:
        return []
    return [a + lo * u] if abs(lo - hi) < 1e-15 else [a + lo * u, a + hi * u]


def _seg_circle_params(a: complex, b: complex, center: complex, radius: float):
    u = b - a
    w = a - center
    qa = abs(u) ** 2
    qb = 2.0 * (w.real * u.real + w.imag * u.imag)
    qc = abs(w) ** 2 - radius * radius
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0 or qa < 1e-300:
        return []
    root = math.sqrt(max(0.0, disc))
    return [(-qb - root) / (2 * qa), (-qb + root) / (2 * qa)]


def _seg_arc(seg_p: Piece, arc_p: Piece, eps: float) -> list:
    out = []
    tol = eps / max(abs(seg_p.end - seg_p.start), 1e-300)
    for t in _seg_circle_params(seg_p.start, seg_p.end, arc_p.center, arc_p.radius):
        if -tol <= t <= 1 + tol:
            z = seg_p.start + t * (seg_p.end - seg_p.start)
            ang_slack = eps / max(arc_p.radius, 1e-300)
            if arc_p.contains_angle(_angle(z - arc_p.center), slack=ang_slack):
                out.append(z)
    return out


def _arc_arc(p1: Piece, p2: Piece, eps: float) -> list:
    c1, r1 = p1.center, p1.radius
    c2, r2 = p2.center, p2.radius
    d = abs(c2 - c1)
    same_circle = d < eps and abs(r1 - r2) < eps
    if same_circle:
        out = []
        for z in (p2.start, p2.end, p2.midpoint):
            if p1.contains_angle(_angle(z - c1), slack=eps / max(r1, 1e-300)):
                out.append(z)
        for z in (p1.start, p1.end, p1.midpoint):
            if p2.contains_angle(_angle(z - c2), slack=eps / max(r2, 1e-300)):
                out.append(z)
        return out
    if d > r1 + r2 + eps or d < abs(r1 - r2) - eps:
        return []
    # Radical-line intersection of the two full circles.
    x = (d * d - r2 * r2 + r1 * r1) / (2 * d)
    h2 = r1 * r1 - x * x
    h = math.sqrt(max(0.0, h2))
    base = c1 + x * (c2 - c1) / d
    off = 1j * (c2 - c1) / d * h
    out = []
    for z in {base + off, base - off}:
        s1 = eps / max(r1, 1e-300)
        s2 = eps / max(r2, 1e-300)
        if p1.contains_angle(_angle(z - c1), slack=s1) and p2.contains_angle(
            _angle(z - c2), slack=s2
        ):
            out.append(z)
    return out


def piece_intersections(p1: Piece, p2: Piece, eps: float = 1e-12) -> list:
    if p1.kind == SEG and p2.kind == SEG:
        return _seg_seg(p1, p2, eps)
    if p1.kind == SEG:
        return _seg_arc(p1, p2, eps)
    if p2.kind == SEG:
        return _seg_arc(p2, p1, eps)
    return _arc_arc(p1, p2, eps)


def is_simple(curve: PolyCurve) -> bool:
    """No two non-adjacent pieces meet; adjacent ones only at the shared
    endpoint.  Bounding-box sweep prefilter, exact narrow phase.

    Pieces shorter than 1e-10 of the curve scale sit below double-precision
    certification resolution and are treated as points.
    """
    pieces = curve.pieces
    n = len(pieces)
    scale = max(1.0, max(abs(p.start) + abs(p.end) for p in pieces))
    eps = 1e-12 * scale
    resolution = 1e-10 * scale
    boxes = np.array([p.bbox() for p in pieces])
    pad = eps
    ii, jj = _kernels.bbox_pairs(
        boxes[:, 0] - pad, boxes[:, 1] - pad, boxes[:, 2] + pad, boxes[:, 3] + pad
    )
    lengths = np.array([p.length for p in pieces])
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    total = cum[-1]
    for i, j in zip(ii, jj):
        i, j = int(i), int(j)
        if min(lengths[i], lengths[j]) < resolution:
            continue
        # Effectively adjacent when only sub-resolution material separates
        # the two pieces along the chain (either way around).
        between_fwd = cum[j] - cum[i + 1]
        between_bwd = total - lengths[i] - lengths[j] - between_fwd
        shared = None
        if j - i == 1 or between_fwd < resolution:
            shared = pieces[i].end
        elif (i == 0 and j == n - 1) or between_bwd < resolution:
            shared = pieces[j].end
        hits = piece_intersections(pieces[i], pieces[j], eps)
        if not hits:
            continue
        if shared is not None:
            slack = max(1e-9 * scale, 2.0 * resolution)
            if any(abs(z - shared) > slack for z in hits):
                return False
        else:
            return False
    return True


# --- invariance and classification ------------------------------------------


def point_curve_distances(points, curve: PolyCurve) -> np.ndarray:
    """Distance from each query point to the curve (min over pieces)."""
    pts = np.asarray(points, dtype=np.complex128)
    segs = [p for p in curve.pieces if p.kind == SEG]
    arcs = [p for p in curve.pieces if p.kind == ARC]
    best = np.full(len(pts), np.inf)
    chunk = 64
    if segs:
        a = np.array([p.start for p in segs])
        u = np.array([p.end - p.start for p in segs])
        uu = np.maximum(np.abs(u) ** 2, 1e-300)
        for k0 in range(0, len(pts), chunk):
            q = pts[k0 : k0 + chunk, None]
            t = ((q - a).real * u.real + (q - a).imag * u.imag) / uu
            t = np.clip(t, 0.0, 1.0)
            d = np.abs(q - (a + t * u)).min(axis=1)
            best[k0 : k0 + chunk] = np.minimum(best[k0 : k0 + chunk], d)
    if arcs:
        c = np.array([p.center for p in arcs])
        r = np.array([p.radius for p in arcs])
        a0 = np.array([_angle(p.start - p.center) for p in arcs])
        sweep = np.array([p.sweep for p in arcs])
        ccw = np.array([1.0 if p.ccw else -1.0 for p in arcs])
        ends = np.array([[p.start, p.end] for p in arcs])
        for k0 in range(0, len(pts), chunk):
            q = pts[k0 : k0 + chunk, None]
            rel = q - c
            theta = np.arctan2(rel.imag, rel.real)
            off = np.mod((theta - a0) * ccw, _TWO_PI)
            on_arc = off <= sweep
            d_radial = np.abs(np.abs(rel) - r)
            d_ends = np.abs(q[:, :, None] - ends).min(axis=2)
            d = np.where(on_arc, d_radial, d_ends).min(axis=1)
            best[k0 : k0 + chunk] = np.minimum(best[k0 : k0 + chunk], d)
    return best


def is_invariant(group: SchottkyGroup, curve: PolyCurve, tol: float, samples: int = 256) -> bool:
    """One-sided invariance: generator images of curve samples stay within
    ``tol`` of the curve, and depth-4 limit samples lie within ``tol``.

    Limit points are sampled as attracting fixed points of depth-4 words
    (exact limit points, unlike disk centers whose accuracy is only the
    depth-4 cover radius).
    """
    from .schottky import sample_limit_set

    pts = curve.sample(samples)
    for gen in group.generators:
        images = np.array([gen(z) for z in pts])
        if point_curve_distances(images, curve).max() > tol:
            return False
    bare = SchottkyGroup(group.generators)
    limit = np.array(sample_limit_set(bare, 4))
    return bool(point_curve_distances(limit, curve).max() <= tol)


@dataclass(frozen=True)
class QuasicircleFlags:
    linear: bool
    right_angled: bool
    transverse: bool
    parallel: bool


def classify_quasicircle(
    group: SchottkyGroup, curve: PolyCurve, pairing=None
) -> QuasicircleFlags:
    """Geometric flags relative to the pairing circles.

    linear: the representation is exact pieces (false only for curves
    marked as approximations of a non-linear source).  right_angled: all
    joints meet at right angles.  transverse: every crossing of a pairing
    circle is orthogonal and no piece runs along one.  parallel: some
    piece lies on a pairing circle.
    """
    pairing = pairing if pairing is not None else group.pairing
    if pairing is None:
        raise NoPairingError("classification needs pairing circles")
    circles = pairing.circles
    scale = max(abs(c.center) + c.radius for c in circles)

    linear = not curve.approximated

    right_angled = True
    pieces = curve.pieces
    for cur, nxt in zip(pieces, pieces[1:] + pieces[:1]):
        t1 = cur.tangent_at_end()
        t2 = nxt.tangent_at_start()
        dot = t1.real * t2.real + t1.imag * t2.imag
        if abs(dot) > 1e-6:
            right_angled = False
            break

    parallel = False
    for piece in pieces:
        if piece.kind != ARC:
            continue
        for circ in circles:
            if (
                abs(piece.center - circ.center) < 1e-9 * max(1.0, scale)
                and abs(piece.radius - circ.radius) < 1e-9 * max(1.0, scale)
            ):
                parallel = True
                break
        if parallel:
            break

    transverse = not parallel
    if transverse:
        for circ in circles:
            ring = Piece(ARC, circ.point_at(0.0), circ.point_at(0.0), circ.center, circ.radius, True)
            for piece in pieces:
                for z in piece_intersections(piece, ring, eps=1e-9 * max(1.0, scale)):
                    tangent_circle = 1j * (z - circ.center)
                    tangent_circle /= abs(tangent_circle)
                    t = piece._tangent(z)
                    dot = t.real * tangent_circle.real + t.imag * tangent_circle.imag
                    if abs(dot) > 1e-6:
                        transverse = False
                        break
                if not transverse:
                    break
            if not transverse:
                break

    return QuasicircleFlags(linear, right_angled, transverse, parallel)


# --- Frechet metric ----------------------------------------------------------


def frechet_distance(
    c1: PolyCurve,
    c2: PolyCurve,
    resolution: float | None = None,
    include_length_term: bool = True,
) -> float:
    """The paper's metric: discrete Frechet distance over cyclic start
    rotations plus |len1 - len2|.  ``include_length_term=False`` gives the
    classical variant for cross-checks.
    """
    l1, l2 = c1.length, c2.length
    delta = resolution if resolution is not None else max(l1, l2) / 256.0

    def samples(curve):
        if len(curve.pieces) <= 1024:
            pts = curve.sample_by_pieces(delta)
            if len(pts) <= 4096:
                return pts
        return curve.sample(1024)

    p = samples(c1)
    q = samples(c2)
    # Rotate the curve with fewer samples (quadratic cost at desk scale).
    if len(q) > len(p):
        p, q = q, p
    base = _cyclic_dfd(p, q)
    return base + (abs(l1 - l2) if include_length_term else 0.0)


def _cyclic_dfd(p: np.ndarray, q: np.ndarray) -> float:
    """Min over start rotations of q, with lower-bound pruning."""
    m = len(q)
    d0 = np.abs(p[0] - q)
    order = np.argsort(d0, kind="stable")
    best = math.inf
    p_closed = np.concatenate([p, p[:1]])
    for r in order:
        if d0[r] >= best:
            break
        q_rot = np.roll(q, -int(r))
        q_closed = np.concatenate([q_rot, q_rot[:1]])
        value = _kernels.dfd(p_closed, q_closed, best)
        if value < best:
            best = value
    return float(best)


# --- CSV interchange ---------------------------------------------------------


def curve_to_csv_rows(curve: PolyCurve) -> list:
    """Rows "piece_index,tag,x0,y0,x1,y1[,cx,cy,r]"; arc radius is signed
    (positive ccw, negative cw)."""
    rows = []
    for idx, piece in enumerate(curve.pieces):
        row = [
            str(idx),
            piece.kind,
            repr(piece.start.real),
            repr(piece.start.imag),
            repr(piece.end.real),
            repr(piece.end.imag),
        ]
        if piece.kind == ARC:
            row += [
                repr(piece.center.real),
                repr(piece.center.imag),
                repr(piece.radius if piece.ccw else -piece.radius),
            ]
        rows.append(",".join(row))
    return rows


def curve_from_csv_rows(rows) -> PolyCurve:
    pieces = []
    for row in rows:
        parts = row.strip().split(",")
        if not parts or parts[0].startswith("#") or parts[0] == "piece_index":
            continue
        tag = parts[1]
        start = complex(float(parts[2]), float(parts[3]))
        end = complex(float(parts[4]), float(parts[5]))
        if tag == SEG:
            pieces.append(segment(start, end))
        else:
            center = complex(float(parts[6]), float(parts[7]))
            radius = float(parts[8])
            pieces.append(Piece(ARC, start, end, center, abs(radius), ccw=radius >= 0))
    return PolyCurve(tuple(pieces))

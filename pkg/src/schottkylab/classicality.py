"""Classical fundamental domains: verification, search, singularities,
and the dimension-non-increasing deformation flow.
"""

from __future__ import annotations

import heapq
import itertools
import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .errors import (
    DisjointnessViolation,
    InconsistentSequence,
    NonLoxodromicError,
    OrientationViolation,
    PairingViolation,
)
from .moebius import (
    INFINITY,
    LOXODROMIC_TAG,
    MoebiusMap,
    from_fixed_points_multiplier,
    is_infinity,
    projectively_equal,
)
from .schottky import Circle, CirclePairing, DegeneratePoint, map_circle

PAIRING_CENTER_TOL = 1e-8
PAIRING_RADIUS_RELTOL = 1e-8
SINGULARITY_RELTOL = 1e-6

KIND_NONE = "None"
KIND_TANGENCY = "Tangency"
KIND_DEGENERATION = "Degeneration"
KIND_COLLAPSING = "Collapsing"


@dataclass(frozen=True)
class ClassicalCertificate:
    """A verified classical generating set with its paired circles."""

    generators: tuple
    pairing: CirclePairing
    margin: float
    witness_words: tuple | None = None
    expansions: int = 0

    def to_json(self):
        doc = {
            "generators": [g.to_json() for g in self.generators],
            "circles": [c.to_json() for c in self.pairing.circles],
            "margin": self.margin,
            "expansions": self.expansions,
        }
        if self.witness_words is not None:
            doc["witness_words"] = [list(w) for w in self.witness_words]
        return doc


@dataclass(frozen=True)
class FailureReport:
    """Search ran out of budget; says nothing about non-classicality."""

    best_cost: float
    expansions: int
    budget: int

    def to_json(self):
        return {
            "status": "budget exhausted",
            "best_cost": self.best_cost,
            "expansions": self.expansions,
            "budget": self.budget,
        }


@dataclass(frozen=True)
class SingularityReport:
    kind: str
    indices: tuple = ()
    witness_point: complex | None = None
    witness_circle: Circle | None = None
    onset_step: int | None = None

    def to_json(self):
        doc = {"kind": self.kind, "indices": list(self.indices)}
        if self.witness_point is not None:
            doc["point"] = [self.witness_point.real, self.witness_point.imag]
        if self.witness_circle is not None:
            doc["circle"] = self.witness_circle.to_json()
        if self.onset_step is not None:
            doc["onset_step"] = self.onset_step
        return doc


def verify_classical_domain(generators, pairing: CirclePairing) -> ClassicalCertificate:
    """Check disjointness, circle pairing, and orientation; certify or raise."""
    circles = pairing.circles
    g = len(generators)
    if len(circles) != 2 * g:
        raise ValueError("pairing must hold 2g circles")
    margin = np.inf
    for i, j in itertools.combinations(range(2 * g), 2):
        gap = circles[i].gap_to(circles[j])
        if gap <= 0:
            raise DisjointnessViolation(
                f"closed disks {i} and {j} overlap (gap {gap:.6g})", index=(i, j)
            )
        margin = min(margin, gap)
    for i, gen in enumerate(generators):
        image = map_circle(gen, circles[i])
        target = circles[i + g]
        if abs(image.center - target.center) > PAIRING_CENTER_TOL or abs(
            image.radius - target.radius
        ) > PAIRING_RADIUS_RELTOL * target.radius:
            raise PairingViolation(
                f"generator {i} maps circle {i} to center {image.center:.6g} "
                f"radius {image.radius:.6g}, expected circle {i + g}",
                index=i,
            )
        # Exterior -> interior: test the far exterior and a surrounding ring.
        probes = [INFINITY] + [
            circles[i].center + 1.5 * circles[i].radius * np.exp(2j * np.pi * t / 8)
            for t in range(8)
        ]
        for z in probes:
            w = gen(z)
            if is_infinity(w) or not target.contains(w, margin=1e-12):
                raise OrientationViolation(
                    f"generator {i} sends exterior point {z!r} outside disk {i + g}",
                    index=i,
                )
    return ClassicalCertificate(tuple(generators), pairing, float(margin))


def _extrapolate(series) -> float:
    """Limit estimate by two iterated Aitken sweeps (exact for geometric)."""
    seq = [float(x) for x in series]
    for _ in range(2):
        if len(seq) < 3:
            break
        out = []
        for x0, x1, x2 in zip(seq, seq[1:], seq[2:]):
            den = (x2 - x1) - (x1 - x0)
            if abs(den) < 1e-300:
                out.append(x2)
            else:
                out.append(x2 - (x2 - x1) ** 2 / den)
        seq = out
    return seq[-1]


def _entry_series(steps, index):
    centers, radii = [], []
    for step in steps:
        entry = step[index]
        if isinstance(entry, DegeneratePoint):
            centers.append(entry.point)
            radii.append(0.0)
        else:
            centers.append(entry.center)
            radii.append(entry.radius)
    return centers, radii


def _classify_steps(steps) -> SingularityReport:
    n_entries = len(steps[0])
    limits = []
    init_radii = []
    for j in range(n_entries):
        centers, radii = _entry_series(steps, j)
        c_lim = complex(
            _extrapolate([c.real for c in centers]),
            _extrapolate([c.imag for c in centers]),
        )
        limits.append((c_lim, _extrapolate(radii)))
        init_radii.append(radii[0] if radii[0] > 0 else max(radii))
    mean_radius = max(np.mean([r for _, r in limits]), 1e-12)
    # Priority: a vanishing circle also closes gaps, so test degeneration
    # first, then collapse, then tangency.
    for j, (c_lim, r_lim) in enumerate(limits):
        if r_lim < SINGULARITY_RELTOL * max(init_radii[j], 1e-12):
            return SingularityReport(
                KIND_DEGENERATION, indices=(j,), witness_point=c_lim
            )
    for j, k in itertools.combinations(range(n_entries), 2):
        cj, rj = limits[j]
        ck, rk = limits[k]
        if (
            abs(cj - ck) < SINGULARITY_RELTOL * mean_radius
            and abs(rj - rk) < SINGULARITY_RELTOL * mean_radius
        ):
            return SingularityReport(
                KIND_COLLAPSING,
                indices=(j, k),
                witness_circle=Circle(0.5 * (cj + ck), 0.5 * (rj + rk)),
            )
    for j, k in itertools.combinations(range(n_entries), 2):
        cj, rj = limits[j]
        ck, rk = limits[k]
        gap = abs(cj - ck) - rj - rk
        if abs(gap) < SINGULARITY_RELTOL * mean_radius:
            direction = (ck - cj) / abs(ck - cj)
            return SingularityReport(
                KIND_TANGENCY,
                indices=(j, k),
                witness_point=cj + rj * direction,
            )
    return SingularityReport(KIND_NONE)


def classify_domain_sequence(steps) -> SingularityReport:
    """Label the limiting configuration of a domain sequence.

    Each step lists the same number of entries (Circle or DegeneratePoint);
    per-entry trends are extrapolated and tested against the singularity
    taxonomy with priority degeneration > collapsing > tangency.
    """
    steps = list(steps)
    if len(steps) < 3:
        raise ValueError("need at least three steps to extrapolate")
    n_entries = len(steps[0])
    for t, step in enumerate(steps):
        if len(step) != n_entries:
            raise InconsistentSequence(
                f"step {t} has {len(step)} entries, expected {n_entries}"
            )
    report = _classify_steps(steps)
    if report.kind == KIND_NONE:
        return report
    onset = len(steps)
    for t in range(3, len(steps) + 1):
        if _classify_steps(steps[:t]).kind == report.kind:
            onset = t - 1
            break
    return SingularityReport(
        report.kind,
        indices=report.indices,
        witness_point=report.witness_point,
        witness_circle=report.witness_circle,
        onset_step=onset,
    )


# --- Nielsen search -------------------------------------------------------


def _free_reduce(word):
    out = []
    for letter in word:
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def _invert_word(word):
    return tuple(-letter for letter in reversed(word))


def _canonical_key(gens) -> tuple:
    """Hashable key identifying a generating tuple up to matrix sign."""
    key = []
    for gen in gens:
        entries = (gen.a, gen.b, gen.c, gen.d)
        sign = 1.0
        for z in entries:
            if abs(z) > 1e-8:
                if z.real < -1e-12 or (abs(z.real) <= 1e-12 and z.imag < 0):
                    sign = -1.0
                break
        key.append(
            tuple((round(sign * z.real, 6), round(sign * z.imag, 6)) for z in entries)
        )
    return tuple(key)


def _isometric_pairing(gens):
    """Candidate circles (I(h_i) then I(h_i^-1)) or None when some c ~ 0."""
    circles = []
    for gen in gens:
        if abs(gen.c) < 1e-9:
            return None
        circles.append(Circle(-gen.d / gen.c, 1.0 / abs(gen.c)))
    for gen in gens:
        inv = gen.inverse()
        circles.append(Circle(-inv.d / inv.c, 1.0 / abs(inv.c)))
    return CirclePairing(tuple(circles))


def _overlap_cost(pairing: CirclePairing | None) -> float:
    if pairing is None:
        return np.inf
    cost = 0.0
    circles = pairing.circles
    for i, j in itertools.combinations(range(len(circles)), 2):
        cost += max(0.0, -circles[i].gap_to(circles[j]))
    return cost


def _nielsen_children(gens, words):
    """All elementary Nielsen moves of a generating tuple."""
    g = len(gens)
    children = []
    for i in range(g):
        new = list(gens)
        new_w = list(words)
        new[i] = gens[i].inverse()
        new_w[i] = _invert_word(words[i])
        children.append((tuple(new), tuple(new_w)))
    for i in range(g):
        for j in range(g):
            if i == j:
                continue
            for inverted in (False, True):
                other = gens[j].inverse() if inverted else gens[j]
                other_w = _invert_word(words[j]) if inverted else words[j]
                for left in (False, True):
                    new = list(gens)
                    new_w = list(words)
                    if left:
                        new[i] = other @ gens[i]
                        new_w[i] = _free_reduce(other_w + words[i])
                    else:
                        new[i] = gens[i] @ other
                        new_w[i] = _free_reduce(words[i] + other_w)
                    children.append((tuple(new), tuple(new_w)))
    for i in range(g):
        for j in range(i + 1, g):
            new = list(gens)
            new_w = list(words)
            new[i], new[j] = new[j], new[i]
            new_w[i], new_w[j] = new_w[j], new_w[i]
            children.append((tuple(new), tuple(new_w)))
    return children


def _source_disk_circles(gens, params):
    """Pairing circles from one source circle per generator; the target is
    the generator image.  None when any source disk is infeasible (must
    contain the repelling point and the generator's pole, exclude the
    attracting point)."""
    from .schottky import map_circle

    sources, targets = [], []
    for gen, (cx, cy, log_r) in zip(gens, params):
        radius = 10.0 ** float(log_r)
        if not np.isfinite(radius) or radius <= 0:
            return None
        src = Circle(complex(cx, cy), radius)
        if abs(gen.c) < 1e-12:
            return None
        pole = -gen.d / gen.c
        p, q = gen.fixed_points()
        if is_infinity(p) or is_infinity(q):
            return None
        if (
            abs(q - src.center) >= src.radius
            or abs(pole - src.center) >= src.radius
            or abs(p - src.center) <= src.radius
        ):
            return None
        try:
            targets.append(map_circle(gen, src))
        except Exception:
            return None
        sources.append(src)
    return tuple(sources) + tuple(targets)


def _source_disk_cost(gens, flat) -> float:
    g = len(gens)
    params = [flat[3 * i : 3 * i + 3] for i in range(g)]
    circles = _source_disk_circles(gens, params)
    if circles is None:
        return 10.0
    return sum(
        max(0.0, -a.gap_to(b)) for a, b in itertools.combinations(circles, 2)
    )


def _balanced_init(gens):
    """Axis-pencil circle per generator at the balanced model radius
    1/sqrt|multiplier| (source and target equally sized)."""
    from .schottky import map_circle

    out = []
    for gen in gens:
        p, q = gen.fixed_points()
        if is_infinity(p) or is_infinity(q):
            return None
        kappa = abs(gen.multiplier())
        try:
            conj = MoebiusMap.from_entries(p, q, 1, 1)
            circ = map_circle(conj, Circle(0, 1.0 / np.sqrt(kappa)))
        except Exception:
            return None
        out += [circ.center.real, circ.center.imag, np.log10(circ.radius)]
    return np.asarray(out)


def _general_domain_attempt(gens, maxfev: int = 2000):
    """Optimize one source disk per generator (center and radius) to zero
    total overlap; verify and return the pairing on success."""
    x0 = _balanced_init(gens)
    if x0 is None:
        return None
    fun = lambda x: _source_disk_cost(gens, x)
    best_x, best_c = x0, fun(x0)
    if best_c > 0.0:
        if best_c > 6.0:
            return None
        res = scipy.optimize.minimize(
            fun, x0, method="Nelder-Mead",
            options={"maxfev": maxfev, "xatol": 1e-10, "fatol": 1e-14},
        )
        if res.fun < best_c:
            best_x, best_c = res.x, res.fun
    if best_c != 0.0:
        return None
    g = len(gens)
    circles = _source_disk_circles(gens, [best_x[3 * i : 3 * i + 3] for i in range(g)])
    if circles is None:
        return None
    pairing = CirclePairing(circles)
    try:
        cert = verify_classical_domain(gens, pairing)
    except (DisjointnessViolation, PairingViolation, OrientationViolation):
        return None
    return pairing, cert.margin


def search_classical_generators(group, budget: int):
    """Nielsen search for a generating set carrying a classical domain.

    Per node, candidate domains come from the isometric circles and, when
    those overlap, from an optimized source disk per generator (center and
    radius free, target = generator image).  Nodes are expanded
    alternating best-first (total overlap cost) with breadth-first, so a
    boundedly-scrambled generating set is always reached within budget.
    Budget-bounded because the existence theorem gives no effective bound.
    """
    for i, gen in enumerate(group.generators):
        if gen.classify() != LOXODROMIC_TAG:
            raise NonLoxodromicError(f"generator {i} is {gen.classify()}")
    start = tuple(group.generators)
    # Witness words use signed 1-based letters internally; exported words
    # use the package's 0-based letter convention.
    start_words = tuple((i + 1,) for i in range(len(start)))
    counter = itertools.count()
    root_cost = _overlap_cost(_isometric_pairing(start))
    heap = [(root_cost, next(counter), start, start_words)]
    fifo = deque([(start, start_words)])
    seen = {_canonical_key(start)}
    expanded = set()
    best_cost = root_cost
    expansions = 0

    def certify(gens, words):
        # Node matrices accumulate cancellation error along long move
        # paths; certificates are built from the canonical left-to-right
        # evaluation of the witness words instead.
        clean = tuple(
            evaluate_witness_word(group, _signed_to_letters(w, len(gens)))
            for w in words
        )
        if any(m.classify() != LOXODROMIC_TAG for m in clean):
            return None
        pairing = _isometric_pairing(clean)
        if pairing is not None and _overlap_cost(pairing) == 0.0:
            try:
                cert = verify_classical_domain(clean, pairing)
            except (DisjointnessViolation, PairingViolation, OrientationViolation):
                cert = None
            if cert is not None:
                return clean, pairing, cert.margin
        # The expensive attempt runs on early nodes and periodically after.
        if expansions <= 256 or expansions % 16 == 0:
            found = _general_domain_attempt(clean)
            if found is not None:
                return clean, found[0], found[1]
        return None

    while (heap or fifo) and expansions < budget:
        if expansions % 2 == 0 and heap:
            cost, _, gens, words = heapq.heappop(heap)
        elif fifo:
            gens, words = fifo.popleft()
            cost = _overlap_cost(_isometric_pairing(gens))
        else:
            continue
        key = _canonical_key(gens)
        if key in expanded:
            continue
        expanded.add(key)
        expansions += 1
        if np.isfinite(cost):
            best_cost = min(best_cost, cost)
        found = certify(gens, words)
        if found is not None:
            clean_gens, pairing, margin = found
            return ClassicalCertificate(
                clean_gens,
                pairing,
                margin,
                witness_words=tuple(_signed_to_letters(w, len(gens)) for w in words),
                expansions=expansions,
            )
        for child, child_words in _nielsen_children(gens, words):
            # Entry growth caps the effective word length; beyond it the
            # candidate circles are sub-resolution anyway.
            if any(
                max(abs(m.a), abs(m.b), abs(m.c), abs(m.d)) > 1e8 for m in child
            ):
                continue
            child_key = _canonical_key(child)
            if child_key in seen:
                continue
            seen.add(child_key)
            child_cost = _overlap_cost(_isometric_pairing(child))
            if np.isfinite(child_cost):
                heapq.heappush(heap, (child_cost, next(counter), child, child_words))
            fifo.append((child, child_words))
    return FailureReport(best_cost=float(best_cost), expansions=expansions, budget=budget)


def _signed_to_letters(word, g: int) -> tuple:
    """Signed 1-based word -> 0-based letter tuple (inverse of i is i+g)."""
    return tuple(l - 1 if l > 0 else (-l - 1) + g for l in word)


def evaluate_witness_word(group, word) -> MoebiusMap:
    """Re-evaluate a 0-based witness word in the original generators."""
    out = MoebiusMap.identity()
    for letter in word:
        out = out @ group.letters[letter]
    return out


def _projective_unit(m: MoebiusMap):
    """Entries normalized to unit Frobenius norm with a canonical phase,
    removing the full scalar ambiguity of unnormalized representatives."""
    v = np.array([m.a, m.b, m.c, m.d], dtype=np.complex128)
    v /= np.linalg.norm(v)
    pivot = v[int(np.argmax(np.abs(v)))]
    v *= pivot.conjugate() / abs(pivot)
    return v


def check_witness_words(original, certificate: ClassicalCertificate) -> bool:
    """Each certified generator equals its witness word as a projective
    map (scalar-invariant comparison, tolerance 1e-8)."""
    if certificate.witness_words is None:
        return False
    for w, gen in zip(certificate.witness_words, certificate.generators):
        ev = evaluate_witness_word(original, w)
        if np.abs(_projective_unit(ev) - _projective_unit(gen)).max() > 1e-8:
            return False
    return True


# --- Deformation flow ------------------------------------------------------


def _inflate(gen: MoebiusMap, factor: float) -> MoebiusMap:
    """Scale |multiplier| by ``factor`` keeping fixed points and phase."""
    p, q = gen.fixed_points()
    kappa = gen.multiplier() * factor
    if is_infinity(p):
        lam = np.sqrt(complex(kappa))
        return MoebiusMap.from_entries(lam * lam, q * (1 - lam * lam), 0.0, 1.0)
    if is_infinity(q):
        lam = np.sqrt(complex(kappa))
        inv = 1.0 / (lam * lam)
        return MoebiusMap.from_entries(inv, p * (1 - inv), 0.0, 1.0)
    return from_fixed_points_multiplier(p, q, kappa)


def deform_toward_classical(
    group,
    steps: int,
    estimator=None,
    depth: int = 7,
    max_step_drop: float = 0.05,
    search_budget: int = 4000,
    stop_margin: float = 0.1,
):
    """Discrete multiplier-inflation path with per-step dimension control.

    Emulates the disk-shrinking path: each generator is rewritten in fixed
    points + multiplier form and its |multiplier| inflated, with the step
    factor adapted so the estimated dimension never drops by more than
    ``max_step_drop`` per step.  Stops early once a classical certificate
    with margin above ``stop_margin`` is found.  Returns the trace as a
    list of (group, estimate, certificate-or-None).
    """
    from .dimension import exponent_of_convergence
    from .schottky import SchottkyGroup

    if estimator is None:
        estimator = lambda grp: exponent_of_convergence(grp, depth)
    current = SchottkyGroup(tuple(group.generators))
    estimate = estimator(current)
    if estimate.value >= 1.0:
        warnings.warn(
            f"initial dimension estimate {estimate.value:.3f} >= 1; "
            "the non-increasing path is only guaranteed below 1",
            stacklevel=2,
        )
    result = search_classical_generators(current, search_budget)
    cert = result if isinstance(result, ClassicalCertificate) else None
    trace = [(current, estimate, cert)]
    if cert is not None and cert.margin > stop_margin:
        return trace
    epsilon = 0.3
    for _ in range(steps):
        prev_value = trace[-1][1].value
        while True:
            candidate = SchottkyGroup(
                tuple(_inflate(gen, 1.0 + epsilon) for gen in trace[-1][0].generators)
            )
            est = estimator(candidate)
            if prev_value - est.value <= max_step_drop or epsilon <= 0.01:
                break
            epsilon = max(0.01, 0.5 * epsilon)
        if prev_value - est.value < 0.25 * max_step_drop:
            epsilon = min(1.0, 1.5 * epsilon)
        result = search_classical_generators(candidate, search_budget)
        cert = result if isinstance(result, ClassicalCertificate) else None
        trace.append((candidate, est, cert))
        if cert is not None and cert.margin > stop_margin:
            break
    return trace

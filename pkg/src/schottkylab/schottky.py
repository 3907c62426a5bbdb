"""Schottky group model: generators, circle pairings, reduced words,
nested disk covers and limit-set sampling.

Index conventions used everywhere: letters are 0-based in {0..2g-1},
letter ``l`` denotes generator ``l`` for ``l < g`` and the inverse of
generator ``l-g`` otherwise, so the inverse of ``l`` is ``(l+g) % 2g``.
Circle ``i`` is paired with circle ``i+g``: generator ``i`` maps the
exterior of circle ``i`` onto the interior of circle ``i+g``.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .errors import DegenerateImage, NoPairingError, NonLoxodromicError
from .moebius import LOXODROMIC_TAG, MoebiusMap

Word = tuple  # tuple of 0-based letter indices, reduced


@dataclass(frozen=True)
class Circle:
    """Round circle: complex center, positive finite radius."""

    center: complex
    radius: float

    def __post_init__(self):
        if not (self.radius > 0.0 and np.isfinite(self.radius)):
            raise ValueError(f"radius must be positive and finite, got {self.radius}")

    def contains(self, z: complex, margin: float = 0.0) -> bool:
        """Closed-disk membership shrunk by ``margin``."""
        return abs(complex(z) - self.center) <= self.radius - margin

    def gap_to(self, other: "Circle") -> float:
        """Distance between the closed disks (negative if overlapping)."""
        return abs(self.center - other.center) - self.radius - other.radius

    def point_at(self, angle: float) -> complex:
        return self.center + self.radius * complex(np.cos(angle), np.sin(angle))

    def to_json(self):
        return {"center": [self.center.real, self.center.imag], "radius": self.radius}

    @classmethod
    def from_json(cls, data) -> "Circle":
        return cls(complex(data["center"][0], data["center"][1]), float(data["radius"]))


@dataclass(frozen=True)
class DegeneratePoint:
    """A circle collapsed to a point; distinct from any radius-0 Circle."""

    point: complex

    def to_json(self):
        return {"point": [self.point.real, self.point.imag]}


@dataclass(frozen=True)
class CirclePairing:
    """2g circles, index i paired with i+g."""

    circles: tuple

    def __post_init__(self):
        if len(self.circles) % 2 != 0 or not self.circles:
            raise ValueError("pairing needs 2g circles")

    @property
    def rank(self) -> int:
        return len(self.circles) // 2

    def min_gap(self) -> float:
        gaps = [
            self.circles[i].gap_to(self.circles[j])
            for i in range(len(self.circles))
            for j in range(i + 1, len(self.circles))
        ]
        return min(gaps)


@dataclass(frozen=True)
class SchottkyGroup:
    """g loxodromic generators plus an optional verified circle pairing."""

    generators: tuple
    pairing: CirclePairing | None = None

    def __post_init__(self):
        if not self.generators:
            raise ValueError("need at least one generator")
        for i, gen in enumerate(self.generators):
            if gen.classify() != LOXODROMIC_TAG:
                raise NonLoxodromicError(f"generator {i} is {gen.classify()}")
        if self.pairing is not None:
            if len(self.pairing.circles) != 2 * len(self.generators):
                raise ValueError("pairing size does not match rank")
            from .classicality import verify_classical_domain

            verify_classical_domain(self.generators, self.pairing)

    @property
    def rank(self) -> int:
        return len(self.generators)

    @cached_property
    def letters(self) -> tuple:
        """The 2g letter maps: generators then inverses."""
        gens = tuple(self.generators)
        return gens + tuple(f.inverse() for f in gens)

    @cached_property
    def letter_matrices(self) -> np.ndarray:
        out = np.empty((2 * self.rank, 2, 2), dtype=np.complex128)
        for i, f in enumerate(self.letters):
            out[i] = [[f.a, f.b], [f.c, f.d]]
        return out

    def inverse_letter(self, letter: int) -> int:
        return (letter + self.rank) % (2 * self.rank)

    def to_json(self, metadata: dict | None = None):
        doc = {
            "rank": self.rank,
            "generators": [g.to_json() for g in self.generators],
        }
        if self.pairing is not None:
            doc["circles"] = [c.to_json() for c in self.pairing.circles]
        if metadata:
            doc["metadata"] = metadata
        return doc


def inverse_letter(letter: int, g: int) -> int:
    return (letter + g) % (2 * g)


def is_reduced(word: Sequence[int], g: int) -> bool:
    return all(
        word[i + 1] != inverse_letter(word[i], g) for i in range(len(word) - 1)
    )


def enumerate_reduced_words(g: int, k: int) -> Iterator[Word]:
    """All reduced words of length exactly k, lexicographic, streamed."""
    n = 2 * g
    if k == 0:
        yield ()
        return
    word = [0] * k

    def rec(pos: int) -> Iterator[Word]:
        if pos == k:
            yield tuple(word)
            return
        banned = inverse_letter(word[pos - 1], g) if pos > 0 else -1
        for letter in range(n):
            if letter == banned:
                continue
            word[pos] = letter
            yield from rec(pos + 1)

    yield from rec(0)


def count_reduced_words(g: int, k: int) -> int:
    if k == 0:
        return 1
    return 2 * g * (2 * g - 1) ** (k - 1)


def word_to_map(group: SchottkyGroup, word: Sequence[int]) -> MoebiusMap:
    """Left-to-right composition; the empty word is the identity."""
    if not is_reduced(word, group.rank):
        raise ValueError(f"word {word!r} is not reduced")
    out = MoebiusMap.identity()
    for letter in word:
        out = out @ group.letters[letter]
    return out


def is_admissible_for_disk(word: Sequence[int], disk: int) -> bool:
    """Nesting condition: the word's image of circle ``disk`` sits strictly
    inside the cover iff the last letter differs from ``disk``."""
    return not word or word[-1] != disk


def word_str(word: Sequence[int], g: int) -> str:
    """Compact spelling: a..z for generators, A..Z for inverses."""
    if g <= 26:
        out = []
        for letter in word:
            if letter < g:
                out.append(string.ascii_lowercase[letter])
            else:
                out.append(string.ascii_uppercase[letter - g])
        return "".join(out)
    return ".".join(str(letter + 1) for letter in word)


def parse_word(text: str, g: int) -> Word:
    if not text:
        return ()
    if "." in text or g > 26:
        return tuple(int(tok) - 1 for tok in text.split("."))
    out = []
    for ch in text:
        if ch.islower():
            out.append(string.ascii_lowercase.index(ch))
        else:
            out.append(string.ascii_uppercase.index(ch) + g)
    return tuple(out)


def circle_through_points(z1: complex, z2: complex, z3: complex) -> Circle:
    """Circumcircle of three points; DegenerateImage when collinear/tiny."""
    # Translate to the centroid for conditioning.
    zm = (z1 + z2 + z3) / 3.0
    a, b, c = z1 - zm, z2 - zm, z3 - zm
    scale = max(abs(a), abs(b), abs(c), 1e-300)
    det = 2.0 * (
        a.real * (b.imag - c.imag)
        + b.real * (c.imag - a.imag)
        + c.real * (a.imag - b.imag)
    )
    if abs(det) < 1e-14 * scale * scale:
        raise DegenerateImage("three image points are (nearly) collinear")
    sa, sb, sc = abs(a) ** 2, abs(b) ** 2, abs(c) ** 2
    ux = (sa * (b.imag - c.imag) + sb * (c.imag - a.imag) + sc * (a.imag - b.imag)) / det
    uy = (sa * (c.real - b.real) + sb * (a.real - c.real) + sc * (b.real - a.real)) / det
    center = complex(ux, uy)
    radius = abs(a - center)
    if radius < 1e-14:
        raise DegenerateImage("image circle radius underflowed")
    return Circle(center + zm, radius)


def map_circle(f: MoebiusMap, circle: Circle) -> Circle:
    """Image circle computed from three mapped boundary points (Moebius maps
    do not preserve centers)."""
    pts = [circle.point_at(t) for t in (0.0, 2.0 * np.pi / 3.0, 4.0 * np.pi / 3.0)]
    images = [f(p) for p in pts]
    if any(not isinstance(w, complex) for w in images):
        raise DegenerateImage("circle passes through the pole; image is a line")
    return circle_through_points(*images)


def nested_disk(group: SchottkyGroup, word: Sequence[int], base: int | None = None) -> Circle:
    """Boundary circle of the nested disk indexed by a reduced word.

    With ``base=None`` the canonical family is used: the image of the
    pairing circle of the word's last letter, whose exterior side maps to
    the covered disk.  An explicit ``base`` gives the image of circle
    ``base`` instead (the word must then be admissible for it).
    """
    if group.pairing is None:
        raise NoPairingError("nested disks need a circle pairing")
    if base is None:
        if not word:
            raise ValueError("empty word needs an explicit base disk")
        base = word[-1]
    elif not is_admissible_for_disk(word, base):
        raise ValueError(f"word {word!r} is not admissible for disk {base}")
    circle = group.pairing.circles[base]
    if not word:
        return circle
    return map_circle(word_to_map(group, word), circle)


def _level_matrices(group: SchottkyGroup, depth: int) -> tuple[np.ndarray, np.ndarray]:
    """Matrices and last letters of all reduced words of length ``depth``,
    lexicographic order, computed level by level."""
    letters = group.letter_matrices
    n = letters.shape[0]
    g = group.rank
    mats = letters.copy()
    last = np.arange(n)
    for _ in range(depth - 1):
        n_par = len(mats)
        children = np.empty((n_par * (n - 1), 2, 2), dtype=np.complex128)
        child_last = np.empty(n_par * (n - 1), dtype=np.int64)
        inv_last = (last + g) % n
        parent_idx = np.arange(n_par)
        for m in range(n):
            ok = inv_last != m
            dest = parent_idx[ok] * (n - 1) + (m - (inv_last[ok] < m))
            children[dest] = mats[ok] @ letters[m]
            child_last[dest] = m
        mats = children
        last = child_last
    return mats, last


def sample_limit_set(group: SchottkyGroup, depth: int) -> list:
    """One sample point per depth-``depth`` reduced word, lexicographic.

    With a pairing: the center of the word's nested disk.  Without one:
    the attracting fixed point of the word map (same limit object,
    different finite-depth sampling; flagged by ``group.pairing is None``).
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    mats, last = _level_matrices(group, depth)
    points = []
    if group.pairing is not None:
        circles = group.pairing.circles
        for k in range(len(mats)):
            a, b, c, d = mats[k].ravel()
            f = MoebiusMap(a, b, c, d)
            points.append(map_circle(f, circles[last[k]]).center)
    else:
        for k in range(len(mats)):
            a, b, c, d = mats[k].ravel()
            f = MoebiusMap(a, b, c, d)
            points.append(f.fixed_points()[0])
    return points


def max_disk_radius(group: SchottkyGroup, depth: int) -> float:
    """Largest radius in the depth-``depth`` nested disk cover."""
    if group.pairing is None:
        raise NoPairingError("disk radii need a circle pairing")
    mats, last = _level_matrices(group, depth)
    circles = group.pairing.circles
    worst = 0.0
    for k in range(len(mats)):
        a, b, c, d = mats[k].ravel()
        f = MoebiusMap(a, b, c, d)
        worst = max(worst, map_circle(f, circles[last[k]]).radius)
    return worst

"""Moebius transformations as normalized SL(2,C) matrices.

A map is stored as the four entries of a determinant-one matrix; the map
and its negation are the same projective transformation.  The point at
infinity is the tagged singleton ``INFINITY``, never a large float.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import CIsZeroError, IdentityError, PoleError

DET_TOL = 1e-12
PROJ_TOL = 1e-9

IDENTITY_TAG = "identity"
PARABOLIC_TAG = "parabolic"
ELLIPTIC_TAG = "elliptic"
LOXODROMIC_TAG = "loxodromic"


class _Infinity:
    """Tagged point at infinity on the Riemann sphere."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"


INFINITY = _Infinity()


def is_infinity(z) -> bool:
    return z is INFINITY


@dataclass(frozen=True)
class MoebiusMap:
    """Normalized matrix [[a, b], [c, d]] acting by z -> (az+b)/(cz+d)."""

    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def from_entries(cls, a, b, c, d) -> "MoebiusMap":
        """Build from arbitrary entries, rescaling to determinant one."""
        a, b, c, d = complex(a), complex(b), complex(c), complex(d)
        det = a * d - b * c
        scale = max(abs(a), abs(b), abs(c), abs(d))
        if scale == 0.0 or abs(det) < max(DET_TOL, 1e-14 * scale * scale):
            raise ValueError("matrix is singular, not a Moebius map")
        s = cmath.sqrt(det)
        return cls(a / s, b / s, c / s, d / s)

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1.0, 0.0, 0.0, 1.0)

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> complex:
        return self.a + self.d

    def compose(self, other: "MoebiusMap") -> "MoebiusMap":
        """Matrix product self*other, renormalized (drift control).

        When the entries are so large that the computed determinant is
        pure cancellation noise, the product is returned as-is: it is
        determinant-one by algebra and rescaling by noise would corrupt it.
        """
        a = self.a * other.a + self.b * other.c
        b = self.a * other.b + self.b * other.d
        c = self.c * other.a + self.d * other.c
        d = self.c * other.b + self.d * other.d
        scale = max(abs(a), abs(b), abs(c), abs(d))
        if scale < 1e3:  # determinant noise ~ scale^2 * eps stays below 1e-10
            det = a * d - b * c
            if 0.25 < abs(det) < 4.0:
                s = cmath.sqrt(det)
                return MoebiusMap(a / s, b / s, c / s, d / s)
        return MoebiusMap(a, b, c, d)

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return self.compose(other)

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    def __call__(self, z):
        return self.apply(z)

    def apply(self, z):
        """Evaluate at z in C or at INFINITY; poles map to INFINITY."""
        if is_infinity(z):
            if abs(self.c) == 0.0:
                return INFINITY
            return self.a / self.c
        z = complex(z)
        den = self.c * z + self.d
        if abs(den) == 0.0:
            return INFINITY
        return (self.a * z + self.b) / den

    def derivative_modulus(self, z: complex) -> float:
        """|f'(z)| = 1/|cz+d|^2 for a det-one matrix."""
        den = self.c * complex(z) + self.d
        mag = abs(den)
        if mag < 1e-14:
            raise PoleError(f"derivative at pole z={z!r}")
        return 1.0 / (mag * mag)

    def is_identity(self, tol: float = PROJ_TOL) -> bool:
        return projectively_equal(self, MoebiusMap.identity(), tol)

    def classify(self) -> str:
        """Identity / parabolic / elliptic / loxodromic from tr^2 only."""
        if self.is_identity():
            return IDENTITY_TAG
        t2 = self.trace * self.trace
        if abs(t2 - 4.0) < PROJ_TOL:
            return PARABOLIC_TAG
        if abs(t2.imag) < PROJ_TOL and -PROJ_TOL < t2.real < 4.0:
            return ELLIPTIC_TAG
        return LOXODROMIC_TAG

    def fixed_points(self):
        """Both fixed points; the attracting one first for loxodromics.

        Parabolic maps return their double point twice.  For elliptic maps
        (no attracting point) the order is unspecified.
        """
        if self.is_identity():
            raise IdentityError("identity fixes every point")
        a, b, c, d = self.a, self.b, self.c, self.d
        if abs(c) < 1e-15:
            # z -> (a/d) z + b/d: fixes INFINITY and b/(d-a).
            if abs(d - a) < 1e-12:
                return (INFINITY, INFINITY)
            finite = b / (d - a)
            if abs(a) >= abs(d):
                return (INFINITY, finite)
            return (finite, INFINITY)
        # Roots of c z^2 + (d - a) z - b = 0.
        disc = cmath.sqrt((a - d) * (a - d) + 4.0 * b * c)
        # Stable quadratic: pick the larger-magnitude numerator first.
        n1 = (a - d) + disc
        n2 = (a - d) - disc
        if abs(n1) >= abs(n2):
            z1 = n1 / (2.0 * c)
            z2 = -b / (c * z1) if abs(z1) > 1e-300 else n2 / (2.0 * c)
        else:
            z1 = n2 / (2.0 * c)
            z2 = -b / (c * z1) if abs(z1) > 1e-300 else n1 / (2.0 * c)
        if abs(disc) < 1e-12:
            return (z1, z1)
        # Attracting point has |f'| < 1 there, i.e. |c z + d| > 1.
        if abs(c * z1 + d) >= abs(c * z2 + d):
            return (z1, z2)
        return (z2, z1)

    def isometric_circle(self):
        """Circle |cz+d| = 1 where |f'| = 1: center -d/c, radius 1/|c|."""
        from .schottky import Circle  # local import: Circle lives with the group model

        if abs(self.c) < 1e-12:
            raise CIsZeroError("map fixes infinity; no isometric circle")
        return Circle(-self.d / self.c, 1.0 / abs(self.c))

    def base_displacement(self) -> float:
        """Hyperbolic distance d(o, f o) from the base point o = (0,0,1)."""
        n = (
            abs(self.a) ** 2
            + abs(self.b) ** 2
            + abs(self.c) ** 2
            + abs(self.d) ** 2
        )
        return math.acosh(max(1.0, 0.5 * n))

    def translation_length(self) -> float:
        """2 log|lambda| for the larger eigenvalue lambda (0 if not loxodromic)."""
        t = self.trace
        disc = cmath.sqrt(t * t - 4.0)
        lam = 0.5 * (t + disc)
        if abs(lam) < 1.0:
            lam = 0.5 * (t - disc)
        return 2.0 * math.log(max(1.0, abs(lam)))

    def multiplier(self) -> complex:
        """Eigenvalue-squared kappa with |kappa| >= 1 (z -> kappa z model)."""
        t = self.trace
        disc = cmath.sqrt(t * t - 4.0)
        lam = 0.5 * (t + disc)
        if abs(lam) < 1.0:
            lam = 0.5 * (t - disc)
        return lam * lam

    def to_json(self):
        """Row-major [[re, im], ...] array of the four entries."""
        return [[z.real, z.imag] for z in (self.a, self.b, self.c, self.d)]

    @classmethod
    def from_json(cls, data) -> "MoebiusMap":
        if len(data) != 4:
            raise ValueError("matrix JSON must list four [re, im] pairs")
        vals = [complex(p[0], p[1]) for p in data]
        return cls.from_entries(*vals)


def projectively_equal(f: MoebiusMap, g: MoebiusMap, tol: float = PROJ_TOL) -> bool:
    """Entrywise equality up to the global sign ambiguity of SL(2,C)."""
    plus = max(
        abs(f.a - g.a), abs(f.b - g.b), abs(f.c - g.c), abs(f.d - g.d)
    )
    minus = max(
        abs(f.a + g.a), abs(f.b + g.b), abs(f.c + g.c), abs(f.d + g.d)
    )
    return min(plus, minus) < tol


def from_fixed_points_multiplier(p: complex, q: complex, kappa: complex) -> MoebiusMap:
    """Loxodromic with attracting point p, repelling q, multiplier kappa.

    Conjugate of z -> kappa z (|kappa| > 1; attractor at infinity pulled
    to p, repeller at zero pulled to q).
    """
    if abs(kappa) <= 1.0:
        raise ValueError("need |kappa| > 1 for a loxodromic map")
    lam = cmath.sqrt(kappa)
    conj = MoebiusMap.from_entries(p, q, 1.0, 1.0)
    core = MoebiusMap.from_entries(lam, 0.0, 0.0, 1.0 / lam)
    return conj @ core @ conj.inverse()

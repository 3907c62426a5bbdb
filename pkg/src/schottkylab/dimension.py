"""Hausdorff-dimension estimators for Schottky limit sets.

Three routes: the critical exponent of the orbital Poincare series read
off truncated shell ratios, a transfer-operator eigenvalue refinement on
the nested disk cover, and a box-counting oracle on sampled points.
The series uses base-point displacements exp(-s*d(o, gamma o)); for
convex-cocompact groups this matches the boundary-derivative
normalization up to bounded factors, and only growth rates are read off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse
from scipy.special import logsumexp

from . import _kernels
from .errors import DegenerateFit, NoPairingError, NonConvergedError
from .moebius import MoebiusMap
from .schottky import SchottkyGroup, _level_matrices, map_circle

METHOD_EXPONENT = "exponent"
METHOD_TRANSFER = "transfer"
METHOD_BOXCOUNT = "boxcount"

EXPONENT_BISECTION_TOL = 1e-3
TRANSFER_RHO_TOL = 1e-4
POWER_ITER_MAX = 10_000
POWER_ITER_TOL = 1e-10
PROXY_DELTA = 0.05
OSCILLATION_LIMIT = 0.5


@dataclass(frozen=True)
class DimensionEstimate:
    value: float
    method: str
    depth: int
    residual: float

    def to_json(self):
        return {
            "method": self.method,
            "value": self.value,
            "depth": self.depth,
            "residual": self.residual,
        }


@dataclass(frozen=True)
class SeriesTruncation:
    s: float
    depth: int
    partial_sum: float
    last_shell: float


def _displacement_shells(group: SchottkyGroup, depth: int) -> list[np.ndarray]:
    disp, offsets = _kernels.shell_displacements(group.letter_matrices, depth)
    return [np.asarray(disp[offsets[k]:offsets[k + 1]]) for k in range(depth)]


def _shell_log_sums(shells: list[np.ndarray], s: float) -> np.ndarray:
    """log sum exp(-s*d) per shell, stable for large s*d."""
    return np.array([logsumexp(-s * shell) for shell in shells])


def poincare_partial_sum(group: SchottkyGroup, s: float, depth: int) -> SeriesTruncation:
    """Sum of exp(-s*d(o, gamma o)) over reduced words of length <= depth."""
    if s < 0:
        raise ValueError("exponent s must be >= 0")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    shells = _displacement_shells(group, depth)
    log_sums = _shell_log_sums(shells, s)
    return SeriesTruncation(
        s=s,
        depth=depth,
        partial_sum=float(np.exp(log_sums).sum()),
        last_shell=float(np.exp(log_sums[-1])),
    )


def _check_oscillation(log_sums: np.ndarray) -> None:
    """Reject when the last few shell ratios jump by more than 50%."""
    log_ratios = np.diff(log_sums)
    if len(log_ratios) < 2:
        return
    tail = log_ratios[-3:]
    for prev, cur in zip(tail, tail[1:]):
        if abs(math.exp(cur - prev) - 1.0) > OSCILLATION_LIMIT:
            raise NonConvergedError(
                f"shell ratios oscillate: consecutive ratios {math.exp(prev):.4g} "
                f"-> {math.exp(cur):.4g}"
            )


def exponent_of_convergence(group: SchottkyGroup, depth: int) -> DimensionEstimate:
    """Critical exponent by bisection on the last shell ratio.

    Finite truncations never diverge, so the observable signal is the s
    where the deepest shell flips from growth to decay: the root of
    log(S_k(s)/S_{k-1}(s)) on s in [0, 2].
    """
    if depth < 4:
        raise ValueError("exponent estimation needs depth >= 4")
    shells = _displacement_shells(group, depth)

    def log_ratio(s: float) -> float:
        sums = _shell_log_sums(shells, s)
        return float(sums[-1] - sums[-2])

    lo, hi = 0.0, 2.0
    f_lo = log_ratio(lo)
    if f_lo <= 0.0:
        _check_oscillation(_shell_log_sums(shells, lo))
        return DimensionEstimate(0.0, METHOD_EXPONENT, depth, abs(f_lo))
    f_hi = log_ratio(hi)
    if f_hi >= 0.0:
        _check_oscillation(_shell_log_sums(shells, hi))
        return DimensionEstimate(2.0, METHOD_EXPONENT, depth, abs(f_hi))
    while hi - lo > EXPONENT_BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if log_ratio(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    value = 0.5 * (lo + hi)
    _check_oscillation(_shell_log_sums(shells, value))
    return DimensionEstimate(value, METHOD_EXPONENT, depth, abs(log_ratio(value)))


def _transfer_edges(group: SchottkyGroup, depth: int):
    """Sparse transition structure of the depth-``depth`` disk cover.

    States are reduced words w = l1..lk; the disk of w refines through its
    shift: w -> v = (l2..lk, b) for every letter b keeping v reduced.  The
    contraction applied along the edge is the letter map l1 evaluated at
    the sample point (disk center) of v.
    """
    n_letters = 2 * group.rank
    g = group.rank
    mats, last = _level_matrices(group, depth)
    n_states = len(mats)
    circles = group.pairing.circles
    centers = np.empty(n_states, dtype=np.complex128)
    for k in range(n_states):
        a, b, c, d = mats[k].ravel()
        centers[k] = map_circle(MoebiusMap(a, b, c, d), circles[last[k]]).center

    # Lexicographic index of a word from its letter sequence.
    def index_of(word):
        idx = word[0]
        for prev, cur in zip(word, word[1:]):
            banned = (prev + g) % n_letters
            rank = cur - (1 if banned < cur else 0)
            idx = idx * (n_letters - 1) + rank
        return idx

    words = []

    def fill_words(prefix):
        if len(prefix) == depth:
            words.append(tuple(prefix))
            return
        banned = (prefix[-1] + g) % n_letters if prefix else -1
        for letter in range(n_letters):
            if letter != banned:
                fill_words(prefix + [letter])

    fill_words([])

    rows, cols, base = [], [], []
    letter_maps = group.letters
    for u_idx, word in enumerate(words):
        head = word[0]
        shifted = word[1:]
        banned = (word[-1] + g) % n_letters
        fmap = letter_maps[head]
        for b in range(n_letters):
            if b == banned:
                continue
            v_idx = index_of(shifted + (b,))
            rows.append(u_idx)
            cols.append(v_idx)
            base.append(fmap.derivative_modulus(centers[v_idx]))
    return (
        np.asarray(rows, dtype=np.int64),
        np.asarray(cols, dtype=np.int64),
        np.asarray(base, dtype=np.float64),
        n_states,
    )


def _spectral_radius(matrix) -> float:
    """Dominant eigenvalue by power iteration from a positive start."""
    n = matrix.shape[0]
    v = np.full(n, 1.0 / math.sqrt(n))
    rho_prev = 0.0
    for _ in range(POWER_ITER_MAX):
        w = matrix @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
        if abs(norm - rho_prev) < POWER_ITER_TOL * max(1.0, norm):
            return norm
        rho_prev = norm
    raise NonConvergedError("power iteration did not stabilize in 10k steps")


def transfer_dimension(group: SchottkyGroup, depth: int) -> DimensionEstimate:
    """Dimension from spectral radius one of the weighted transition matrix."""
    if group.pairing is None:
        raise NoPairingError("transfer operator needs a verified pairing")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    rows, cols, base, n_states = _transfer_edges(group, depth)

    def rho(s: float) -> float:
        mat = scipy.sparse.csr_matrix(
            (base**s, (rows, cols)), shape=(n_states, n_states)
        )
        return _spectral_radius(mat)

    lo, hi = 0.0, 2.0
    rho_lo = rho(lo)
    if rho_lo <= 1.0 + TRANSFER_RHO_TOL:
        return DimensionEstimate(0.0, METHOD_TRANSFER, depth, abs(rho_lo - 1.0))
    rho_hi = rho(hi)
    if rho_hi >= 1.0:
        return DimensionEstimate(2.0, METHOD_TRANSFER, depth, abs(rho_hi - 1.0))
    value, residual = 1.0, rho(1.0) - 1.0
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        r = rho(mid)
        value, residual = mid, abs(r - 1.0)
        if residual < TRANSFER_RHO_TOL:
            break
        if r > 1.0:
            lo = mid
        else:
            hi = mid
    return DimensionEstimate(value, METHOD_TRANSFER, depth, residual)


def box_counting(points, scales) -> DimensionEstimate:
    """Least-squares slope of log N(eps) against log(1/eps).

    ``scales`` must give at least four box sizes spanning two decades.
    """
    pts = np.asarray(points, dtype=np.complex128)
    scales = np.asarray(sorted(scales, reverse=True), dtype=np.float64)
    if len(scales) < 4:
        raise ValueError("need at least four scales")
    if scales.min() <= 0:
        raise ValueError("scales must be positive")
    if scales.max() / scales.min() < 100.0 * (1.0 - 1e-9):
        raise ValueError("scales must span at least two decades")
    if len(pts) == 0 or np.all(pts == pts[0]):
        raise DegenerateFit("all points identical")
    xs = pts.real
    ys = pts.imag
    counts = []
    for eps in scales:
        cells = np.unique(
            np.stack([np.floor(xs / eps), np.floor(ys / eps)], axis=1), axis=0
        )
        counts.append(len(cells))
    log_inv_eps = np.log(1.0 / scales)
    log_n = np.log(np.asarray(counts, dtype=np.float64))
    coeffs, residuals, *_ = np.polyfit(log_inv_eps, log_n, 1, full=True)
    slope = float(coeffs[0])
    rms = float(np.sqrt(residuals[0] / len(scales))) if len(residuals) else 0.0
    return DimensionEstimate(
        min(2.0, max(0.0, slope)), METHOD_BOXCOUNT, len(scales), rms
    )


def default_scales(points, count: int = 9, decades: float = 2.0) -> np.ndarray:
    """Geometric ladder of box sizes spanning ``decades`` below the diameter."""
    pts = np.asarray(points, dtype=np.complex128)
    diameter = float(np.abs(pts[:, None] - pts[None, :]).max()) if len(pts) < 2000 else float(
        np.hypot(pts.real.max() - pts.real.min(), pts.imag.max() - pts.imag.min())
    )
    top = 0.25 * max(diameter, 1e-9)
    return top * np.logspace(0.0, -decades, count)


CONVERGES_LIKELY = "ConvergesLikely"
DIVERGES_LIKELY = "DivergesLikely"
INCONCLUSIVE = "Inconclusive"


def rectifiability_proxy(group: SchottkyGroup, depth: int) -> str:
    """Bowen-criterion proxy via the s=1 shell ratios.

    ConvergesLikely when the last three ratios stay below 1-delta,
    DivergesLikely when above 1+delta, else Inconclusive.
    """
    if depth < 4:
        raise ValueError("proxy needs depth >= 4")
    shells = _displacement_shells(group, depth)
    log_sums = _shell_log_sums(shells, 1.0)
    ratios = np.exp(np.diff(log_sums))[-3:]
    if np.all(ratios < 1.0 - PROXY_DELTA):
        return CONVERGES_LIKELY
    if np.all(ratios > 1.0 + PROXY_DELTA):
        return DIVERGES_LIKELY
    return INCONCLUSIVE

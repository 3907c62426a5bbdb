import numpy as np
import pytest

from schottkylab import _kernels
from schottkylab._kernels import _slow

from conftest import four_circle_group, hex_cluster_group

try:
    from schottkylab._kernels import _fast
except ImportError:
    _fast = None

needs_fast = pytest.mark.skipif(_fast is None, reason="compiled kernels not built")


def test_backend_reports():
    assert _kernels.BACKEND in ("compiled", "python")
    assert _slow.BACKEND == "python"


@needs_fast
def test_shell_displacements_agree():
    for group in (four_circle_group(), hex_cluster_group(gap=0.1)):
        depth = 5 if group.rank == 2 else 3
        d1, o1 = _fast.shell_displacements(group.letter_matrices, depth)
        d2, o2 = _slow.shell_displacements(group.letter_matrices, depth)
        assert np.array_equal(np.asarray(o1), np.asarray(o2))
        assert np.allclose(np.asarray(d1), np.asarray(d2), atol=1e-11)


def test_shell_offsets_match_word_counts():
    G = four_circle_group()
    disp, offsets = _kernels.shell_displacements(G.letter_matrices, 6)
    offsets = np.asarray(offsets)
    counts = np.diff(offsets)
    assert counts[0] == 4
    assert all(counts[k] == 4 * 3**k for k in range(6))
    assert np.all(np.asarray(disp) >= 0)


@needs_fast
def test_dfd_agree():
    rng = np.random.default_rng(3)
    for _ in range(20):
        p = rng.standard_normal(30) + 1j * rng.standard_normal(30)
        q = rng.standard_normal(25) + 1j * rng.standard_normal(25)
        assert abs(_fast.dfd(p, q) - _slow.dfd(p, q)) < 1e-12


def test_dfd_known_value():
    p = np.array([0, 1, 2], dtype=np.complex128)
    q = np.array([0 + 1j, 2 - 4j], dtype=np.complex128)
    # Eiter-Mannila example: max coupling distance 4.
    assert abs(_slow.dfd(p, q) - 4.0) < 1e-12
    if _fast is not None:
        assert abs(_fast.dfd(p, q) - 4.0) < 1e-12


def test_dfd_early_abandon_bound():
    p = np.zeros(50, dtype=np.complex128)
    q = np.full(50, 10.0 + 0j)
    value = _kernels.dfd(p, q, bound=1.0)
    assert value >= 1.0


@needs_fast
def test_bbox_pairs_agree():
    rng = np.random.default_rng(4)
    n = 200
    minx = rng.uniform(0, 10, n)
    miny = rng.uniform(0, 10, n)
    maxx = minx + rng.uniform(0.1, 1.5, n)
    maxy = miny + rng.uniform(0.1, 1.5, n)
    i1, j1 = _fast.bbox_pairs(minx, miny, maxx, maxy)
    i2, j2 = _slow.bbox_pairs(minx, miny, maxx, maxy)
    assert set(zip(i1.tolist(), j1.tolist())) == set(zip(i2.tolist(), j2.tolist()))


def test_bbox_pairs_bruteforce_oracle():
    rng = np.random.default_rng(5)
    n = 60
    minx = rng.uniform(0, 5, n)
    miny = rng.uniform(0, 5, n)
    maxx = minx + rng.uniform(0.1, 2.0, n)
    maxy = miny + rng.uniform(0.1, 2.0, n)
    expected = {
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if minx[i] <= maxx[j] and minx[j] <= maxx[i]
        and miny[i] <= maxy[j] and miny[j] <= maxy[i]
    }
    i2, j2 = _kernels.bbox_pairs(minx, miny, maxx, maxy)
    assert set(zip(i2.tolist(), j2.tolist())) == expected

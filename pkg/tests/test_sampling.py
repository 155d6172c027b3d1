import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pinnmg.problems import get_problem
from pinnmg.sampling import (
    generate_boundary,
    generate_interior,
    make_training_set,
    perimeter_points,
    sobol2d,
)


def reference_sobol2d(n_points):
    """Gray-code Sobol generator: dim 1 van der Corput, dim 2 from s=1, a=0, m1=1."""
    bits = 32
    m1 = [1] * bits
    m2 = [1]
    for _ in range(1, bits):
        m2.append((2 * m2[-1]) ^ m2[-1])
    v1 = [m << (bits - k - 1) for k, m in enumerate(m1)]
    v2 = [m << (bits - k - 1) for k, m in enumerate(m2)]
    out = []
    for n in range(n_points):
        gray = n ^ (n >> 1)
        x = y = 0
        k = 0
        while gray:
            if gray & 1:
                x ^= v1[k]
                y ^= v2[k]
            gray >>= 1
            k += 1
        out.append((x / 2**bits, y / 2**bits))
    return np.array(out)


def test_sobol_first_points():
    np.testing.assert_array_equal(sobol2d(3, skip=1), [[0.5, 0.5], [0.75, 0.25], [0.25, 0.75]])
    np.testing.assert_array_equal(sobol2d(1, skip=0), [[0.0, 0.0]])


def test_sobol_matches_reference_generator():
    np.testing.assert_array_equal(sobol2d(1000, skip=0), reference_sobol2d(1000))
    np.testing.assert_array_equal(sobol2d(100, skip=37), reference_sobol2d(137)[37:])


@pytest.mark.parametrize("k", [2, 5, 9])
def test_sobol_dyadic_balance(k):
    pts = sobol2d(2**k, skip=0)
    for c in range(2):
        assert np.sum(pts[:, c] < 0.5) == 2 ** (k - 1)


def star_discrepancy_64(pts):
    n = len(pts)
    edges = np.arange(1, 65) / 64
    cx = (pts[:, 0][None, :] < edges[:, None])
    cy = (pts[:, 1][None, :] < edges[:, None])
    counts = cx.astype(np.int64) @ cy.T.astype(np.int64)
    return np.max(np.abs(counts / n - np.outer(edges, edges)))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_sobol_beats_pseudo_random_discrepancy(seed):
    d_sobol = star_discrepancy_64(sobol2d(4096, skip=1))
    d_rand = star_discrepancy_64(generate_interior("pseudo-random", 4096, seed))
    assert d_sobol < d_rand


def test_uniform_interior():
    pts = generate_interior("uniform", (3, 3))
    assert sorted(map(tuple, pts)) == [(a, b) for a in (0.25, 0.5, 0.75) for b in (0.25, 0.5, 0.75)]
    with pytest.raises(ValueError):
        generate_interior("uniform", 9)
    with pytest.raises(ValueError):
        generate_interior("halton", 9)


def test_pseudo_random_determinism():
    a = generate_interior("pseudo-random", 500, seed=4)
    np.testing.assert_array_equal(a, generate_interior("pseudo-random", 500, seed=4))
    assert np.all((a > 0) & (a < 1))


def test_sobol_128_request_count():
    pts = generate_interior("sobol", "128x128")
    assert pts.shape == (16384, 2)
    assert np.all((pts > 0) & (pts < 1))
    ts = make_training_set(get_problem("foursines"), "sobol", (128, 128), 4000)
    assert ts.n_interior + ts.n_boundary == 20384


def test_boundary_corners_and_values():
    pts, g = generate_boundary(4, get_problem("disk"))
    assert sorted(map(tuple, pts)) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    pts, g = generate_boundary(4000, get_problem("foursines"))
    assert pts.shape == (4000, 2) and np.all(g == 0)


@settings(max_examples=30, deadline=None)
@given(q=st.integers(1, 500))
def test_perimeter_equispaced(q):
    count = 4 * q
    pts = perimeter_points(count)
    on_edge = (pts[:, 0] == 0) | (pts[:, 0] == 1) | (pts[:, 1] == 0) | (pts[:, 1] == 1)
    assert np.all(on_edge)
    closed = np.vstack([pts, pts[:1]])
    gaps = np.abs(np.diff(closed, axis=0)).sum(axis=1)
    np.testing.assert_allclose(gaps, 4.0 / count, rtol=1e-12)
    # each corner exactly once
    for c in [(0, 0), (1, 0), (1, 1), (0, 1)]:
        assert np.sum(np.all(pts == c, axis=1)) == 1


def test_sobol_edge_layout():
    pts, _ = generate_boundary(40, get_problem("foursines"), layout="sobol")
    assert pts.shape == (40, 2)
    assert np.all((pts[:, 0] % 1 == 0) | (pts[:, 1] % 1 == 0))

import numpy as np
import pytest

from pdelearn.grid import Grid, build_grid, box_rule, clip_box_to_cell, gauss_rule, gauss_rule_1d


def test_build_grid_examples():
    g = build_grid(1, 64, 1)
    assert g.num_cells == 64 and g.h == 0.015625
    assert build_grid(2, 64, 1).num_cells == 4096
    g3 = build_grid(3, 16, 1)
    assert g3.num_cells == 4096 and g3.h == 0.0625


@pytest.mark.parametrize("d, n", [(0, 4), (4, 4), (2, 0)])
def test_build_grid_rejects(d, n):
    with pytest.raises(ValueError):
        build_grid(d, n)


@pytest.mark.parametrize("d, n, D", [(1, 7, 1.0), (2, 5, 2.5), (3, 3, 0.3)])
def test_cells_tile_domain(d, n, D):
    g = build_grid(d, n, D)
    total = g.num_cells * g.h**d
    assert abs(total - D**d) <= 1e-12 * D**d
    origins = g.cell_origin()
    assert origins.min() == 0.0
    assert np.allclose(origins.max(axis=0) + g.h, D)
    # lexicographic, last axis fastest
    if d > 1:
        assert np.allclose(origins[1], [0.0] * (d - 1) + [g.h])


def test_gauss_rule_examples():
    r = gauss_rule(1, 1)
    assert np.allclose(r.points, [[0.5]]) and np.allclose(r.weights, [1.0])
    x, w = gauss_rule_1d(2)
    assert np.allclose(x, [0.5 - 1 / (2 * np.sqrt(3)), 0.5 + 1 / (2 * np.sqrt(3))], atol=1e-15)
    assert np.allclose(x, [0.211324865, 0.788675135])
    assert np.allclose(w, 0.5)
    r22 = gauss_rule(2, 2)
    assert r22.size == 4 and np.allclose(r22.weights, 0.25)


@pytest.mark.parametrize("q", range(1, 16))
def test_gauss_exactness(q):
    x, w = gauss_rule_1d(q)
    assert abs(w.sum() - 1) < 1e-14
    for j in range(2 * q):
        assert abs(w @ x**j - 1 / (j + 1)) <= 1e-12 / (j + 1)


def test_tensor_rule_exactness():
    r = gauss_rule(3, 3)
    # per-coordinate degree <= 5
    vals = r.points[:, 0] ** 5 * r.points[:, 1] ** 3 * r.points[:, 2] ** 4
    assert abs(r.weights @ vals - 1 / 6 / 4 / 5) < 1e-14


def test_box_rule_volume():
    pts, w = box_rule([0.1, 0.2], [0.4, 0.9], 3)
    assert abs(w.sum() - 0.3 * 0.7) < 1e-15
    assert pts.min(axis=0)[0] > 0.1 and pts.max(axis=0)[1] < 0.9


def test_clip_examples():
    g1 = Grid(1, 2)
    lo, hi = clip_box_to_cell(g1, 0, ([0.25], [0.75]))
    assert lo == [0.25] and hi == [0.5]
    assert clip_box_to_cell(g1, 0, ([0.6], [0.9])) is None
    g2 = Grid(2, 2)
    lo, hi = clip_box_to_cell(g2, 0, ([0.4, 0.4], [0.6, 0.6]))
    assert np.allclose(lo, 0.4) and np.allclose(hi, 0.5)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_clipped_pieces_tile_box(d):
    rng = np.random.default_rng(d)
    g = Grid(d, 5)
    for _ in range(10):
        lo = rng.uniform(0, 0.6, d)
        hi = lo + rng.uniform(0.05, 0.4, d)
        vol = 0.0
        for c in range(g.num_cells):
            piece = clip_box_to_cell(g, c, (lo, hi))
            if piece is not None:
                vol += np.prod(piece[1] - piece[0])
        assert abs(vol - np.prod(hi - lo)) <= 1e-12 * np.prod(hi - lo)


def test_locate_boundary_points():
    g = Grid(2, 4)
    cell, local = g.locate([[1.0, 1.0], [0.25, 0.0]])
    assert cell[0] == g.num_cells - 1 and np.allclose(local[0], 1.0)
    assert cell[1] == 4 and np.allclose(local[1], 0.0)

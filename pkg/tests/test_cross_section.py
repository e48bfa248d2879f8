import os

import numpy as np
import pytest

from ergolab.cross_section import (
    Net,
    allocate_many,
    build_E_U,
    greedy_net,
    orbit_distances,
    selector_check,
    voronoi_allocate,
)
from ergolab.errors import BoundaryUncertaintyError, DegenerateWindowError, ParameterError
from ergolab.group_core import Window, make_group


# -- greedy nets ------------------------------------------------------------------


def test_greedy_scan_example(line):
    net = greedy_net(Window.box([(0.0, 10.0)]), 2.0, line, scan_step=0.1)
    assert net.points.ravel().tolist() == [0.0, 2.0, 4.0, 6.0, 8.0, 10.0]
    assert net.r_cover == 4.0


def test_greedy_covering_example(line):
    net = greedy_net(Window.box([(0.0, 10.0)]), 2.0, line, scan_step=0.1)
    d = orbit_distances(line, line.element([5.3]), net.points)
    assert float(d.min()) <= 2.0


def test_single_point_window(line):
    net = greedy_net(Window.box([(0.0, 0.0)]), 2.0, line, scan_step=0.1)
    assert net.points.ravel().tolist() == [0.0]


def test_degenerate_window_error(line):
    with pytest.raises(DegenerateWindowError):
        greedy_net(Window.box([(0.0, 1.0)]), 2.0, line, scan_step=0.1)


def test_scan_step_guard(line):
    with pytest.raises(ParameterError):
        greedy_net(Window.box([(0.0, 10.0)]), 2.0, line, scan_step=1.5)


def test_greedy_packing_is_separated(plane):
    net = greedy_net(Window.box([(-5.0, 5.0), (-5.0, 5.0)]), 1.5, plane)
    for i in range(len(net)):
        d = plane.metric_many(net.points, net.points[i])
        d[i] = np.inf
        assert d.min() >= 1.5 - 1e-9


def test_net_is_lex_sorted_and_deterministic(plane):
    w = Window.box([(-4.0, 4.0), (-4.0, 4.0)])
    a = greedy_net(w, 1.0, plane)
    b = greedy_net(w, 1.0, plane)
    assert np.array_equal(a.points, b.points)
    keys = [tuple(p) for p in a.points]
    assert keys == sorted(keys)


def test_net_csv_roundtrip(tmp_path, net_2z):
    path = os.path.join(tmp_path, "net.csv")
    net_2z.to_csv(path)
    with open(path) as fh:
        lines = fh.read().strip().splitlines()
    assert len(lines) == len(net_2z) + 1
    assert lines[0] == "x0"


# -- allocation --------------------------------------------------------------------


def test_allocate_basic(net_2z, line):
    alloc = voronoi_allocate(line.element([0.7]), net_2z)
    assert abs(alloc.r_o - 0.7) < 1e-12
    assert float(alloc.owner[0]) == 0.0
    assert not alloc.tied


def test_allocate_exact_tie(net_2z, line):
    alloc = voronoi_allocate(line.element([1.0]), net_2z)
    assert alloc.candidates[:, 0].tolist() == [0.0, 2.0]
    assert float(alloc.owner[0]) == 0.0  # least owner wins the tie


def test_allocate_net_point(net_2z, line):
    alloc = voronoi_allocate(line.element([0.0]), net_2z)
    assert alloc.r_o == 0.0 and float(alloc.owner[0]) == 0.0


def test_allocate_boundary_guard(net_2z, line):
    with pytest.raises(BoundaryUncertaintyError):
        voronoi_allocate(line.element([7.5]), net_2z)


def test_allocation_radius_bounded(net_2z, line):
    rng = np.random.default_rng(2)
    pts = (2 * rng.random((500, 1)) - 1) * 4.0
    _, r_o = allocate_many(pts, net_2z)
    assert float(r_o.max()) <= net_2z.r_cover + 1e-12


# -- the Voronoi OER ---------------------------------------------------------------


def test_tile_interval_and_classes(net_2z, line):
    E = build_E_U(net_2z)
    assert E.tile_interval(0.0) == (-1.0, 1.0)
    assert E.class_of(line.element([0.5])) == (0.0,)
    assert E.class_of(line.element([-0.99])) == (0.0,)
    # open-left closed-right at exact midpoints
    assert E.class_of(line.element([1.0])) == (0.0,)
    assert E.class_of(line.element([-1.0])) == (-2.0,)


def test_displacement_interval(net_2z, line):
    E = build_E_U(net_2z)
    region = E.g_region_of(line.element([0.5]))
    assert region.intervals == ((-1.5, 0.5),)


def test_displacement_diameter_bound(net_2z, line):
    E = build_E_U(net_2z)
    rng = np.random.default_rng(3)
    for v in 4 * (2 * rng.random(100) - 1):
        lo, hi = E.g_region_of(line.element([v])).intervals[0]
        assert -4.0 <= lo and hi <= 4.0


def test_selector_examples(net_2z, line):
    E = build_E_U(net_2z)
    x, y, z = (line.element([v]) for v in (0.5, 0.7, 1.5))
    assert E.class_of(x) == E.class_of(y)
    assert E.class_of(x) != E.class_of(z)
    out = selector_check(net_2z, [x, y, z, line.element([0.0])])
    assert out["ok"]


# -- invariants ------------------------------------------------------------------


@pytest.mark.parametrize("kind", ["R", "R2"])
def test_partition_and_determinism(kind):
    model = make_group(kind)
    w = Window.box([(-8.0, 8.0)] * model.dim)
    net = greedy_net(w, 2.0, model)
    rng = np.random.default_rng(5)
    pts = (2 * rng.random((1000, model.dim)) - 1) * 4.0
    owners, r_o = allocate_many(pts, net)
    owners2, _ = allocate_many(pts, net)
    assert np.array_equal(owners, owners2)  # unique, reproducible ownership
    assert float(r_o.max()) <= net.r_cover + 1e-12
    # owner points allocate to themselves
    for w_pt in {tuple(o) for o in owners}:
        self_alloc = voronoi_allocate(np.array(w_pt), net, check_window=False)
        assert tuple(self_alloc.owner) == w_pt


@pytest.mark.parametrize("kind", ["R", "R2"])
def test_lacunarity_action_map_injective(kind):
    model = make_group(kind)
    w = Window.box([(-6.0, 6.0)] * model.dim)
    net = greedy_net(w, 2.0, model)
    rng = np.random.default_rng(6)
    us = (2 * rng.random((40, model.dim)) - 1) * 0.49 * net.r_pack
    products = np.stack([model.mul(u, p) for u in us for p in net.points])
    labels = [(i, j) for i in range(len(us)) for j in range(len(net))]
    min_gap = np.inf
    for a in range(len(products)):
        d = model.metric_many(products[a + 1 :], products[a])
        for off, dist in enumerate(d):
            if labels[a][1] != labels[a + 1 + off][1]:
                min_gap = min(min_gap, float(dist))
    assert min_gap > 0.01 * net.r_pack


def test_affine_net_and_allocation(affine):
    w = Window.box([(-2.0, 2.0), (-2.0, 2.0)])
    net = greedy_net(w, 0.5, affine)
    assert len(net) > 10
    E = build_E_U(net)
    x = affine.element([0.1, -0.07])
    key = E.class_of(x)
    # the owner is the orbit-nearest net point under d(e, w·x^{-1})
    d = orbit_distances(affine, x, net.points)
    assert abs(float(d.min()) - voronoi_allocate(x, net).r_o) < 1e-12
    assert key == tuple(net.points[int(np.argmin(d))])

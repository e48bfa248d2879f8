"""Lacunary cocompact nets, the orbit Voronoi tessellation, and its OER.

A *net* is a finite point set in a window that is ``r_pack``-separated and
``2*r_pack``-covering; it plays the role of a cross section for the group
translating itself.  Every point of the space is allocated to its nearest
net point (nearest in the orbit sense: the displacement ``g`` with
``g.x = w`` is measured by ``d(e, g)``), ties going to the
coordinatewise-least owner.  The resulting tiles are the classes of a
compact, positive orbit equivalence relation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import BoundaryUncertaintyError, DegenerateWindowError, ParameterError
from .group_core import GroupModel, Window, lex_key
from .regions import IndicatorRegion, IntervalUnion

#: absolute slack for membership in the set of nearest owners; floating
#: distances are never exactly equal, so strict equality would make the
#: tie-break rule dead code
TIE_TOL = 1e-9


@dataclass(frozen=True)
class Net:
    """Window-restricted cross section with packing/covering scales."""

    points: np.ndarray  # (m, dim), sorted coordinatewise-lexicographically
    r_pack: float
    r_cover: float
    window: Window
    model: GroupModel

    def __len__(self):
        return len(self.points)

    def eroded_window(self):
        return self.window.erode(self.r_cover)

    def sorted_line(self):
        """Net points as a sorted 1-d array (line model only)."""
        return np.sort(self.points[:, 0])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"x{i}" for i in range(self.points.shape[1])])
            for row in self.points:
                writer.writerow([repr(float(v)) for v in row])

    @staticmethod
    def from_points(points, r_pack, window, model):
        pts = model.points(points).astype(np.float64)
        order = sorted(range(len(pts)), key=lambda i: lex_key(pts[i]))
        return Net(pts[order], float(r_pack), 2.0 * float(r_pack), window, model)


def scan_grid(window, step, model):
    """Deterministic scan order: per-axis arithmetic progressions from the
    window corner, first coordinate slowest (lexicographic)."""
    if model.discrete:
        axes = [np.arange(int(lo), int(hi) + 1) for lo, hi in zip(window.lo, window.hi)]
    else:
        axes = []
        for lo, hi in zip(window.lo, window.hi):
            count = int(np.floor((hi - lo) / step + 1e-9)) + 1
            axes.append(lo + step * np.arange(count))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel().astype(np.float64) for m in mesh], axis=1)


def greedy_net(window, r_pack, model, scan_step=None):
    """Sequential greedy packing over the scan grid.

    A candidate is accepted iff it is at distance >= r_pack from every
    previously accepted point.  Maximality of the greedy packing makes the
    result r_pack-discrete and 2*r_pack-covering inside the window.
    """
    if r_pack <= 0:
        raise ParameterError("r_pack must be positive")
    widths = window.widths
    if np.all(widths < r_pack) and np.any(widths > 0):
        raise DegenerateWindowError("window smaller than r_pack in every axis")
    if scan_step is None:
        scan_step = r_pack / 4.0
    if not model.discrete and scan_step > r_pack / 2.0 + 1e-12:
        raise ParameterError("scan_step must be <= r_pack/2 to guarantee covering")
    candidates = scan_grid(window, scan_step, model)
    accepted = []
    for cand in candidates:
        if not accepted:
            accepted.append(cand)
            continue
        dists = model.metric_many(np.array(accepted), cand)
        if np.min(dists) >= r_pack - 1e-9:
            accepted.append(cand)
    return Net.from_points(np.array(accepted), r_pack, window, model)


def orbit_distances(model, x, ws):
    """d_o(x, w) = d(e, g) for the displacement g with g·x = w, i.e.
    g = w·x^{-1}.  Coincides with the plain metric on the abelian models."""
    ws = model.points(ws).astype(np.float64)
    x = model.element(x)
    if model.abelian:
        return model.metric_many(ws, x)
    xinv = model.inv(x)
    disp = model.right_translate_many(ws, xinv)
    return model.norm_many(disp)


@dataclass(frozen=True)
class VoronoiAllocation:
    """Nearest-owner data for one query point."""

    x: np.ndarray
    r_o: float
    candidates: np.ndarray  # (k, dim), sorted coordinatewise
    owner: np.ndarray

    @property
    def tied(self):
        return len(self.candidates) > 1


def voronoi_allocate(x, net, check_window=True):
    """Allocate x to the coordinatewise-least nearest net point."""
    x = net.model.element(x).astype(np.float64)
    if check_window and not bool(net.eroded_window().contains(x)[0]):
        raise BoundaryUncertaintyError(
            "query point outside the window eroded by the covering radius"
        )
    dists = orbit_distances(net.model, x, net.points)
    r_o = float(np.min(dists))
    # net points are lex-sorted, so the tied subset is already in tie-break order
    cand = net.points[dists <= r_o + TIE_TOL]
    return VoronoiAllocation(x=x, r_o=r_o, candidates=cand, owner=cand[0])


def allocate_many(points, net, check_window=True):
    """Vectorized owner lookup; ties resolved as in voronoi_allocate."""
    pts = net.model.points(points).astype(np.float64)
    if check_window:
        ok = net.eroded_window().contains(pts)
        if not np.all(ok):
            raise BoundaryUncertaintyError("some query points are outside the eroded window")
    # (n, m) distance table; nets are desk-scale so this is fine
    if net.model.abelian:
        diff = pts[:, None, :] - net.points[None, :, :]
        table = np.linalg.norm(diff, axis=2)
    else:
        # displacement w·x^{-1} = (t_w - t_x, b_w - exp(t_w - t_x)·b_x)
        dt = net.points[None, :, 0] - pts[:, None, 0]
        db = net.points[None, :, 1] - np.exp(dt) * pts[:, None, 1]
        table = np.abs(dt) + np.abs(db)
    r_o = table.min(axis=1)
    # columns are lex-sorted, so the first near-minimal column is the
    # tie-break winner
    first_tied = np.argmax(table <= (r_o + TIE_TOL)[:, None], axis=1)
    return net.points[first_tied], r_o


class VoronoiOER:
    """Compact positive OER whose classes are the Voronoi tiles.

    ``class_of`` doubles as the selector; on the line the tiles are exact
    intervals with the open-left / closed-right convention, elsewhere they
    are indicator-resolved within a bounding box.
    """

    def __init__(self, net):
        self.net = net
        self.model = net.model
        if self.model.dim == 1 and not self.model.discrete:
            self._line = net.sorted_line()
        else:
            self._line = None

    def class_of(self, x):
        return lex_key(voronoi_allocate(x, self.net).owner)

    def tile_interval(self, owner_value):
        """Exact tile (lo, hi) of a line net point, clipped to the window."""
        line = self._line
        i = int(np.searchsorted(line, owner_value))
        if not np.isclose(line[i], owner_value):
            raise ParameterError("not a net point")
        lo = (line[i - 1] + line[i]) / 2.0 if i > 0 else float(self.net.window.lo[0])
        hi = (line[i] + line[i + 1]) / 2.0 if i + 1 < len(line) else float(self.net.window.hi[0])
        return lo, hi

    def class_region_of(self, x):
        """The class of x as a region of the carrier (chart coordinates)."""
        key = self.class_of(x)
        if self._line is not None:
            return IntervalUnion.of([self.tile_interval(key[0])])
        owner = np.array(key)
        half = self.net.r_cover
        bounding = Window(owner - half, owner + half)

        def keys_equal(pts):
            got, _ = allocate_many(pts, self.net, check_window=False)
            return np.all(np.abs(got - owner) <= 1e-12, axis=1)

        return IndicatorRegion(bounding, keys_equal)

    def g_region_of(self, x):
        """G_E(x) = {g : g·x in class(x)} as an exact interval on the line."""
        if self._line is None:
            return None
        x = self.net.model.element(x)
        lo, hi = self.tile_interval(self.class_of(x)[0])
        return IntervalUnion.of([(lo - float(x[0]), hi - float(x[0]))])


def build_E_U(net, model=None):
    """Equivalence-relation handle over the translation action; classes are
    the Voronoi tiles of the net."""
    if model is not None and model is not net.model:
        raise ParameterError("net was built for a different model")
    return VoronoiOER(net)


def selector_check(net, samples):
    """Verify that the allocation map behaves as a selector on samples."""
    oer = VoronoiOER(net)
    keys = [oer.class_of(x) for x in samples]
    selector_ok = all(
        oer.class_of(np.array(k)) == k for k in set(keys)
    )  # the owner point allocates to itself
    pair_ok = True
    for i in range(len(samples)):
        for j in range(i + 1, len(samples)):
            same_class = keys[i] == keys[j]
            same_owner = lex_key(voronoi_allocate(samples[i], net).owner) == lex_key(
                voronoi_allocate(samples[j], net).owner
            )
            if same_class != same_owner:
                pair_ok = False
    return {
        "samples": len(samples),
        "selector_in_class": selector_ok,
        "classes_match_owners": pair_ok,
        "ok": selector_ok and pair_ok,
    }

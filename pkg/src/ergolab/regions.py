"""Regions of integration: exact interval unions, boxes, sampled indicators.

Orbit classes and displacement sets are exact interval unions on the line,
boxes for the random dyadic windows, and indicator-resolved sets on the
higher-dimensional and non-abelian models.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .group_core import Window, haar_nodes_weights, window_haar_mass


def merge_intervals(intervals, tol=1e-12):
    """Sort and merge touching/overlapping (lo, hi) pairs."""
    ivs = sorted((float(lo), float(hi)) for lo, hi in intervals if hi > lo - tol)
    merged = []
    for lo, hi in ivs:
        if merged and lo <= merged[-1][1] + tol:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(lo, hi) for lo, hi in merged]


@dataclass(frozen=True)
class IntervalUnion:
    """Finite union of disjoint 1-d intervals, endpoints as plain floats.

    Point membership at shared endpoints follows the tile convention
    (open-left, closed-right); all masses and integrals are unaffected.
    """

    intervals: tuple

    @staticmethod
    def of(intervals):
        return IntervalUnion(tuple(merge_intervals(intervals)))

    @property
    def span(self):
        return self.intervals[0][0], self.intervals[-1][1]

    def measure(self):
        return float(sum(hi - lo for lo, hi in self.intervals))

    def translate(self, by):
        return IntervalUnion(tuple((lo + by, hi + by) for lo, hi in self.intervals))

    def contains_points(self, xs):
        xs = np.asarray(xs, dtype=np.float64).reshape(-1)
        out = np.zeros(len(xs), dtype=bool)
        for lo, hi in self.intervals:
            out |= (xs > lo) & (xs <= hi)
        return out

    def contains_interval(self, lo, hi, tol=1e-9):
        return any(lo >= a - tol and hi <= b + tol for a, b in self.intervals)

    def integrate(self, f, resolution):
        """Midpoint quadrature of a vectorized 1-d scalar field."""
        total = 0.0
        for lo, hi in self.intervals:
            if hi <= lo:
                continue
            n = max(2, int(np.ceil(resolution * (hi - lo) / max(self.measure(), 1e-300))))
            xs = lo + (np.arange(n) + 0.5) * (hi - lo) / n
            total += float(np.sum(f(xs.reshape(-1, 1)))) * (hi - lo) / n
        return total

    def lattice_points(self):
        """Integer members under the open-left / closed-right convention."""
        pts = []
        for lo, hi in self.intervals:
            pts.extend(range(int(np.floor(lo + 1e-9)) + 1, int(np.floor(hi + 1e-9)) + 1))
        return np.array(sorted(set(pts)), dtype=np.int64)


@dataclass(frozen=True)
class IndicatorRegion:
    """A region known only through membership tests inside a bounding box."""

    bounding: Window
    member: object  # vectorized (n, dim) -> bool array

    def haar_mass(self, model, quad):
        pts, wts = haar_nodes_weights(model, self.bounding, quad)
        return float(np.dot(self.member(pts).astype(np.float64), wts))

    def integrate(self, model, f, quad):
        pts, wts = haar_nodes_weights(model, self.bounding, quad)
        mask = self.member(pts)
        if not np.any(mask):
            return 0.0
        return float(np.dot(np.asarray(f(pts[mask]), dtype=np.float64), wts[mask]))


def region_mass(model, region, quad):
    """Haar mass of any region flavor."""
    if isinstance(region, IntervalUnion):
        if model.discrete:
            return float(len(region.lattice_points()))
        return region.measure()
    if isinstance(region, Window):
        return window_haar_mass(model, region)
    return region.haar_mass(model, quad)


def region_integrate(model, region, f, quad):
    """Haar integral of f over any region flavor."""
    if isinstance(region, IntervalUnion):
        if model.discrete:
            pts = region.lattice_points().reshape(-1, 1)
            return float(np.sum(f(pts))) if len(pts) else 0.0
        return region.integrate(f, quad.resolution)
    if isinstance(region, Window):
        pts, wts = haar_nodes_weights(model, region, quad)
        return float(np.dot(np.asarray(f(pts), dtype=np.float64), wts))
    return region.integrate(model, f, quad)

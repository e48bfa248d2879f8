"""Nested compact orbit equivalence relations over a net.

The dyadic construction enumerates the net by increasing distance from the
identity (distance ties resolved toward the coordinatewise-greater point,
which makes the enumeration on the line read 0, 2, -2, 4, -4, ...) and
groups, at level n, runs of 2^n consecutive tiles of that enumeration.
Blocks around the identity therefore absorb every fixed ball as n grows,
which is exactly the equicompactness property the averaging experiments
rely on.

Also here: lifting a nested partition of the net to the whole space
through the allocation map, the reverse restriction, positivization of
levels with mass-zero classes, the [K, eps]-invariance statistic, and the
seeded random dyadic windows used as random Folner sequences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cross_section import VoronoiOER, allocate_many, voronoi_allocate
from .errors import (
    DegenerateWindowError,
    ExhaustedFiltrationError,
    NestingViolationError,
    ParameterError,
)
from .group_core import Window, lex_key
from .regions import IndicatorRegion, IntervalUnion, region_mass

POSITIVITY_THRESHOLD = 1e-9  # quadrature cannot certify exact zero


def distance_enumeration(net):
    """Net row order: increasing d(e, w), ties toward the lex-greater point."""
    dists = net.model.norm_many(net.points)
    keys = [
        (float(dists[i]),) + tuple(-c for c in net.points[i].tolist())
        for i in range(len(net))
    ]
    return np.array(sorted(range(len(net)), key=lambda i: keys[i]), dtype=np.int64)


class FiltrationStructure:
    """Increasing family of tile-grouping OERs over one net.

    ``block_maps[n]`` assigns a block id to every net row (rows follow the
    net's lex order); level-n classes are unions of the tiles sharing a
    block id, and the maps are validated to be nested.
    """

    def __init__(self, net, block_maps):
        self.net = net
        self.model = net.model
        self.oer = VoronoiOER(net)
        self.block_maps = [np.asarray(b, dtype=np.int64) for b in block_maps]
        for n, b in enumerate(self.block_maps):
            if len(b) != len(net):
                raise ParameterError(f"level {n} grouping has wrong length")
        self._check_nesting()
        self._row_of_key = {lex_key(net.points[r]): r for r in range(len(net))}

    def _check_nesting(self):
        for n in range(len(self.block_maps) - 1):
            fine, coarse = self.block_maps[n], self.block_maps[n + 1]
            seen = {}
            for b_fine, b_coarse in zip(fine, coarse):
                if seen.setdefault(int(b_fine), int(b_coarse)) != int(b_coarse):
                    raise NestingViolationError(
                        f"level {n} blocks are split by level {n + 1}"
                    )

    @property
    def max_level(self):
        return len(self.block_maps) - 1

    def row_of(self, x):
        owner = voronoi_allocate(x, self.net).owner
        return self._row_of_key[lex_key(owner)]

    def class_of(self, x, n):
        return int(self.block_maps[n][self.row_of(x)])

    def block_rows(self, n, block):
        return np.nonzero(self.block_maps[n] == block)[0]

    def class_region(self, n, block):
        """The level-n class as a region of the carrier."""
        rows = self.block_rows(n, block)
        if self.oer._line is not None:
            return IntervalUnion.of(
                [self.oer.tile_interval(float(self.net.points[r, 0])) for r in rows]
            )
        boxes_lo = self.net.points[rows] - self.net.r_cover
        boxes_hi = self.net.points[rows] + self.net.r_cover
        bounding = Window(boxes_lo.min(axis=0), boxes_hi.max(axis=0))
        block_map = self.block_maps[n]
        row_of_key = self._row_of_key

        def member(pts):
            owners, _ = allocate_many(pts, self.net, check_window=False)
            rows_p = np.array([row_of_key[lex_key(w)] for w in owners])
            return block_map[rows_p] == block

        return IndicatorRegion(bounding, member)

    def class_region_of(self, x, n):
        return self.class_region(n, self.class_of(x, n))

    def g_region_of(self, x, n):
        """G_{E_n}(x) as an exact interval union (1-d abelian models)."""
        if self.oer._line is None:
            return None
        region = self.class_region_of(x, n)
        x = self.net.model.element(x)
        return region.translate(-float(x[0]))

    def level_oer(self, n):
        """View one level as a standalone compact OER handle."""
        return FiltrationLevelOER(self, n)


class FiltrationLevelOER:
    """Single level of a filtration, exposing the compact-OER protocol."""

    def __init__(self, filt, n):
        self.filt = filt
        self.n = n
        self.model = filt.model

    def class_of(self, x):
        return self.filt.class_of(x, self.n)

    def class_region_of(self, x):
        return self.filt.class_region_of(x, self.n)

    def g_region_of(self, x):
        return self.filt.g_region_of(x, self.n)


def dyadic_filtration(net, N):
    """Level-n classes are runs of 2^n tiles in the distance enumeration."""
    if N < 0:
        raise ParameterError("N must be >= 0")
    if len(net) == 0:
        raise ParameterError("net is empty")
    order = distance_enumeration(net)
    position = np.empty(len(net), dtype=np.int64)
    position[order] = np.arange(len(net))
    block_maps = [position // (2**n) for n in range(N + 1)]
    return FiltrationStructure(net, block_maps)


def canonical_partition(blocks):
    """Canonical form: blocks as sorted tuples, ordered by first element."""
    return tuple(sorted(tuple(sorted(int(i) for i in b)) for b in blocks))


def lift_filtration(partitions, net):
    """Lift nested partitions of the net's row set through the allocation map.

    Level-n relates x and y iff their owners' rows share a partition block;
    with the discrete partition at level 0 the bottom level reproduces the
    plain Voronoi relation.
    """
    block_maps = []
    for n, blocks in enumerate(partitions):
        bmap = np.full(len(net), -1, dtype=np.int64)
        for b_id, block in enumerate(sorted(blocks, key=lambda b: min(b))):
            for row in block:
                if bmap[int(row)] != -1:
                    raise ParameterError(f"row {row} appears twice at level {n}")
                bmap[int(row)] = b_id
        if np.any(bmap < 0):
            raise ParameterError(f"level {n} partition does not cover the net")
        block_maps.append(bmap)
    return FiltrationStructure(net, block_maps)  # nesting validated there


def restrict_filtration(filt, net=None):
    """Partition the net's rows by filtration class, per level."""
    net = filt.net if net is None else net
    if net is not filt.net:
        # restriction of the lifted relation to foreign net points
        rows = [filt.row_of(p) for p in net.points]
        out = []
        for n in range(filt.max_level + 1):
            groups = {}
            for i, r in enumerate(rows):
                groups.setdefault(int(filt.block_maps[n][r]), []).append(i)
            out.append(canonical_partition(groups.values()))
        return out
    out = []
    for bmap in filt.block_maps:
        groups = {}
        for row, b in enumerate(bmap):
            groups.setdefault(int(b), []).append(row)
        out.append(canonical_partition(groups.values()))
    return out


def positivize(filt, x, quad, threshold=POSITIVITY_THRESHOLD):
    """Subsequence of levels whose class at x has positive Haar mass.

    Works for any object exposing ``max_level`` and ``class_region_of``.
    """
    levels = []
    for n in range(filt.max_level + 1):
        region = filt.class_region_of(x, n)
        mass = region_mass(filt.model, region, quad) * filt.model.modular(
            filt.model.element(x)
        )
        if mass > threshold:
            levels.append(n)
    if not levels:
        raise ExhaustedFiltrationError("no level has a positive-mass class at x")
    return levels


# -- [K, eps]-invariance ------------------------------------------------------


def _interval_folner(S, K, counting=False):
    """Exact lambda(g in S : K+g subset S) / lambda(S) on the line."""
    k0, k1 = K
    if counting:
        members = S.lattice_points()
        if len(members) == 0:
            raise DegenerateWindowError("S has no lattice points")
        member_set = set(members.tolist())
        shifts = range(int(np.ceil(k0 - 1e-9)), int(np.floor(k1 + 1e-9)) + 1)
        good = sum(1 for g in members if all(int(g) + k in member_set for k in shifts))
        return float(good / len(members))
    eligible = []
    for a, b in S.intervals:
        lo, hi = max(a - k0, a), min(b - k1, b)
        if hi > lo:
            eligible.append((lo, hi))
    total = S.measure()
    if total <= 0:
        raise DegenerateWindowError("S has zero mass")
    return float(sum(hi - lo for lo, hi in eligible) / total)


def folner_stat(S, K, model, quad=None):
    """Fraction of S whose K-translate stays inside S.

    ``S`` may be a Window or an IntervalUnion; ``K`` is a Window.  The
    statistic is exact for boxes on the abelian models and for interval
    unions on the line; on the affine group it is quadratured with an
    exact per-node predicate.  S is [K, eps]-invariant iff the returned
    value exceeds 1 - eps.
    """
    if isinstance(S, IntervalUnion):
        return _interval_folner(S, (float(K.lo[0]), float(K.hi[0])), counting=model.discrete)
    if not isinstance(S, Window):
        raise ParameterError("S must be a Window or an IntervalUnion")
    if model.abelian:
        # eligible region is the componentwise eroded box
        lo = np.maximum(S.lo - K.lo, S.lo)
        hi = np.minimum(S.hi - K.hi, S.hi)
        if model.discrete:
            total = S.chart_volume()
            good = np.prod(np.maximum(0, np.floor(hi + 1e-9) - np.ceil(lo - 1e-9) + 1))
            return float(good / total)
        total = S.chart_volume()
        if total <= 0:
            raise DegenerateWindowError("S has zero mass")
        return float(np.prod(np.maximum(0.0, hi - lo)) / total)
    # affine: K·g image has exact t-range and a monotone b-envelope
    from .group_core import haar_nodes_weights, window_haar_mass

    if quad is None:
        raise ParameterError("affine folner_stat needs a quadrature scheme")
    nodes, wts = haar_nodes_weights(model, S, quad)
    tg, bg = nodes[:, 0], nodes[:, 1]
    tk0, tk1 = float(K.lo[0]), float(K.hi[0])
    bk0, bk1 = float(K.lo[1]), float(K.hi[1])
    t_lo, t_hi = tk0 + tg, tk1 + tg
    e0, e1 = np.exp(tk0), np.exp(tk1)
    b_lo = np.minimum(e0 * bg, e1 * bg) + bk0
    b_hi = np.maximum(e0 * bg, e1 * bg) + bk1
    ok = (
        (t_lo >= S.lo[0] - 1e-12)
        & (t_hi <= S.hi[0] + 1e-12)
        & (b_lo >= S.lo[1] - 1e-12)
        & (b_hi <= S.hi[1] + 1e-12)
    )
    return float(np.dot(ok.astype(np.float64), wts) / window_haar_mass(model, S))


def asymptotic_invariance_experiment(filt, K, eps, xs, n_range, quad=None):
    """Per level: fraction of sample points whose displacement set passes
    the [K, eps]-invariance test, plus the mean statistic."""
    rows = []
    for n in n_range:
        stats = []
        for x in xs:
            region = filt.g_region_of(x, n)
            if region is None:
                raise ParameterError("experiment needs exact line displacement sets")
            stats.append(folner_stat(region, K, filt.model, quad))
        stats = np.array(stats)
        rows.append(
            {
                "n": int(n),
                "fraction_invariant": float(np.mean(stats > 1 - eps)),
                "mean_stat": float(stats.mean()),
                "sample_size": len(xs),
            }
        )
    return rows


# -- random dyadic windows ----------------------------------------------------


@dataclass(frozen=True)
class RandomDyadicFiltration:
    """Nested intervals I_0 subset I_1 subset ... with |I_n| = 2^n and 0 in
    every I_n; each extension side is a fair coin toss, so both endpoints
    diverge almost surely and any fixed compact set is eventually absorbed."""

    seed: int
    dimension: int
    levels: int
    lo: np.ndarray  # (dimension, levels + 1)
    hi: np.ndarray

    def interval(self, n, axis=0):
        return float(self.lo[axis, n]), float(self.hi[axis, n])

    def window(self, n):
        return Window(self.lo[:, n].copy(), self.hi[:, n].copy())

    @property
    def max_level(self):
        return self.levels


def random_dyadic(seed, N, dimension=1):
    """Realize the nested dyadic windows from a seeded fair-coin stream."""
    if N < 0:
        raise ParameterError("N must be >= 0")
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=(dimension, N))
    lo = np.zeros((dimension, N + 1))
    hi = np.zeros((dimension, N + 1))
    hi[:, 0] = 1.0
    for n in range(N):
        grow = 2.0**n
        left = bits[:, n] == 1
        lo[:, n + 1] = lo[:, n] - np.where(left, grow, 0.0)
        hi[:, n + 1] = hi[:, n] + np.where(left, 0.0, grow)
    return RandomDyadicFiltration(seed, dimension, N, lo, hi)

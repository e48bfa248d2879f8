import numpy as np
import pytest

from ergolab.cross_section import build_E_U, greedy_net
from ergolab.errors import (
    DegenerateWindowError,
    ExhaustedFiltrationError,
    NestingViolationError,
)
from ergolab.filtration import (
    asymptotic_invariance_experiment,
    canonical_partition,
    distance_enumeration,
    dyadic_filtration,
    folner_stat,
    lift_filtration,
    positivize,
    random_dyadic,
    restrict_filtration,
)
from ergolab.group_core import QuadratureScheme, Window, make_group
from ergolab.regions import IntervalUnion


# -- dyadic construction -----------------------------------------------------------


def test_distance_enumeration_order(net_2z):
    order = distance_enumeration(net_2z)
    assert net_2z.points[order].ravel().tolist() == [
        0.0, 2.0, -2.0, 4.0, -4.0, 6.0, -6.0, 8.0, -8.0,
    ]


def test_dyadic_level_regions(net_2z, line):
    filt = dyadic_filtration(net_2z, 3)
    x = line.element([0.5])
    assert filt.g_region_of(x, 0).intervals == ((-1.5, 0.5),)
    assert filt.g_region_of(x, 1).intervals == ((-1.5, 2.5),)


def test_level_zero_equals_voronoi(net_2z, line):
    filt = dyadic_filtration(net_2z, 2)
    E = build_E_U(net_2z)
    rng = np.random.default_rng(1)
    for v in 4 * (2 * rng.random(50) - 1):
        x = line.element([v])
        region0 = filt.class_region_of(x, 0)
        tile = E.class_region_of(x)
        assert region0.intervals == tile.intervals


def test_nesting_of_classes(net_2z, line):
    filt = dyadic_filtration(net_2z, 3)
    rng = np.random.default_rng(2)
    for v in 4 * (2 * rng.random(50) - 1):
        x = line.element([v])
        prev = filt.class_region_of(x, 0)
        for n in range(1, 4):
            cur = filt.class_region_of(x, n)
            for lo, hi in prev.intervals:
                assert cur.contains_interval(lo, hi)
            prev = cur


def test_displacement_relation_under_translation(net_2z_wide, line):
    # g in G_n(x) implies G_n(g.x) = G_n(x) - g, exactly on interval endpoints
    filt = dyadic_filtration(net_2z_wide, 3)
    x = line.element([0.5])
    for n in range(3):
        region = filt.g_region_of(x, n)
        lo, hi = region.intervals[0]
        for frac in (0.25, 0.5, 0.9):
            g = lo + frac * (hi - lo)
            moved = filt.g_region_of(line.element([0.5 + g]), n)
            expected = region.translate(-g)
            assert np.allclose(np.array(moved.intervals), np.array(expected.intervals))


def test_equicompactness_absorbs_balls(net_2z_wide, line):
    filt = dyadic_filtration(net_2z_wide, 7)
    rng = np.random.default_rng(3)
    for v in 8 * (2 * rng.random(100) - 1):
        assert filt.g_region_of(line.element([v]), 6).contains_interval(-4.0, 4.0)


def test_minimal_absorbing_level_monotone_toward_center(net_2z_wide, line):
    filt = dyadic_filtration(net_2z_wide, 7)

    def min_n(v):
        for n in range(8):
            if filt.g_region_of(line.element([v]), n).contains_interval(-4.0, 4.0):
                return n
        return 99

    path = [0.95, 0.7, 0.45, 0.2, 0.05]
    levels = [min_n(v) for v in path]
    assert all(b <= a for a, b in zip(levels, levels[1:]))


# -- lift / restrict ----------------------------------------------------------------


def test_restrict_dyadic_level_one(net_2z):
    filt = dyadic_filtration(net_2z, 1)
    parts = restrict_filtration(filt)
    points = net_2z.points.ravel()
    level1 = [tuple(sorted(points[list(block)])) for block in parts[1]]
    assert (0.0, 2.0) in level1
    assert (-2.0, 4.0) in level1
    assert (-4.0, 6.0) in level1


def test_restrict_class_sizes(net_2z_wide):
    filt = dyadic_filtration(net_2z_wide, 4)
    parts = restrict_filtration(filt)
    for n, part in enumerate(parts):
        sizes = {len(b) for b in part}
        assert max(sizes) == 2**n  # full blocks; the tail block may be short


def test_lift_restrict_roundtrip(net_2z):
    filt = dyadic_filtration(net_2z, 3)
    parts = restrict_filtration(filt)
    lifted = lift_filtration(parts, net_2z)
    assert restrict_filtration(lifted) == parts


def test_lift_discrete_partition_is_voronoi(net_2z, line):
    singletons = canonical_partition([[i] for i in range(len(net_2z))])
    lifted = lift_filtration([singletons], net_2z)
    E = build_E_U(net_2z)
    for v in (0.5, -2.3, 3.01):
        x = line.element([v])
        assert lifted.class_region_of(x, 0).intervals == E.class_region_of(x).intervals


def test_lift_pairing_example(net_2z, line):
    # pair {0, 2} and so on in enumeration order; class of 0.5 at level 1
    # is the union of the two tiles (-1, 1] and (1, 3]
    filt = dyadic_filtration(net_2z, 1)
    region = filt.class_region_of(line.element([0.5]), 1)
    assert region.intervals == ((-1.0, 3.0),)


def test_lift_rejects_non_nested(net_2z):
    m = len(net_2z)
    level0 = [[i] for i in range(m)]
    level1 = [[0, 1]] + [[i] for i in range(2, m)]
    level2_bad = [[0], [1, 2]] + [[i] for i in range(3, m)]  # splits {0,1}
    with pytest.raises(NestingViolationError):
        lift_filtration([level0, level1, level2_bad], net_2z)


# -- positivization -----------------------------------------------------------------


def test_positivize_identity_on_dyadic(net_2z, line, quad):
    filt = dyadic_filtration(net_2z, 3)
    assert positivize(filt, line.element([0.5]), quad) == [0, 1, 2, 3]


class _ZeroBottom:
    """Filtration-like stack with a mass-zero bottom level."""

    def __init__(self, filt):
        self.filt = filt
        self.model = filt.model
        self.max_level = filt.max_level + 1

    def class_region_of(self, x, n):
        if n == 0:
            v = float(np.atleast_1d(x)[0])
            return IntervalUnion.of([(v, v)])
        return self.filt.class_region_of(x, n - 1)


def test_positivize_skips_zero_mass_level(net_2z, line, quad):
    filt = dyadic_filtration(net_2z, 2)
    stack = _ZeroBottom(filt)
    levels = positivize(stack, line.element([0.5]), quad)
    assert levels[0] == 1  # level 0 has Haar mass zero


def test_positivize_threshold(net_2z, line, quad):
    filt = dyadic_filtration(net_2z, 0)
    # a tile has width 2, far above the positivity threshold
    assert positivize(filt, line.element([0.5]), quad) == [0]


def test_positivize_exhausted(net_2z, line, quad):
    filt = dyadic_filtration(net_2z, 1)
    stack = _ZeroBottom(filt)
    stack.max_level = 0
    with pytest.raises(ExhaustedFiltrationError):
        positivize(stack, line.element([0.5]), quad)


# -- invariance statistic -----------------------------------------------------------


def test_folner_line_example(line):
    stat = folner_stat(Window.box([(0.0, 8.0)]), Window.box([(-1.0, 1.0)]), line)
    assert stat == 0.75


def test_folner_identity_K(line):
    stat = folner_stat(Window.box([(0.0, 8.0)]), Window.box([(0.0, 0.0)]), line)
    assert stat == 1.0


def test_folner_lattice_example(lattice):
    stat = folner_stat(
        Window.box([(0, 7)], integer=True), Window.box([(-1, 1)], integer=True), lattice
    )
    assert stat == 0.75


def test_folner_interval_union(line):
    S = IntervalUnion.of([(0.0, 4.0), (10.0, 14.0)])
    stat = folner_stat(S, Window.box([(-1.0, 1.0)]), line)
    assert stat == 0.5  # each component loses 2 of its 4 units


def test_folner_degenerate(line):
    with pytest.raises(DegenerateWindowError):
        folner_stat(Window.box([(1.0, 1.0)]), Window.box([(-1.0, 1.0)]), line)


def test_folner_affine_exact_predicate(affine):
    S = Window.box([(-2.0, 2.0), (-2.0, 2.0)])
    K = Window.box([(-0.1, 0.1), (-0.1, 0.1)])
    stat = folner_stat(S, K, affine, QuadratureScheme("grid", 200))
    assert 0.0 < stat < 1.0


def test_asymptotic_invariance_fractions(net_2z_wide, line):
    filt = dyadic_filtration(net_2z_wide, 6)
    rng = np.random.default_rng(4)
    xs = [line.element([v]) for v in (-0.9 + 1.8 * rng.random(40))]
    rows = asymptotic_invariance_experiment(
        filt, Window.box([(-1.0, 1.0)]), 0.3, xs, range(0, 5)
    )
    fractions = [r["fraction_invariant"] for r in rows]
    assert fractions[0] == 0.0 and fractions[1] == 0.0
    assert fractions[2] == 1.0 and fractions[3] == 1.0
    means = [r["mean_stat"] for r in rows]
    for n in (1, 2, 3, 4):
        assert abs(means[n] - (1 - 2.0**-n)) < 1e-12
    assert all(b >= a for a, b in zip(fractions, fractions[1:]))


def test_identity_K_always_invariant(net_2z_wide, line):
    filt = dyadic_filtration(net_2z_wide, 3)
    xs = [line.element([0.3]), line.element([-0.6])]
    rows = asymptotic_invariance_experiment(
        filt, Window.box([(0.0, 0.0)]), 0.3, xs, range(0, 3)
    )
    assert all(r["fraction_invariant"] == 1.0 for r in rows)


# -- random dyadic windows -----------------------------------------------------------


def _first_bits(seed, k):
    return np.random.default_rng(seed).integers(0, 2, size=(1, k)).ravel().tolist()


def _seed_with_bits(prefix):
    for seed in range(10_000):
        if _first_bits(seed, len(prefix)) == prefix:
            return seed
    raise AssertionError("no seed found")


def test_random_dyadic_zero_bits():
    seed = _seed_with_bits([0, 0, 0])
    rd = random_dyadic(seed, 3, 1)
    assert rd.interval(0) == (0.0, 1.0)
    assert rd.interval(1) == (0.0, 2.0)
    assert rd.interval(2) == (0.0, 4.0)
    assert rd.interval(3) == (0.0, 8.0)


def test_random_dyadic_one_bits():
    seed = _seed_with_bits([1, 1])
    rd = random_dyadic(seed, 2, 1)
    assert rd.interval(1) == (-1.0, 1.0)
    assert rd.interval(2) == (-3.0, 1.0)


def test_random_dyadic_lengths_and_nesting():
    for seed in range(50):
        rd = random_dyadic(seed, 8, 1)
        for n in range(9):
            lo, hi = rd.interval(n)
            assert hi - lo == 2.0**n
            assert lo <= 0.0 < hi
            if n:
                plo, phi = rd.interval(n - 1)
                assert lo <= plo and phi <= hi


def test_random_dyadic_determinism_and_dimensions():
    a = random_dyadic(12, 5, 2)
    b = random_dyadic(12, 5, 2)
    assert np.array_equal(a.lo, b.lo) and np.array_equal(a.hi, b.hi)
    w = a.window(3)
    assert w.dim == 2 and np.all(w.hi - w.lo == 8.0)


def test_random_dyadic_almost_sure_divergence():
    # fraction of seeds whose window has absorbed [-8, 8] rises with n
    fractions = []
    for n in (4, 6, 8, 10):
        hits = 0
        for seed in range(1000):
            lo, hi = random_dyadic(seed, n, 1).interval(n)
            hits += lo <= -8.0 and hi >= 8.0
        fractions.append(hits / 1000)
    assert all(b >= a for a, b in zip(fractions, fractions[1:]))
    assert fractions[-1] >= 0.9

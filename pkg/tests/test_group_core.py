import numpy as np
import pytest

from ergolab.errors import (
    DegenerateWindowError,
    IntegrationDomainError,
    ModelMismatchError,
    ParameterError,
)
from ergolab.group_core import (
    QuadratureScheme,
    Window,
    affine_from_ab,
    affine_to_ab,
    ball_filtration,
    haar_integrate,
    haar_nodes_weights,
    make_group,
    window_haar_mass,
)

ALL_MODELS = ["R", "R2", "R3", "Zd", "affine"]


def random_elements(model, count, seed, halfwidth=2.0):
    rng = np.random.default_rng(seed)
    if model.discrete:
        return rng.integers(-3, 4, size=(count, model.dim))
    return halfwidth * (2 * rng.random((count, model.dim)) - 1)


# -- group law ------------------------------------------------------------------


def test_mul_on_the_line(line):
    assert float(line.mul([1.5], [2.0])[0]) == 3.5


def test_mul_affine_matches_natural_law(affine):
    g = affine_from_ab(2.0, 0.0)
    h = affine_from_ab(1.0, 3.0)
    a, b = affine_to_ab(affine.mul(g, h))
    assert abs(a - 2.0) < 1e-12 and abs(b - 6.0) < 1e-12


def test_mul_lattice_identity():
    z2 = make_group("Zd", 2)
    assert np.array_equal(z2.mul([1, 2], [0, 0]), np.array([1, 2]))


def test_mul_rejects_mismatched_dimension(plane):
    with pytest.raises(ModelMismatchError):
        plane.mul([1.0], [2.0])


@pytest.mark.parametrize("kind", ALL_MODELS)
def test_group_axioms_random_triples(kind):
    model = make_group(kind, 2 if kind == "Zd" else None)
    triples = random_elements(model, 3 * 10_000, seed=7).reshape(-1, 3, model.dim)
    worst = 0.0
    e = model.identity
    for g, h, k in triples:
        assoc = np.max(np.abs(model.mul(model.mul(g, h), k) - model.mul(g, model.mul(h, k))))
        unit = np.max(np.abs(model.mul(g, e) - g))
        inv = np.max(np.abs(model.mul(g, model.inv(g)) - e))
        worst = max(worst, float(assoc), float(unit), float(inv))
    if model.discrete:
        assert worst == 0.0
    else:
        assert worst <= 1e-12


# -- metric ---------------------------------------------------------------------


def test_metric_examples(line, affine):
    assert line.metric([0.0], [3.0]) == 3.0
    z2 = make_group("Zd", 2)
    assert z2.metric([0, 0], [3, 4]) == 5.0
    g = affine_from_ab(1.0, 0.0)
    h = affine_from_ab(np.e, 0.0)
    assert abs(affine.metric(g, h) - 1.0) < 1e-12


@pytest.mark.parametrize("kind", ALL_MODELS)
def test_metric_laws(kind):
    model = make_group(kind, 2 if kind == "Zd" else None)
    pts = random_elements(model, 3 * 300, seed=3).reshape(-1, 3, model.dim)
    for g, h, k in pts:
        d_gh = model.metric(g, h)
        assert d_gh == model.metric(h, g)
        assert model.metric(g, g) == 0.0
        if np.any(g != h):
            assert d_gh > 0.0
        assert d_gh <= model.metric(g, k) + model.metric(k, h) + 1e-12


def test_metric_properness_coordinate_bounds():
    # every ball window has chart coordinates bounded by its radius
    for kind in ALL_MODELS:
        model = make_group(kind, 2 if kind == "Zd" else None)
        for r in (1.0, 4.0, 16.0):
            w = model.ball_window(r)
            assert np.all(np.abs(w.lo) <= r) and np.all(np.abs(w.hi) <= r)


# -- Haar integration -----------------------------------------------------------


def test_haar_constant_on_interval(line, quad):
    val = haar_integrate(line, lambda p: np.ones(len(p)), Window.box([(0.0, 2.0)]), quad)
    assert abs(val - 2.0) < 1e-12


def test_haar_affine_window_mass(affine, quad):
    # natural window {1 <= a <= 2, 0 <= b <= 1} has left Haar mass 1/2
    w = Window.box([(0.0, np.log(2.0)), (0.0, 1.0)])
    assert abs(window_haar_mass(affine, w) - 0.5) < 1e-12
    val = haar_integrate(affine, lambda p: np.ones(len(p)), w, QuadratureScheme("grid", 600))
    assert abs(val - 0.5) < 1e-6


def test_haar_linear_integrand(line):
    val = haar_integrate(
        line, lambda p: p[:, 0], Window.box([(0.0, 1.0)]), QuadratureScheme("grid", 2000)
    )
    assert abs(val - 0.5) < 1e-6


def test_haar_lattice_counts(lattice):
    w = Window.box([(-2, 2)], integer=True)
    val = haar_integrate(lattice, lambda p: np.ones(len(p)), w, QuadratureScheme("grid", 2))
    assert val == 5.0


def test_haar_rejects_nonfinite(line, quad):
    with pytest.raises(IntegrationDomainError):
        haar_integrate(line, lambda p: p[:, 0] / 0.0, Window.box([(0.0, 1.0)]), quad)


def smooth_bump(center, width):
    # mollifier bump: flat to all orders at the support edge, so midpoint
    # quadrature converges spectrally and fine grids are unnecessary
    def f(pts):
        rel = 2.0 * (np.atleast_2d(pts) - np.asarray(center)) / np.asarray(width)
        inside = np.all(np.abs(rel) < 1.0, axis=1)
        safe = np.where(inside[:, None], rel, 0.0)
        vals = np.exp(np.sum(1.0 - 1.0 / np.maximum(1.0 - safe**2, 1e-12), axis=1))
        return np.where(inside, vals, 0.0)

    return f


@pytest.mark.parametrize("kind", ALL_MODELS)
def test_haar_left_invariance(kind):
    model = make_group(kind, 1 if kind == "Zd" else None)
    if model.discrete:
        w = Window.box([(-20, 20)], integer=True)
        f = lambda p: np.maximum(0.0, 5.0 - np.abs(p[:, 0].astype(float)))
        quad = QuadratureScheme("grid", 2)
        base = haar_integrate(model, f, w, quad)
        for g in ([1], [-3], [5]):
            shifted = haar_integrate(model, lambda p: f(model.left_translate_many(p, g)), w, quad)
            assert abs(shifted - base) == 0.0
        return
    f = smooth_bump([0.0] * model.dim, [1.5] * model.dim)
    # window = bump support padded past the largest translate
    halfwidth, res = {"R": (2.5, 40_000), "R2": (1.3, 800), "R3": (1.3, 120), "affine": (2.2, 900)}[kind]
    w = Window.box([(-halfwidth, halfwidth)] * model.dim)
    quad = QuadratureScheme("grid", res)
    base = haar_integrate(model, f, w, quad)
    rng = np.random.default_rng(11)
    for _ in range(10):
        g = 0.4 * (2 * rng.random(model.dim) - 1)
        shifted = haar_integrate(model, lambda p: f(model.left_translate_many(p, g)), w, quad)
        assert abs(shifted - base) <= 1e-6


# -- modular function ------------------------------------------------------------


def measure_right_translate(window, g, n=400_000):
    """Haar mass of the right translate S·g of an affine chart box, by exact
    t-slicing: the image slice at t has the same b-length and chart Haar
    density exp(-(t + t_g)).  Independent of the modular closed form."""
    t0, t1 = float(window.lo[0]), float(window.hi[0])
    b0, b1 = float(window.lo[1]), float(window.hi[1])
    ts = t0 + (np.arange(n) + 0.5) * (t1 - t0) / n
    return float(np.sum(np.exp(-(ts + float(g[0])))) * (t1 - t0) / n * (b1 - b0))


def test_modular_unimodular_cases(line, lattice):
    assert line.modular([2.7]) == 1.0
    assert lattice.modular([5]) == 1.0


def test_modular_affine_identity(affine):
    assert abs(affine.modular(affine.identity) - 1.0) < 1e-15


def test_modular_affine_right_translation_oracle(affine):
    """Pins the convention: Haar(S·g) * modular(g) = Haar(S), i.e. the
    returned factor is the one the transformation identity needs, the
    reciprocal of the raw right-translation scaling."""
    g = affine_from_ab(2.0, 0.0)
    windows = [
        Window.box([(0.0, np.log(2.0)), (0.0, 1.0)]),
        Window.box([(-1.0, 0.5), (-2.0, 1.0)]),
        Window.box([(0.2, 1.2), (3.0, 4.5)]),
    ]
    for w in windows:
        lam_s = window_haar_mass(affine, w)
        lam_sg = measure_right_translate(w, g)
        assert abs(lam_sg * affine.modular(g) - lam_s) / lam_s <= 1e-6
        # the raw scaling itself: Haar(S·(2,0)) / Haar(S) = 1/2
        assert abs(lam_sg / lam_s - 0.5) <= 1e-6


# -- ball filtration --------------------------------------------------------------


def test_ball_filtration_line(line):
    balls = ball_filtration(line, 2)
    got = [(float(b.lo[0]), float(b.hi[0])) for b in balls]
    assert got == [(-1.0, 1.0), (-2.0, 2.0), (-4.0, 4.0)]
    assert balls[2].contains_window(Window.box([(-3.0, 3.0)]))


def test_ball_filtration_lattice(lattice):
    balls = ball_filtration(lattice, 1)
    assert (int(balls[0].lo[0]), int(balls[0].hi[0])) == (-1, 1)
    assert (int(balls[1].lo[0]), int(balls[1].hi[0])) == (-2, 2)


def test_ball_filtration_increasing(affine):
    balls = ball_filtration(affine, 4)
    for small, big in zip(balls, balls[1:]):
        assert big.contains_window(small)


# -- quadrature schemes ------------------------------------------------------------


def test_quadrature_validation():
    with pytest.raises(ParameterError):
        QuadratureScheme("simpson", 100)
    with pytest.raises(ParameterError):
        QuadratureScheme("grid", 1)


def test_window_validation():
    with pytest.raises(DegenerateWindowError):
        Window.box([(1.0, 0.0)])
    with pytest.raises(DegenerateWindowError):
        Window.box([(0.0, 1.0)]).erode(0.6)


def test_mc_quadrature_deterministic(line):
    w = Window.box([(0.0, 2.0)])
    q = QuadratureScheme("mc", 4096, seed=5)
    f = lambda p: p[:, 0] ** 2
    a = haar_integrate(line, f, w, q)
    b = haar_integrate(line, f, w, q)
    assert a == b
    assert abs(a - 8.0 / 3.0) < 0.05


def test_mc_task_streams_differ_but_reproduce(line):
    w = Window.box([(0.0, 1.0)])
    q = QuadratureScheme("mc", 256, seed=9)
    n0, _ = haar_nodes_weights(line, w, q, task_index=0)
    n1, _ = haar_nodes_weights(line, w, q, task_index=1)
    n0b, _ = haar_nodes_weights(line, w, q, task_index=0)
    assert not np.array_equal(n0, n1)
    assert np.array_equal(n0, n0b)

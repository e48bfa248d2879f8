"""Concrete locally compact group models with Haar integration.

Four families are supported, chosen to cover the combinations needed
downstream (discrete/continuous, abelian/non-abelian, unimodular or not):

``R``, ``R2``, ``R3``
    The additive groups of dimension 1..3.  Haar = Lebesgue.
``Zd``
    Integer lattices of any dimension.  Haar = counting measure.
``affine``
    The ``x -> a*x + b`` group with ``a > 0`` and multiplication
    ``(a, b)·(a', b') = (a*a', a*b' + b)``.  Elements are stored in chart
    coordinates ``(t, b)`` with ``t = ln a``, in which the left Haar
    measure ``a^-2 da db`` has density ``exp(-t)`` with respect to
    ``dt db``.  Windows, nets and densities all live in this chart.

Elements are numpy vectors of length ``model.dim`` (int64 on the lattice,
float64 otherwise).  Evaluations along quadrature grids are vectorized
over arrays of shape ``(n, dim)``.

Modular function convention
---------------------------
``modular(g)`` returns the factor ``D(g)`` for which

    integral of f(h·g) dHaar(h)  =  D(g) · integral of f dHaar,

equivalently ``Haar(S·g) = Haar(S) / D(g)``.  On the affine model
``D((a, b)) = a``.  This is the orientation under which the
conditional-expectation transformation identity

    S_f(g.x) = nabla_g(x)^-1 · D(g) · S_f(x)

holds; the right-translation scaling is pinned numerically by the tests
(the opposite convention, ``Haar(S·g) = D(g)·Haar(S)``, fails that
identity by a factor ``D(g)^2`` and is a classical trap).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateWindowError,
    IntegrationDomainError,
    ModelMismatchError,
    ParameterError,
)

KINDS = ("R", "R2", "R3", "Zd", "affine")

#: tolerance for exact algebraic identities in floating point
ALGEBRA_TOL = 1e-12


def as_element(x, dim, integer=False):
    """Normalize scalars / sequences to a 1-d numpy element vector."""
    arr = np.atleast_1d(np.asarray(x, dtype=np.int64 if integer else np.float64))
    if arr.shape != (dim,):
        raise ModelMismatchError(
            f"element of shape {arr.shape} does not fit a dimension-{dim} model"
        )
    return arr


def as_points(xs, dim, integer=False):
    """Normalize an array-like to shape (n, dim)."""
    arr = np.asarray(xs, dtype=np.int64 if integer else np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, dim) if dim == 1 else arr.reshape(1, dim)
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ModelMismatchError(
            f"point array of shape {arr.shape} does not fit dimension {dim}"
        )
    return arr


@dataclass(frozen=True)
class GroupModel:
    """One of the concrete lcsc groups, with its chart and metric."""

    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown group kind {self.kind!r}")
        expected = {"R": 1, "R2": 2, "R3": 3, "affine": 2}
        if self.kind in expected and self.dim != expected[self.kind]:
            raise ParameterError(f"{self.kind} has dimension {expected[self.kind]}")
        if self.kind == "Zd" and self.dim < 1:
            raise ParameterError("lattice dimension must be >= 1")

    # -- basic structure ---------------------------------------------------

    @property
    def discrete(self):
        return self.kind == "Zd"

    @property
    def abelian(self):
        return self.kind != "affine"

    @property
    def identity(self):
        return np.zeros(self.dim, dtype=np.int64 if self.discrete else np.float64)

    def element(self, x):
        return as_element(x, self.dim, integer=self.discrete)

    def points(self, xs):
        return as_points(xs, self.dim, integer=self.discrete)

    def mul(self, g, h):
        """Group product g·h."""
        g = self.element(g)
        h = self.element(h)
        if self.abelian:
            return g + h
        out = np.empty(2)
        out[0] = g[0] + h[0]
        out[1] = np.exp(g[0]) * h[1] + g[1]
        return out

    def inv(self, g):
        g = self.element(g)
        if self.abelian:
            return -g
        return np.array([-g[0], -np.exp(-g[0]) * g[1]])

    def mul_many(self, gs, x):
        """Products g·x for an (n, dim) array of left factors g."""
        gs = self.points(gs)
        x = self.element(x)
        if self.abelian:
            return gs + x
        out = np.empty_like(gs)
        out[:, 0] = gs[:, 0] + x[0]
        out[:, 1] = np.exp(gs[:, 0]) * x[1] + gs[:, 1]
        return out

    def right_translate_many(self, xs, g):
        """Products x·g for an (n, dim) array of x."""
        xs = self.points(xs)
        g = self.element(g)
        if self.abelian:
            return xs + g
        out = np.empty_like(xs)
        out[:, 0] = xs[:, 0] + g[0]
        out[:, 1] = np.exp(xs[:, 0]) * g[1] + xs[:, 1]
        return out

    def left_translate_many(self, xs, g):
        """Products g·x for an (n, dim) array of x."""
        xs = self.points(xs)
        g = self.element(g)
        if self.abelian:
            return g + xs
        out = np.empty_like(xs)
        out[:, 0] = g[0] + xs[:, 0]
        out[:, 1] = np.exp(g[0]) * xs[:, 1] + g[1]
        return out

    def modular(self, g):
        """Modular factor D(g); see the module docstring for the convention."""
        g = self.element(g)
        if self.abelian:
            return 1.0
        return float(np.exp(g[0]))

    # -- metric ------------------------------------------------------------

    def metric(self, g, h):
        """Compatible proper metric.

        Euclidean on the abelian models; ``|t - t'| + |b - b'|`` in chart
        coordinates on the affine group (balls are chart-compact).
        """
        g = self.element(g)
        h = self.element(h)
        if self.kind == "affine":
            return float(np.abs(g - h).sum())
        return float(np.linalg.norm((g - h).astype(np.float64)))

    def metric_many(self, xs, g):
        """Distances from each row of xs to the single element g."""
        xs = self.points(xs)
        g = self.element(g)
        diff = (xs - g).astype(np.float64)
        if self.kind == "affine":
            return np.abs(diff).sum(axis=1)
        return np.linalg.norm(diff, axis=1)

    def norm_many(self, gs):
        """Distances d(e, g) for each row."""
        return self.metric_many(gs, self.identity)

    # -- chart / Haar ------------------------------------------------------

    def haar_chart_density(self, points):
        """Density of Haar w.r.t. the chart Lebesgue (or counting) measure."""
        points = self.points(points)
        if self.kind == "affine":
            return np.exp(-points[:, 0])
        return np.ones(len(points))

    def ball_window(self, radius):
        """Box circumscribing the metric ball B(e, radius) in the chart."""
        if radius < 0:
            raise ParameterError("radius must be nonnegative")
        if self.discrete:
            r = int(np.floor(radius))
            return Window.box([(-r, r)] * self.dim, integer=True)
        return Window.box([(-radius, radius)] * self.dim)


# canonical constructors -----------------------------------------------------


def make_group(kind, dim=None):
    """Build a model from a config key: R | R2 | R3 | Zd | affine."""
    if kind == "Zd":
        return GroupModel("Zd", int(dim) if dim is not None else 1)
    return GroupModel(kind, {"R": 1, "R2": 2, "R3": 3, "affine": 2}[kind])


def affine_from_ab(a, b):
    """Natural coordinates (a, b), a > 0, to the chart (ln a, b)."""
    if a <= 0:
        raise ParameterError("affine coordinate a must be positive")
    return np.array([np.log(a), float(b)])


def affine_to_ab(g):
    """Chart (t, b) back to natural coordinates (a, b)."""
    g = np.asarray(g, dtype=np.float64)
    return float(np.exp(g[0])), float(g[1])


def lex_key(point):
    """Total order used as the tie-breaker everywhere (coordinatewise)."""
    return tuple(np.asarray(point).tolist())


# windows ---------------------------------------------------------------------


@dataclass(frozen=True)
class Window:
    """Compact axis-aligned box in chart coordinates."""

    lo: np.ndarray
    hi: np.ndarray
    integer: bool = field(default=False)

    @staticmethod
    def box(bounds, integer=False):
        lo = np.array([b[0] for b in bounds], dtype=np.int64 if integer else np.float64)
        hi = np.array([b[1] for b in bounds], dtype=np.int64 if integer else np.float64)
        if np.any(hi < lo):
            raise DegenerateWindowError("window bounds are inverted")
        return Window(lo, hi, integer)

    @property
    def dim(self):
        return len(self.lo)

    @property
    def widths(self):
        return (self.hi - self.lo).astype(np.float64)

    def chart_volume(self):
        if self.integer:
            return float(np.prod(self.hi - self.lo + 1))
        return float(np.prod(self.widths))

    def contains(self, points):
        points = np.asarray(points, dtype=np.float64)
        if points.ndim == 1:
            points = points.reshape(1, -1)
        return np.all((points >= self.lo - 1e-12) & (points <= self.hi + 1e-12), axis=1)

    def erode(self, r):
        lo = self.lo + r
        hi = self.hi - r
        if np.any(hi < lo):
            raise DegenerateWindowError(f"window too small to erode by {r}")
        return Window(lo, hi, self.integer)

    def expand(self, r):
        return Window(self.lo - r, self.hi + r, self.integer)

    def contains_window(self, other):
        return bool(np.all(other.lo >= self.lo - 1e-12) and np.all(other.hi <= self.hi + 1e-12))


def window_haar_mass(model, window):
    """Exact Haar mass of a window (closed form in every chart)."""
    if model.discrete:
        return window.chart_volume()
    if model.kind == "affine":
        t0, t1 = window.lo[0], window.hi[0]
        return float((np.exp(-t0) - np.exp(-t1)) * (window.hi[1] - window.lo[1]))
    return window.chart_volume()


# quadrature ------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureScheme:
    """Deterministic integration scheme: uniform grid or seeded Monte Carlo."""

    method: str = "grid"
    resolution: int = 256
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("grid", "mc"):
            raise ParameterError("quadrature method must be 'grid' or 'mc'")
        if self.resolution < 2:
            raise ParameterError("quadrature resolution must be >= 2")

    def with_resolution(self, resolution):
        return QuadratureScheme(self.method, resolution, self.seed)


def lattice_points(window):
    """All lattice points of an integer window, row-major order."""
    axes = [np.arange(int(lo), int(hi) + 1) for lo, hi in zip(window.lo, window.hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def haar_nodes_weights(model, window, quad, task_index=0):
    """Nodes (n, dim) and Haar weights (n,) for integration over a window.

    Grid nodes are midpoints, so the rule is exact for constants and
    second order for smooth integrands.  Monte Carlo streams are derived
    from ``(seed, task_index)`` so parallel and serial runs agree.
    """
    if window.dim != model.dim:
        raise ModelMismatchError("window dimension does not match the model")
    if model.discrete:
        pts = lattice_points(window)
        return pts, np.ones(len(pts))
    widths = window.widths
    if np.any(widths <= 0):
        raise DegenerateWindowError("continuous window has a zero-width axis")
    if quad.method == "grid":
        n = quad.resolution
        axes = [window.lo[k] + (np.arange(n) + 0.5) * widths[k] / n for k in range(window.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        cell = float(np.prod(widths / n))
        return pts, cell * model.haar_chart_density(pts)
    rng = np.random.default_rng(np.random.SeedSequence((quad.seed, task_index)))
    n = quad.resolution
    pts = window.lo + rng.random((n, window.dim)) * widths
    vol = float(np.prod(widths))
    return pts, (vol / n) * model.haar_chart_density(pts)


def haar_integrate(model, f, window, quad, task_index=0):
    """Approximate the Haar integral of ``f`` over a window.

    ``f`` maps an (n, dim) chart-coordinate array to (n,) values; it must
    be finite on the window.
    """
    pts, wts = haar_nodes_weights(model, window, quad, task_index)
    vals = np.asarray(f(pts), dtype=np.float64)
    if not np.all(np.isfinite(vals)):
        raise IntegrationDomainError("integrand evaluated to a non-finite value")
    return float(np.dot(vals, wts))


def ball_filtration(model, n_max):
    """Windows circumscribing the balls B(e, 2^0), ..., B(e, 2^n_max)."""
    if n_max < 0:
        raise ParameterError("n_max must be >= 0")
    return [model.ball_window(float(2**k)) for k in range(n_max + 1)]

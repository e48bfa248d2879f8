"""Quasi-invariant densities, Radon-Nikodym cocycles and their identities.

A carrier is one of:

* the group itself with a strictly positive closed-form density (the
  measure is ``density * Haar``),
* a finite weighted cycle, evaluated in exact rational arithmetic and
  used as the brute-force oracle,
* the unit circle flowed by the reals at a fixed slope (probability
  preserving, cocycle identically 1),
* the circle with a density, a compact-group corner case for the Hopf
  classifier.

For a translation carrier the cocycle is ``nabla_g(x) = d(g·x)/d(x)``
where ``d`` is the density in chart coordinates.  The operator

    S_f(x) = integral over G_E(x) of nabla_g(x) f(g.x) dHaar(g)

is evaluated by the exact change of variables ``y = g·x``, which turns it
into ``modular(x)/d(x)`` times the mu-integral of ``f`` over the class of
``x``; the quotient ``S_f / S_1`` is then a mu-weighted class average and
is constant along the class by construction.  A direct g-space evaluation
is kept alongside for cross-validation on the line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    CriterionInapplicableError,
    IntegrationDomainError,
    ParameterError,
    PositivityError,
    PreconditionError,
)
from .group_core import (
    QuadratureScheme,
    Window,
    haar_nodes_weights,
    make_group,
    window_haar_mass,
)
from .regions import IntervalUnion, region_integrate

# shared Hopf verdict thresholds (calibrated on the closed-form extremes)
DISSIPATIVE_TAIL_FRACTION = 0.01
CONSERVATIVE_GROWTH_SLACK = 0.10
TAIL_STEPS = 3


# -- density menu --------------------------------------------------------------


class DensitySpec:
    """Strictly positive closed-form density on a group chart.

    Kinds: ``const`` (identically 1), ``plateau`` (1 + height on a box),
    ``bump`` (1 + height * squared-cosine hill, C^1), ``cauchy``
    (c / (1 + x^2) on the line; the default c = 1/pi gives a probability).
    """

    def __init__(self, kind, dim=1, height=1.0, box=None, center=0.0, width=1.0, c=1.0 / math.pi):
        if kind not in ("const", "plateau", "bump", "cauchy"):
            raise ParameterError(f"unknown density kind {kind!r}")
        self.kind = kind
        self.dim = int(dim)
        self.height = float(height)
        self.center = np.full(self.dim, center, dtype=np.float64) if np.isscalar(center) else np.asarray(center, dtype=np.float64)
        self.width = np.full(self.dim, width, dtype=np.float64) if np.isscalar(width) else np.asarray(width, dtype=np.float64)
        self.c = float(c)
        if kind == "plateau":
            if box is None:
                box = [(0.0, 1.0)] * self.dim
            self.box_lo = np.array([b[0] for b in box], dtype=np.float64)
            self.box_hi = np.array([b[1] for b in box], dtype=np.float64)
            if self.height <= -1:
                raise ParameterError("plateau height must exceed -1")
        if kind == "bump" and self.height <= -1:
            raise ParameterError("bump height must exceed -1")
        if kind == "cauchy":
            if self.dim != 1:
                raise ParameterError("cauchy density is one-dimensional")
            if self.c <= 0:
                raise ParameterError("cauchy scale must be positive")

    # evaluation ---------------------------------------------------------

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, self.dim)
        if self.kind == "const":
            return np.ones(len(pts))
        if self.kind == "plateau":
            inside = np.all((pts >= self.box_lo) & (pts < self.box_hi), axis=1)
            return 1.0 + self.height * inside.astype(np.float64)
        if self.kind == "bump":
            rel = (pts - self.center) / self.width
            inside = np.abs(rel) <= 0.5
            hill = np.where(inside, np.cos(np.pi * rel) ** 2, 0.0)
            return 1.0 + self.height * hill.prod(axis=1)
        return self.c / (1.0 + pts[:, 0] ** 2)

    def at(self, x):
        return float(self(np.atleast_2d(np.asarray(x, dtype=np.float64)))[0])

    # declared bounds ------------------------------------------------------

    @property
    def inf_density(self):
        if self.kind == "const":
            return 1.0
        if self.kind in ("plateau", "bump"):
            return min(1.0, 1.0 + self.height)
        return 0.0

    @property
    def sup_density(self):
        if self.kind == "const":
            return 1.0
        if self.kind in ("plateau", "bump"):
            return max(1.0, 1.0 + self.height)
        return self.c

    @property
    def total_mass(self):
        return self.c * math.pi if self.kind == "cauchy" else math.inf

    @property
    def is_probability(self):
        return self.kind == "cauchy" and abs(self.total_mass - 1.0) < 1e-12

    @property
    def perturbation_support(self):
        """Box outside which the density equals 1 (None for cauchy/const)."""
        if self.kind == "plateau":
            return self.box_lo.copy(), self.box_hi.copy()
        if self.kind == "bump":
            return self.center - self.width / 2.0, self.center + self.width / 2.0
        return None

    # closed-form masses and CDFs -----------------------------------------

    def mass_on(self, window):
        """Exact mu-mass of a box window (Lebesgue base measure)."""
        vol = float(np.prod(window.widths))
        if self.kind == "const":
            return vol
        if self.kind == "plateau":
            overlap = np.maximum(
                0.0, np.minimum(window.hi, self.box_hi) - np.maximum(window.lo, self.box_lo)
            )
            return vol + self.height * float(np.prod(overlap))
        if self.kind == "bump":
            per_axis = [
                self._bump_axis_integral(window.lo[k], window.hi[k], k)
                for k in range(self.dim)
            ]
            return vol + self.height * float(np.prod(per_axis))
        lo, hi = float(window.lo[0]), float(window.hi[0])
        return self.c * (math.atan(hi) - math.atan(lo))

    def _bump_axis_integral(self, lo, hi, k):
        # antiderivative of cos^2(pi (x - c)/w) on the hill support
        c, w = float(self.center[k]), float(self.width[k])
        a, b = max(lo, c - w / 2), min(hi, c + w / 2)
        if b <= a:
            return 0.0

        def F(x):
            u = (x - c) / w
            return w * (u / 2.0 + math.sin(2 * math.pi * u) / (4 * math.pi))

        return F(b) - F(a)

    def cdf0(self, x):
        """Signed mu-mass of [0, x] (one-dimensional kinds)."""
        if self.dim != 1:
            raise ParameterError("cdf0 is one-dimensional")
        x = float(x)
        lo, hi = min(0.0, x), max(0.0, x)
        m = self.mass_on(Window.box([(lo, hi)]))
        return m if x >= 0 else -m

    def inv_cdf0(self, u):
        """Inverse of cdf0, by monotone bisection (density >= inf > 0).

        For the cauchy kind the reachable quantiles are bounded by the
        (finite) tail masses; values beyond that are rejected.
        """
        lo, hi = -1.0, 1.0
        while self.cdf0(lo) > u:
            lo *= 2.0
            if lo < -1e9:
                raise ParameterError(f"quantile {u} below the reachable mass range")
        while self.cdf0(hi) < u:
            hi *= 2.0
            if hi > 1e9:
                raise ParameterError(f"quantile {u} above the reachable mass range")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.cdf0(mid) < u:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


def make_density(cfg):
    """DensitySpec from a config block {kind, params...}."""
    kind = cfg["kind"]
    kwargs = {k: v for k, v in cfg.items() if k != "kind"}
    if "box" in kwargs:
        kwargs["box"] = [tuple(b) for b in kwargs["box"]]
    return DensitySpec(kind, **kwargs)


# -- carriers ------------------------------------------------------------------


class TranslationSystem:
    """The group acting on itself by left translation, mu = density * Haar."""

    def __init__(self, model, density):
        if density.dim != model.dim:
            raise ParameterError("density dimension does not match the model")
        self.model = model
        self.density = density

    @property
    def is_probability(self):
        return self.density.is_probability and not self.model.discrete

    def group_mul(self, g, h):
        return self.model.mul(g, h)

    def act(self, g, x):
        return self.model.mul(g, x)

    def act_many(self, gs, x):
        return self.model.mul_many(gs, x)

    def nabla(self, g, x):
        return float(self.density.at(self.act(g, x)) / self.density.at(x))

    def nabla_many(self, gs, x):
        return self.density(self.act_many(gs, x)) / self.density.at(x)

    def sample_mu(self, rng, n):
        if not self.is_probability:
            raise CriterionInapplicableError("sampling needs a probability carrier")
        u = rng.random(n)
        # cauchy inverse CDF: F(x) = c*atan(x) + 1/2 with c = 1/pi
        return np.tan(np.pi * (u - 0.5)).reshape(-1, 1)


class FiniteWeightedSystem:
    """Cyclic rotation of a finite weighted set; the exact oracle carrier."""

    def __init__(self, weights):
        self.weights = [Fraction(w) for w in weights]
        if any(w <= 0 for w in self.weights):
            raise ParameterError("weights must be positive")
        self.size = len(self.weights)
        self.total = sum(self.weights)

    @property
    def is_probability(self):
        return self.total == 1

    def group_mul(self, g, h):
        return (int(g) + int(h)) % self.size

    def act(self, g, x):
        return (int(x) + int(g)) % self.size

    def nabla(self, g, x):
        return self.weights[self.act(g, x)] / self.weights[int(x)]

    def nabla_float(self, g, x):
        return float(self.nabla(g, x))

    def class_average(self, f_values, cls):
        """Exact mu-weighted average of f over a class (list of atoms)."""
        num = sum(self.weights[i] * Fraction(f_values[i]) for i in cls)
        den = sum(self.weights[i] for i in cls)
        return num / den

    def s_operator(self, f_values, x, cls):
        """S_f(x) as the exact finite sum over the class displacement set."""
        return sum(self.weights[y] * Fraction(f_values[y]) for y in cls) / self.weights[int(x)]


class TorusFlowSystem:
    """Line flow on the circle: g.y = y + slope*g mod 1; probability preserving."""

    def __init__(self, slope=1.0):
        if slope == 0:
            raise ParameterError("slope must be nonzero")
        self.slope = float(slope)
        self.model = make_group("R")
        self.is_probability = True

    def group_mul(self, g, h):
        return self.model.mul(g, h)

    def act(self, g, y):
        g = float(np.atleast_1d(g)[0])
        y = float(np.atleast_1d(y)[0])
        return np.array([(y + self.slope * g) % 1.0])

    def act_many(self, gs, y):
        gs = np.asarray(gs, dtype=np.float64).reshape(-1, 1)
        y = float(np.atleast_1d(y)[0])
        return (y + self.slope * gs) % 1.0

    def nabla(self, g, y):
        return 1.0

    def nabla_many(self, gs, y):
        return np.ones(len(np.asarray(gs).reshape(-1, 1)))

    def sample_mu(self, rng, n):
        return rng.random((n, 1))


class CircleDensitySystem:
    """A compact group carrier: the circle translating itself, with a
    normalized density; used to pin the compact-group Hopf convention."""

    def __init__(self, density):
        if density.dim != 1:
            raise ParameterError("circle carrier is one-dimensional")
        self.density = density
        self.norm = density.mass_on(Window.box([(0.0, 1.0)]))
        self.is_probability = True
        self.model = make_group("R")  # chart for windows; group is the circle

    def density_at(self, y):
        return self.density.at([float(y) % 1.0]) / self.norm

    def group_mul(self, g, h):
        return np.atleast_1d(np.asarray(g, dtype=np.float64)) + np.atleast_1d(
            np.asarray(h, dtype=np.float64)
        )

    def act(self, g, y):
        return np.array([(float(np.atleast_1d(y)[0]) + float(np.atleast_1d(g)[0])) % 1.0])

    def nabla(self, g, y):
        return self.density_at(float(np.atleast_1d(y)[0]) + float(np.atleast_1d(g)[0])) / self.density_at(
            float(np.atleast_1d(y)[0])
        )

    def ball(self, r):
        r = min(float(r), 0.5)
        return Window.box([(-r, r)])


def nabla(sys, g, x):
    """Radon-Nikodym cocycle value of the carrier."""
    v = sys.nabla(g, x)
    return float(v)


def cocycle_residual(sys, g, h, x):
    """|nabla_{g h}(x) - nabla_g(h.x) * nabla_h(x)|; zero in exact arithmetic."""
    gh = sys.group_mul(g, h)
    return abs(nabla(sys, gh, x) - nabla(sys, g, sys.act(h, x)) * nabla(sys, h, x))


# -- Fubini identity -----------------------------------------------------------


def fubini_check(sys, f0, f1, phi, g_window, x_window, quad):
    """Relative residual between the two sides of the weighted Fubini identity.

    Left side integrand: nabla_g(x) f0(g.x) f1(x) phi(g); right side:
    f0(x) f1(g^{-1}.x) phi(g); both against dHaar(g) dmu(x).  Test
    functions must be nonnegative, bounded and finite on the windows.
    """
    if not isinstance(sys, TranslationSystem):
        raise ParameterError("the Fubini check runs on translation carriers")
    model = sys.model
    g_nodes, g_wts = haar_nodes_weights(model, g_window, quad)
    x_nodes, x_wts = haar_nodes_weights(model, x_window, quad)
    dens_x = sys.density(x_nodes)
    f1_x = np.asarray(f1(x_nodes), dtype=np.float64)
    f0_x = np.asarray(f0(x_nodes), dtype=np.float64)
    phi_g = np.asarray(phi(g_nodes), dtype=np.float64)
    for vals in (f1_x, f0_x, phi_g):
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise IntegrationDomainError("test functions must be finite and nonnegative")
    lhs = 0.0
    rhs = 0.0
    for i in range(len(g_nodes)):
        if phi_g[i] == 0.0:
            continue
        g = g_nodes[i]
        gx_nodes = model.left_translate_many(x_nodes, g)
        inv_gx = model.left_translate_many(x_nodes, model.inv(g))
        lhs_inner = np.dot(
            sys.density(gx_nodes) * np.asarray(f0(gx_nodes), dtype=np.float64) * f1_x, x_wts
        )
        rhs_inner = np.dot(
            f0_x * np.asarray(f1(inv_gx), dtype=np.float64) * dens_x, x_wts
        )
        lhs += phi_g[i] * g_wts[i] * lhs_inner
        rhs += phi_g[i] * g_wts[i] * rhs_inner
    return abs(lhs - rhs) / max(abs(lhs), 1.0)


# -- conditional expectation on a compact OER ----------------------------------


def _class_integral(sys, region, f, quad):
    """mu-integral of f over a class region of a translation carrier."""
    dens = sys.density
    if f is None:
        integrand = lambda pts: dens(pts)
    else:
        integrand = lambda pts: dens(pts) * np.asarray(f(pts), dtype=np.float64)
    return region_integrate(sys.model, region, integrand, quad)


def s_operator(sys, f, x, E, quad):
    """S_f(x) via the exact change of variables onto the class region."""
    if isinstance(sys, FiniteWeightedSystem):
        raise ParameterError("use FiniteWeightedSystem.s_operator for finite carriers")
    x = sys.model.element(x)
    region = E.class_region_of(x)
    prefactor = sys.model.modular(x) / sys.density.at(x)
    return prefactor * _class_integral(sys, region, f, quad)


def s_operator_direct(sys, f, x, E, quad):
    """S_f(x) by direct g-space quadrature over the exact displacement set
    (line carriers); independent of the change-of-variables route."""
    region = E.g_region_of(x)
    if region is None:
        raise ParameterError("no exact displacement set on this carrier")
    x = sys.model.element(x)

    def integrand(gs):
        orbit = sys.act_many(gs, x)
        vals = sys.nabla_many(gs, x)
        if f is not None:
            vals = vals * np.asarray(f(orbit), dtype=np.float64)
        return vals

    return region_integrate(sys.model, region, integrand, quad)


def cond_exp_ratio(sys, f, x, E, quad, direct=False):
    """Class-conditional expectation S_f(x) / S_1(x).

    For translation carriers this reduces to the mu-weighted average of f
    over the class of x, hence is constant along the class.  ``direct``
    switches to the g-space evaluation where available.
    """
    if isinstance(sys, FiniteWeightedSystem):
        raise ParameterError("use FiniteWeightedSystem.class_average for finite carriers")
    op = s_operator_direct if direct else s_operator
    den = op(sys, None, x, E, quad)
    if den <= 1e-12:
        raise PositivityError("class has numerically zero mass; positivize first")
    return op(sys, f, x, E, quad) / den


def transformation_check(sys, f, x, g, E, quad, direct=False):
    """Relative residual of S_f(g.x) = nabla_g(x)^{-1} * modular(g) * S_f(x)."""
    x = sys.model.element(x)
    g = sys.model.element(g)
    gx = sys.act(g, x)
    if E.class_of(gx) != E.class_of(x):
        raise PreconditionError("g does not keep x inside its class")
    op = s_operator_direct if direct else s_operator
    lhs = op(sys, f, gx, E, quad)
    rhs = (1.0 / sys.nabla(g, x)) * sys.model.modular(g) * op(sys, f, x, E, quad)
    return abs(lhs - rhs) / max(abs(lhs), 1e-30)


# -- Hopf classification -------------------------------------------------------


def _verdict(partials, volumes):
    increments = np.diff(partials, prepend=0.0)
    vol_ratios = volumes[1:] / volumes[:-1]
    part_ratios = partials[1:] / np.maximum(partials[:-1], 1e-300)
    if np.all(np.abs(np.diff(volumes)[-TAIL_STEPS:]) <= 1e-12 * volumes[-1]):
        return "conservative", True  # compact group: Haar itself is finite
    tail = increments[-TAIL_STEPS:]
    if np.all(tail < DISSIPATIVE_TAIL_FRACTION * partials[-1]):
        return "dissipative", False
    close = np.abs(part_ratios - vol_ratios) <= CONSERVATIVE_GROWTH_SLACK * vol_ratios
    if np.all(close[-TAIL_STEPS:]):
        return "conservative", False
    return "inconclusive", False


def hopf_classify(sys, x, radii, quad):
    """Partial integrals of g -> nabla_g(x) over growing balls, with verdict.

    Requires a probability carrier.  Verdict rules (shared with the
    suspension classifier): geometric tail decay of the increments means
    dissipative; tracking the ball-volume growth within 10% means
    conservative; a compact group is flagged and called conservative.
    """
    if not getattr(sys, "is_probability", False):
        raise CriterionInapplicableError("the integral criterion needs a probability measure")
    radii = sorted(float(r) for r in radii)
    partials = []
    volumes = []
    for r in radii:
        if isinstance(sys, CircleDensitySystem):
            ball = sys.ball(r)
            nodes, wts = haar_nodes_weights(sys.model, ball, quad)
            vals = np.array([sys.nabla(gs, x) for gs in nodes[:, 0]])
            partials.append(float(np.dot(vals, wts)))
            volumes.append(window_haar_mass(sys.model, ball))
            continue
        ball = sys.model.ball_window(r)
        nodes, wts = haar_nodes_weights(sys.model, ball, quad)
        vals = sys.nabla_many(nodes, x)
        partials.append(float(np.dot(vals, wts)))
        volumes.append(window_haar_mass(sys.model, ball))
    partials = np.array(partials)
    volumes = np.array(volumes)
    verdict, compact = _verdict(partials, volumes)
    rows = [
        {
            "radius": radii[k],
            "partial_integral": float(partials[k]),
            "increment": float(partials[k] - (partials[k - 1] if k else 0.0)),
            "ball_volume": float(volumes[k]),
        }
        for k in range(len(radii))
    ]
    return {"rows": rows, "verdict": verdict, "compact_group": compact}

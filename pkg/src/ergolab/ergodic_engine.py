"""Ratio ergodic averaging along growing windows and filtration classes.

The central quantity is

    A_S f(x) = integral over S of nabla_g(x) f(g.x) dHaar(g)
               ---------------------------------------------
               integral over S of nabla_g(x) dHaar(g)

for a carrier point x and a relatively compact S.  Along an equicompact
family (a realized random dyadic window, or the displacement sets of a
dyadic tile filtration) the averages converge to the invariant
conditional expectation; on ergodic probability carriers the target is
the plain mean of f.  Exact finite-sum oracles on lattice carriers pin
the continuous engine down to rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cocycle import FiniteWeightedSystem, TranslationSystem, cond_exp_ratio
from .errors import DegenerateWindowError, CriterionInapplicableError, ParameterError
from .filtration import FiltrationStructure, RandomDyadicFiltration, folner_stat
from .group_core import Window, haar_nodes_weights
from .poisson import PointConfiguration, act, pi_apply, rn_star_many, sample_config
from .regions import IntervalUnion, region_integrate


def ratio_average(sys, f, x, S, quad):
    """Weighted orbit average of f over the window or interval union S."""

    def weighted(gs, with_f):
        vals = np.asarray(sys.nabla_many(gs, x), dtype=np.float64)
        if with_f:
            vals = vals * np.asarray(f(sys.act_many(gs, x)), dtype=np.float64)
        return vals

    if isinstance(S, IntervalUnion):
        den = region_integrate(sys.model, S, lambda gs: weighted(gs, False), quad)
        num = region_integrate(sys.model, S, lambda gs: weighted(gs, True), quad)
    else:
        nodes, wts = haar_nodes_weights(sys.model, S, quad)
        den = float(np.dot(weighted(nodes, False), wts))
        num = float(np.dot(weighted(nodes, True), wts))
    if den <= 0:
        raise DegenerateWindowError("zero averaging denominator")
    return num / den


def countable_oracle(sys, f, x, S):
    """Exact rational weighted average over a finite set of lattice shifts.

    ``sys`` is a lattice translation carrier; floats are converted to the
    rationals they already are, so the sum is exact.
    """
    if not sys.model.discrete:
        raise ParameterError("the exact oracle runs on lattice carriers")
    x = sys.model.element(x)
    num = Fraction(0)
    den = Fraction(0)
    for g in S:
        g = sys.model.element(g)
        gx = sys.model.mul(g, x)
        w = Fraction(float(sys.density.at(gx))) / Fraction(float(sys.density.at(x)))
        num += w * Fraction(float(f(gx.reshape(1, -1))[0]))
        den += w
    if den == 0:
        raise DegenerateWindowError("zero averaging denominator")
    return num / den


@dataclass
class ConvergenceReport:
    """Per-level averaging diagnostics for one run."""

    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def append(self, **row):
        if self.rows and row["n"] <= self.rows[-1]["n"]:
            raise ParameterError("levels must be strictly increasing")
        for key in ("l1_error", "sup_error"):
            if row.get(key, 0.0) < 0:
                raise ParameterError("errors must be nonnegative")
        self.rows.append(row)

    def column(self, key):
        return np.array([r[key] for r in self.rows])


def random_ratio_run(
    sys,
    f,
    filtration,
    xs,
    N,
    quad,
    target=None,
    folner_K=None,
    condexp_check=False,
):
    """Ratio averages per level for a sample of carrier points.

    ``filtration`` is either a realized random dyadic window family (one
    realization, shared by all sample points) or a tile filtration (then
    S_n = G_{E_n}(x), and the average is cross-checked against the
    class-conditional expectation).  ``target`` is the convergence target:
    a constant, a callable of x, or None for the mean of the final level.
    """
    report = ConvergenceReport()
    report.meta = {
        "samples": len(xs),
        "levels": N + 1,
        "kind": type(filtration).__name__,
    }
    target_fn = None
    if target is not None:
        target_fn = target if callable(target) else (lambda _x: float(target))
    for n in range(N + 1):
        values = []
        devs = []
        stat = None
        if isinstance(filtration, RandomDyadicFiltration):
            S = filtration.window(n)
            if folner_K is not None:
                stat = folner_stat(S, folner_K, sys.model)
        else:
            S = None
        for x in xs:
            Sx = S if S is not None else filtration.g_region_of(x, n)
            values.append(ratio_average(sys, f, x, Sx, quad))
            if condexp_check and isinstance(filtration, FiltrationStructure):
                ref = cond_exp_ratio(sys, f, x, filtration.level_oer(n), quad)
                devs.append(abs(values[-1] - ref))
        values = np.array(values)
        if target_fn is not None:
            errs = np.abs(values - np.array([target_fn(x) for x in xs]))
            l1, sup = float(errs.mean()), float(errs.max())
        else:
            l1 = sup = float("nan")
        report.append(
            n=n,
            mean_value=float(values.mean()),
            l1_error=l1,
            sup_error=sup,
            folner_stat=float(stat) if stat is not None else float("nan"),
            condexp_dev=float(max(devs)) if devs else float("nan"),
        )
    return report


# -- diagonal product ----------------------------------------------------------


class DiagonalProductSystem:
    """Diagonal action on a product carrier; the cocycle lives on the first
    factor because the auxiliary is probability preserving."""

    def __init__(self, sysX, aux):
        if not getattr(aux, "is_probability", False):
            raise ParameterError("the auxiliary factor must be probability preserving")
        self.sysX = sysX
        self.aux = aux
        self.model = sysX.model
        self.is_probability = getattr(sysX, "is_probability", False)

    def act(self, g, xy):
        x, y = xy
        return (self.sysX.act(g, x), self.aux.act(g, y))

    def nabla(self, g, xy):
        return self.sysX.nabla(g, xy[0])

    def nabla_many(self, gs, xy):
        return self.sysX.nabla_many(gs, xy[0])

    def act_many(self, gs, xy):
        return self.sysX.act_many(gs, xy[0])

    def group_mul(self, g, h):
        return self.sysX.group_mul(g, h)

    def orbit_windows(self, seed, N):
        """Realized random equicompact windows delegated to the auxiliary."""
        from .filtration import random_dyadic

        return random_dyadic(seed, N, self.model.dim)

    def freeness_probe(self, y, window, samples=2001):
        """Largest-resolution check that only g = e fixes the auxiliary point
        inside the window."""
        gs = np.linspace(float(window.lo[0]), float(window.hi[0]), samples)
        fixed = []
        for g in gs:
            moved = self.aux.act(np.array([g]), y)
            if abs(float(moved[0]) - float(np.atleast_1d(y)[0])) < 1e-9 and abs(g) > 1e-9:
                fixed.append(float(g))
        return fixed


def diagonal_product(sysX, aux):
    """Product carrier with diagonal action; cocycle equals the X cocycle."""
    return DiagonalProductSystem(sysX, aux)


# -- suspension averaging -------------------------------------------------------


class CountFunctional:
    """Bounded uniformly continuous functional of one window count.

    ``exp``: p -> exp(-N_A(p)); ``min``: p -> min(N_A(p), cap).  Both are
    bounded functions of finitely many counts, hence vaguely uniformly
    continuous, which the averaging comparison requires.
    """

    def __init__(self, kind, lo, hi, cap=3):
        if kind not in ("exp", "min"):
            raise ParameterError("functional kind must be 'exp' or 'min'")
        self.kind = kind
        self.lo = float(lo)
        self.hi = float(hi)
        self.cap = int(cap)

    def __call__(self, p):
        n = p.count(self.lo, self.hi)
        return math.exp(-n) if self.kind == "exp" else float(min(n, self.cap))

    def values_for_shifts(self, p, gs):
        """phi(g.p) for an array of g: counts shift by +g."""
        counts = p.counts_for_shifts(self.lo, self.hi, np.asarray(gs))
        if self.kind == "exp":
            return np.exp(-counts.astype(np.float64))
        return np.minimum(counts, self.cap).astype(np.float64)

    def label(self):
        return f"{self.kind}_count[{self.lo},{self.hi}]"


def make_functional(cfg):
    return CountFunctional(
        cfg.get("kind", "exp"), cfg["lo"], cfg["hi"], cfg.get("cap", 3)
    )


def suspension_averages(p, phi, S, quad, weights_of=None, phi_of=None):
    """(A_S phi(p), denominator) by grid quadrature over the window S.

    ``weights_of`` overrides the configuration whose derivative weights
    are used; ``phi_of`` overrides the configuration the functional sees
    (both default to p) — the cross terms of the sandwich comparison need
    exactly those mismatched variants.
    """
    lo, hi = float(S.lo[0]), float(S.hi[0])
    n = max(quad.resolution, int(2 * (hi - lo)))
    gs = lo + (np.arange(n) + 0.5) * (hi - lo) / n
    wp = p if weights_of is None else weights_of
    fp = p if phi_of is None else phi_of
    weights = rn_star_many(gs, wp)
    vals = phi.values_for_shifts(fp, gs)
    den = float(np.sum(weights) * (hi - lo) / n)
    num = float(np.sum(weights * vals) * (hi - lo) / n)
    if den <= 0:
        raise DegenerateWindowError("zero averaging denominator")
    return num / den, den


def hopf_ergodicity_experiment(
    density,
    window,
    phis,
    pis,
    N,
    seeds,
    quad,
    alpha=0.5,
    radii=(1, 2, 4, 8, 16, 32),
    mc_tolerance=0.05,
):
    """Averaging comparison on a conservative suspension.

    For every functional, transform and sampled configuration, the
    experiment checks, at every level: the sandwich bound between the
    transformed average and the cross average (exponent 16 on the
    per-point factor), the vanishing of the cross term against the plain
    average, and finally the concentration of the top-level averages
    across configurations with and without the transform.  A dissipative
    suspension refuses to run: there is nothing to compare.
    """
    from .poisson import hopf_classify_suspension

    probe = sample_config(density, window, int(seeds[0]))
    classification = hopf_classify_suspension(probe, density, radii, quad)
    if classification["verdict"] == "dissipative":
        raise CriterionInapplicableError(
            "dissipative suspension: the comparison is void"
        )
    if density.kind != "const" and not (
        alpha <= density.inf_density <= density.sup_density <= 1.0 / alpha
    ):
        raise ParameterError("alpha must bracket the density range")
    rows = []
    finals = {}
    for seed in seeds:
        p = sample_config(density, window, int(seed))
        from .filtration import random_dyadic

        dyadic = random_dyadic(int(seed) + 7_777_777, N, 1)
        for phi in phis:
            plain_prev = None
            for pi_idx, pi in enumerate([None] + list(pis)):
                q = p if pi is None else pi_apply(pi, p)
                if pi is None:
                    upsilon = 1.0
                else:
                    n_supp = p.count(float(pi.support.lo[0]), float(pi.support.hi[0]))
                    upsilon = (1.0 if density.kind == "const" else alpha) ** n_supp
                ea2_prev = None
                for n in range(N + 1):
                    S = dyadic.window(n)
                    a_q, den = suspension_averages(q, phi, S, quad)
                    if pi is None:
                        a_p = a_q
                        cross = a_q
                    else:
                        a_p, _ = suspension_averages(p, phi, S, quad)
                        cross, _ = suspension_averages(
                            p, phi, S, quad, weights_of=p, phi_of=q
                        )
                    lo_bound = upsilon**16 * cross
                    hi_bound = cross / upsilon**16
                    sandwich_ok = (
                        lo_bound - 1e-10 <= a_q <= hi_bound + 1e-10
                        if pi is not None
                        else True
                    )
                    ea2_gap = abs(cross - a_p)
                    rows.append(
                        {
                            "seed": int(seed),
                            "phi": phi.label(),
                            "pi": pi_idx,
                            "n": n,
                            "window_mass": float(2.0**n),
                            "value": a_q,
                            "plain_value": a_p,
                            "cross_value": cross,
                            "denominator": den,
                            "upsilon": upsilon,
                            "sandwich_ok": bool(sandwich_ok),
                            "ea2_gap": ea2_gap,
                        }
                    )
                    if n == N:
                        finals.setdefault((phi.label(), pi_idx), []).append(a_q)
    summary = _summarize_ergodicity(rows, finals, mc_tolerance)
    summary["classification"] = classification["verdict"]
    return {"rows": rows, "summary": summary}


def _summarize_ergodicity(rows, finals, mc_tolerance):
    sandwich_all = all(r["sandwich_ok"] for r in rows)
    spreads = {}
    agreements = {}
    for (phi_label, pi_idx), values in finals.items():
        values = np.array(values)
        spreads[f"{phi_label}|pi{pi_idx}"] = float(values.std(ddof=1)) if len(values) > 1 else 0.0
        if pi_idx != 0:
            base = np.array(finals[(phi_label, 0)])
            se = math.sqrt(
                values.var(ddof=1) / len(values) + base.var(ddof=1) / len(base)
            )
            z = abs(float(values.mean() - base.mean())) / se if se > 0 else 0.0
            agreements[f"{phi_label}|pi{pi_idx}"] = z
    spread_ok = all(s <= mc_tolerance for s in spreads.values())
    agree_ok = all(z <= 3.0 for z in agreements.values())
    # denominators must blow up on a conservative suspension
    denom_ok = True
    growths = []
    by_run = {}
    for r in rows:
        by_run.setdefault((r["seed"], r["phi"], r["pi"]), []).append(r)
    for run in by_run.values():
        dens = [r["denominator"] for r in sorted(run, key=lambda r: r["n"])]
        ratios = [b / a for a, b in zip(dens, dens[1:]) if a > 0]
        growths.extend(ratios)
        if any(b <= a for a, b in zip(dens, dens[1:])):
            denom_ok = False
    return {
        "sandwich_pass_rate": float(np.mean([r["sandwich_ok"] for r in rows])),
        "sandwich_all": sandwich_all,
        "spreads": spreads,
        "pi_agreement_z": agreements,
        "denominator_increasing": denom_ok,
        "min_denominator_growth": float(min(growths)) if growths else float("nan"),
        "ergodicity_consistent": bool(sandwich_all and spread_ok and agree_ok),
    }

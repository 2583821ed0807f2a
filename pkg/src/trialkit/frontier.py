"""Payoff frontier tracing and equilibrium / refinement classification.

Seller payoff pairs (pi_L, pi_H) are traced by sweeping the weight wl; a
candidate pair is an equilibrium payoff when the high type clears the
free-trial revenue and the pair sits weakly below the frontier along a
45-degree price reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._roots import bisect_root
from .errors import WeightOutOfRange
from .primitives import ModelParams, ValueDistribution
from .trial import SolveReport, free_trial, solve_trial, weight_cap

_LABEL_TOL = 1e-9


@dataclass(frozen=True)
class PayoffPoint:
    pi_L: float
    pi_H: float
    wl: float | None = None
    label: str = "generic"
    report: SolveReport | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class D1Segment:
    """The price segment surviving the D1 refinement: trial (v_M, t_M, p) for
    p in [0, pi_L_D]; the payoff difference is pi_F all along it."""

    point_D: PayoffPoint
    point_F: PayoffPoint
    t_M: float
    v_M: float
    pi_L_D: float


def _label_for(wl: float, mu0: float) -> str:
    if abs(wl - weight_cap(mu0)) <= _LABEL_TOL:
        return "B"
    if abs(wl + 1.0) <= _LABEL_TOL:
        return "F"
    if abs(wl) <= _LABEL_TOL:
        return "H"
    return "generic"


def trace_frontier(
    params: ModelParams, dist: ValueDistribution, wl_grid
) -> list[PayoffPoint]:
    """One frontier point per weight, canonical p0 = 0 selection at wl <= -1."""
    cap = weight_cap(params.mu0)
    pts = []
    for wl in sorted(float(w) for w in wl_grid):
        if wl > cap + 1e-12:
            raise WeightOutOfRange(f"wl={wl:g} above the cap {cap:g}")
        rep = solve_trial(params, dist, wl)
        pts.append(
            PayoffPoint(
                pi_L=rep.payoff_L,
                pi_H=rep.payoff_H,
                wl=wl,
                label=_label_for(wl, params.mu0),
                report=rep,
            )
        )
    return pts


def default_weight_grid(mu0: float, n: int = 256) -> np.ndarray:
    """Evenly spaced weights from -1 to the cap (inclusive)."""
    return np.linspace(-1.0, weight_cap(mu0), n)


def is_equilibrium_payoff(
    point: PayoffPoint,
    params: ModelParams,
    dist: ValueDistribution,
    *,
    tol: float | None = None,
) -> bool:
    """Membership test for a reasonable payoff pair.

    Requires pi_H >= pi_F, then searches for a weight whose frontier point
    dominates ``point`` along the 45-degree line: the scalar gap
    g(wl) = (pi_L*(wl) - pi_L) - (pi_H*(wl) - pi_H) is increasing in wl,
    so a sign change pins the matching weight by bisection. Queries with
    pi_H < pi_L or pi_L < 0 are refused.
    """
    if point.pi_L < 0.0 or point.pi_H < point.pi_L:
        raise ValueError(
            "membership is defined only for reasonable payoffs "
            "(pi_L >= 0 and pi_H >= pi_L)"
        )
    if tol is None:
        tol = 1e-8 * (1.0 + params.lam * params.horizon)
    _, _, pi_F = free_trial(params, dist)
    if point.pi_H < pi_F - tol:
        return False

    cap = weight_cap(params.mu0)

    def gap(wl: float) -> float:
        rep = solve_trial(params, dist, wl)
        return (rep.payoff_L - point.pi_L) - (rep.payoff_H - point.pi_H)

    g_lo = (0.0 - point.pi_L) - (pi_F - point.pi_H)
    if g_lo > tol:
        # payoff difference exceeds pi_F: not supportable at any weight
        return False
    if g_lo >= 0.0:
        # difference equals pi_F within noise: the wl = -1 price interval applies
        rep = solve_trial(params, dist, -1.0)
        return rep.price_interval.hi - point.pi_L >= -tol
    g_hi = gap(cap)
    if g_hi < 0.0:
        return abs(g_hi) <= tol
    wl_star = bisect_root(gap, -1.0, cap, tol=1e-9, f_lo=g_lo, f_hi=g_hi)
    rep = solve_trial(params, dist, wl_star)
    # at wl = -1 the whole price interval is feasible, compare to its top
    best_pi_L = rep.price_interval.hi if rep.price_interval is not None else rep.payoff_L
    return best_pi_L - point.pi_L >= -tol


def d1_payoffs(params: ModelParams, dist: ValueDistribution) -> D1Segment:
    """Endpoints of the D1-surviving price segment.

    The top price pi_L_D = lam mu0 t_M + mu0 (1 - e^{-lam t_M})
    lam (T - t_M) E[(v - v_M)+] is the most an uninformed buyer pays
    ex ante for the free-trial allocation.
    """
    lam, T, mu0 = params.lam, params.horizon, params.mu0
    t_M, v_M, pi_F = free_trial(params, dist)
    pi_L_D = lam * mu0 * t_M + mu0 * (1.0 - math.exp(-lam * t_M)) * lam * (
        T - t_M
    ) * dist.excess_above(v_M)
    return D1Segment(
        point_D=PayoffPoint(pi_L=pi_L_D, pi_H=pi_L_D + pi_F, label="D"),
        point_F=PayoffPoint(pi_L=0.0, pi_H=pi_F, label="F"),
        t_M=t_M,
        v_M=v_M,
        pi_L_D=pi_L_D,
    )


def intuitive_criterion_equivalent(dist: ValueDistribution, mu0: float) -> bool:
    """True iff f(1) - (1 - mu0)(1 - F(1)) <= 0, with pdf and cdf extended
    by zero mass outside the support."""
    return float(dist.pdf(1.0)) - (1.0 - mu0) * (1.0 - float(dist.cdf(1.0))) <= 0.0


def frontier_rows(points: list[PayoffPoint]) -> list[tuple]:
    """CSV rows (wl, t0, v0, p0, pi_L, pi_H, label) for a traced frontier."""
    rows = []
    for pt in points:
        if pt.report is None:
            raise ValueError("frontier rows need points produced by trace_frontier")
        m = pt.report.mechanism
        rows.append((pt.wl, m.t0, m.v0, m.p0, pt.pi_L, pt.pi_H, pt.label))
    return rows

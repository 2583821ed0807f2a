"""Weighted-optimal trial mechanisms and the free-trial benchmark.

The solver maximizes wl * payoff_L + payoff_H over trial mechanisms
(p0, t0, v0): full access at ex-ante price p0 until t0, then a premium
continuation priced at lam * v0 * (T - t0) for buyers reporting a value
above v0. Weights run over (-inf, (1 - mu0)/mu0]; any wl below -1 yields
the same mechanism as wl = -1 up to the choice of p0, which is then only
pinned down to an interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from scipy.integrate import quad

from ._roots import bisect_root
from .errors import WeightOutOfRange
from .primitives import ModelParams, ValueDistribution, monopoly_price, virtual_value

BOUNDARY_INTERIOR = "interior_t0"
BOUNDARY_CORNER_T = "corner_t0_equals_T"
BOUNDARY_PRICE_INTERVAL = "wl_leq_minus1_price_interval"

_QUAD_OPTS = dict(epsabs=1e-12, epsrel=1e-9, limit=200)


@dataclass(frozen=True)
class TrialMechanism:
    """Ex-ante price, trial length and upgrade threshold; the premium price
    lam * v0 * (T - t0) is stored explicitly."""

    p0: float
    t0: float
    v0: float
    post_trial_price: float


@dataclass(frozen=True)
class PriceInterval:
    """Admissible ex-ante prices when wl <= -1, plus the selected point."""

    lo: float
    hi: float
    selected: float


@dataclass(frozen=True)
class SolveReport:
    mechanism: TrialMechanism
    pi0: float
    payoff_L: float
    payoff_H: float
    wl: float
    boundary_case: str
    price_interval: PriceInterval | None = None

    @property
    def objective(self) -> float:
        return self.wl * self.payoff_L + self.payoff_H


class FreeTrial(NamedTuple):
    t_M: float
    v_M: float
    pi_F: float


def weight_cap(mu0: float) -> float:
    """Largest admissible low-type weight (1 - mu0) / mu0."""
    return (1.0 - mu0) / mu0


def _hazard_coeff(mu0: float, wl: float) -> float:
    # clamped so wl < -1 reproduces the wl = -1 solution
    return min(max(1.0 - mu0 * max(1.0 + wl, 0.0), 0.0), 1.0)


def make_trial(p0: float, t0: float, v0: float, params: ModelParams) -> TrialMechanism:
    """Assemble a trial mechanism with the implied premium price."""
    return TrialMechanism(
        p0=p0,
        t0=t0,
        v0=v0,
        post_trial_price=params.lam * v0 * (params.horizon - t0),
    )


def solve_v0(dist: ValueDistribution, mu0: float, wl: float) -> float:
    """Upgrade threshold: max(support_lo, root of the hazard-adjusted value).

    The adjustment coefficient is 1 - mu0 * (1 + wl)+. The root is unique
    under regularity; bisection to 1e-10.
    """
    if wl > weight_cap(mu0) + 1e-12:
        raise WeightOutOfRange(
            f"wl={wl:g} above the admissible cap (1 - mu0)/mu0 = {weight_cap(mu0):g}"
        )
    A = _hazard_coeff(mu0, wl)
    lo, hi = dist.support_lo, dist.support_hi
    if virtual_value(dist, lo, A) >= 0.0:
        return lo
    return bisect_root(lambda v: virtual_value(dist, v, A), lo, hi, tol=1e-10)


def expected_virtual_surplus(
    dist: ValueDistribution, mu0: float, wl: float, v0: float
) -> float:
    """Expected hazard-adjusted value above v0 (adaptive quadrature)."""
    A = _hazard_coeff(mu0, wl)
    if A == 0.0:
        return dist.mean
    hi = dist.support_hi
    if v0 >= hi:
        return 0.0
    knots = [x for x in dist.knots if v0 < x < hi]
    val, _ = quad(
        lambda v: virtual_value(dist, v, A) * dist.pdf(v),
        v0,
        hi,
        points=knots or None,
        **_QUAD_OPTS,
    )
    return val


def solve_t0(params: ModelParams, pi0: float, mu0: float, wl: float) -> float:
    """Trial length from the stopping condition.

    Residual lam e^{-lam t}(T - t) - (1 - e^{-lam t}) + mu0 (1 + wl)+ / pi0
    is strictly decreasing, so bisection applies; if even at T the constant
    dominates, the whole horizon is sold.
    """
    if pi0 <= 0.0:
        raise ValueError("pi0 must be positive")
    lam, T = params.lam, params.horizon
    K = mu0 * max(1.0 + wl, 0.0) / pi0
    if 1.0 - math.exp(-lam * T) <= K:
        return T

    def resid(t: float) -> float:
        e = math.exp(-lam * t)
        return lam * e * (T - t) - (1.0 - e) + K

    return bisect_root(resid, 0.0, T, tol=1e-10, f_lo=lam * T + K)


def solve_p0(
    params: ModelParams,
    dist: ValueDistribution,
    v0: float,
    t0: float,
    mu0: float,
    wl: float,
    selection: float = 0.0,
):
    """Ex-ante price from the binding participation constraint.

    p0 = lam mu0 t0 + lam mu0 g1(v0) (T - t0)(1 - e^{-lam t0}), where
    g1(v0) = E[(v - v0)+] is the expected upgrade surplus handed back to the
    buyer. For wl > -1 the constraint binds and the price is unique; for
    wl <= -1 every p0 in [0, that value] is optimal and a PriceInterval is
    returned with ``selection`` in [0, 1] interpolating it (0 by default).
    """
    if not 0.0 <= selection <= 1.0:
        raise ValueError("selection must lie in [0, 1]")
    lam, T = params.lam, params.horizon
    g1 = dist.excess_above(v0)
    cap_price = lam * mu0 * t0 + lam * mu0 * g1 * (T - t0) * (1.0 - math.exp(-lam * t0))
    if wl > -1.0:
        return cap_price
    return PriceInterval(lo=0.0, hi=cap_price, selected=selection * cap_price)


def solve_trial(
    params: ModelParams, dist: ValueDistribution, wl: float, selection: float = 0.0
) -> SolveReport:
    """Compose threshold, length and price into the optimal trial for weight wl."""
    mu0 = params.mu0
    v0 = solve_v0(dist, mu0, wl)
    pi0 = expected_virtual_surplus(dist, mu0, wl, v0)
    t0 = solve_t0(params, pi0, mu0, wl)
    priced = solve_p0(params, dist, v0, t0, mu0, wl, selection=selection)

    interval = None
    if isinstance(priced, PriceInterval):
        interval = priced
        p0 = priced.selected
        boundary = BOUNDARY_PRICE_INTERVAL
    else:
        p0 = priced
        boundary = BOUNDARY_CORNER_T if t0 == params.horizon else BOUNDARY_INTERIOR

    lam, T = params.lam, params.horizon
    upgrade_mass = (1.0 - math.exp(-lam * t0)) * (1.0 - float(dist.cdf(v0)))
    payoff_H = p0 + upgrade_mass * lam * v0 * (T - t0)
    return SolveReport(
        mechanism=make_trial(p0, t0, v0, params),
        pi0=pi0,
        payoff_L=p0,
        payoff_H=payoff_H,
        wl=wl,
        boundary_case=boundary,
        price_interval=interval,
    )


def free_trial(params: ModelParams, dist: ValueDistribution) -> FreeTrial:
    """Zero-price trial: length maximizes (1 - e^{-lam t})(T - t), threshold is
    the monopoly price, and pi_F is the premium revenue it generates."""
    lam, T = params.lam, params.horizon

    def resid(t: float) -> float:
        e = math.exp(-lam * t)
        return lam * e * (T - t) - (1.0 - e)

    t_M = bisect_root(resid, 0.0, T, tol=1e-10, f_lo=lam * T)
    v_M = monopoly_price(dist)
    pi_F = (
        (1.0 - math.exp(-lam * t_M))
        * (1.0 - float(dist.cdf(v_M)))
        * lam
        * v_M
        * (T - t_M)
    )
    return FreeTrial(t_M=t_M, v_M=v_M, pi_F=pi_F)


def first_best_attainable(params: ModelParams, dist: ValueDistribution) -> bool:
    """Whether selling the whole horizon ex ante survives: pi_F <= lam mu0 T."""
    _, _, pi_F = free_trial(params, dist)
    return pi_F <= params.lam * params.mu0 * params.horizon

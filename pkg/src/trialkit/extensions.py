"""Model extensions: discounted infinite horizon, cancellable trials with
flow utility, cost and partial signals, and refund mechanisms for the
bad-news and mixed-news learning variants.

Each variant keeps the bang-bang structure of the baseline, so solving
reduces to one threshold and one switch time; refund variants add a
report-time payment path tabulated as a RefundSchedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator

from ._roots import bisect_root, golden_max
from .errors import PreconditionFailed, TrialkitError, UseFiniteHorizon, WeightOutOfRange
from .mechanism import StepFunction
from .primitives import ValueDistribution, virtual_value
from .trial import expected_virtual_surplus, solve_v0, weight_cap

_GRID_POINTS = 256
_CHECK_POINTS = 64
_FALSIFY_TOL = 1e-8
_CONSISTENCY_TOL = 1e-10
_QUAD_OPTS = dict(epsabs=1e-12, epsrel=1e-9, limit=200)


@dataclass(frozen=True)
class ExtendedParams:
    """Extension-specific primitives; unused fields keep their defaults.

    ``r`` discounts the infinite horizon. ``u`` is a type-independent
    utility flow, ``c`` the service cost flow, ``l`` the loss size under
    bad news. (mu_H, p_H) / (mu_L, p_L) describe the seller's private
    binary signal; vbar_mixed / vlow_mixed are the two reward sizes of
    the mixed-news variant.
    """

    r: float = 0.0
    u: float = 0.0
    c: float = 0.0
    l: float = 0.0
    mu_H: float = 1.0
    mu_L: float = 0.0
    p_H: float = 1.0
    p_L: float = 0.0
    vbar_mixed: float = 0.0
    vlow_mixed: float = 0.0

    def __post_init__(self):
        if self.r < 0.0:
            raise ValueError("discount rate must be nonnegative")
        if self.l < 0.0:
            raise ValueError("loss size must be nonnegative")
        if not 0.0 <= self.mu_L <= self.mu_H <= 1.0:
            raise ValueError("need 0 <= mu_L <= mu_H <= 1")
        if self.p_H < 0.0 or self.p_L < 0.0:
            raise ValueError("signal probabilities must be nonnegative")

    def check_signal_mix(self, mu0: float) -> None:
        """Signal posteriors must average back to the prior."""
        mix = self.p_H * self.mu_H + self.p_L * self.mu_L
        if abs(mix - mu0) > _CONSISTENCY_TOL:
            raise PreconditionFailed(
                f"p_H mu_H + p_L mu_L = {mix:.12g} does not match mu0 = {mu0:g}"
            )

    def check_mixed_mean(self, mu0: float) -> None:
        """Reward sizes must straddle zero and average to one."""
        if not self.vbar_mixed > 0.0 > self.vlow_mixed:
            raise PreconditionFailed("need vbar_mixed > 0 > vlow_mixed")
        mean = mu0 * self.vbar_mixed + (1.0 - mu0) * self.vlow_mixed
        if abs(mean - 1.0) > _CONSISTENCY_TOL:
            raise PreconditionFailed(f"mixed reward mean {mean:.12g} != 1")


class RefundSchedule:
    """Report-time payment delta tabulated on a uniform time grid.

    Queries interpolate with a monotone cubic, clipped to the grid span.
    The terminal delta must vanish: a report at the deadline changes
    nothing.
    """

    __slots__ = ("times", "deltas", "__dict__")

    def __init__(self, times, deltas):
        times = np.atleast_1d(np.asarray(times, dtype=float))
        deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
        if times.shape != deltas.shape or times.size < 2:
            raise ValueError("need matching grids with at least two points")
        if np.any(np.diff(times) <= 0.0):
            raise ValueError("times must be strictly increasing")
        if abs(deltas[-1]) > 1e-8:
            raise ValueError(f"terminal delta {deltas[-1]:.3g} must be zero")
        self.times = times
        self.deltas = deltas

    @classmethod
    def tabulate(cls, fn, horizon: float, n: int = _GRID_POINTS) -> "RefundSchedule":
        times = np.linspace(0.0, horizon, n)
        return cls(times, [float(fn(t)) for t in times])

    @cached_property
    def _interp(self) -> PchipInterpolator:
        return PchipInterpolator(self.times, self.deltas)

    def __call__(self, t):
        out = self._interp(np.clip(t, self.times[0], self.times[-1]))
        return float(out) if np.isscalar(t) else out

    def to_rows(self) -> list[tuple[float, float]]:
        return [(float(t), float(d)) for t, d in zip(self.times, self.deltas)]


@dataclass(frozen=True)
class InfiniteHorizonTrial:
    """Discounted trial: prices are present values; t0 = inf means the
    whole (infinite) horizon is sold ex ante."""

    v0: float
    pi0: float
    t0: float
    p_uninformed: float
    upgrade_price: float
    r: float
    wl: float


def infinite_horizon_trial(
    lam: float, r: float, mu0: float, wl: float, dist: ValueDistribution
) -> InfiniteHorizonTrial:
    """Optimal trial over [0, inf) with exponential discounting at rate r.

    Threshold and virtual surplus coincide with the finite-horizon solver;
    the stopping condition becomes explicit,
    t0 = ln((lam/r + 1) / (1 - mu0 (1+wl)+ / pi0)) / lam,
    with an infinite trial once the weighted prior mass reaches pi0. The
    upgrade costs the discounted perpetuity value lam v0 e^{-r t0} / r.
    """
    if r <= 0.0:
        raise UseFiniteHorizon(f"r={r:g}: undiscounted payoffs need a finite horizon")
    v0 = solve_v0(dist, mu0, wl)
    pi0 = expected_virtual_surplus(dist, mu0, wl, v0)
    weight = mu0 * max(1.0 + wl, 0.0)
    if weight >= pi0:
        return InfiniteHorizonTrial(
            v0=v0,
            pi0=pi0,
            t0=math.inf,
            p_uninformed=mu0 * lam / r,
            upgrade_price=0.0,
            r=r,
            wl=wl,
        )
    t0 = math.log((lam / r + 1.0) / (1.0 - weight / pi0)) / lam
    g1 = dist.excess_above(v0)
    p_u = mu0 * (lam / r) * (
        -math.expm1(-r * t0) + g1 * math.exp(-r * t0) * -math.expm1(-lam * t0)
    )
    return InfiniteHorizonTrial(
        v0=v0,
        pi0=pi0,
        t0=t0,
        p_uninformed=p_u,
        upgrade_price=lam * v0 * math.exp(-r * t0) / r,
        r=r,
        wl=wl,
    )


@dataclass(frozen=True)
class CancellableTrial:
    """Trial with an early-exit threshold: buyers who learn a value below
    ``cancel_threshold`` drop the service immediately."""

    cancel_threshold: float
    v0: float
    t0: float
    pi_premium: float
    pi_cancel: float
    cancel_all: bool


def cancellable_trial(
    params, ext: ExtendedParams, dist: ValueDistribution, wl: float
) -> CancellableTrial:
    """Cancellable trial under a private binary signal with flow utility u
    and flow cost c.

    The cancellation threshold is mechanical, u + lam v_c = c. The upgrade
    threshold solves the flow virtual value
    u + lam v - c - (lam b1 / b2)(1 - F)/f = 0 with corner values reported
    rather than raised; b1, b2 mix the two posteriors with the weight.
    The switch time zeroes the derivative of the reduced objective, which
    is monotone whenever stopping forfeits positive surplus; otherwise the
    full horizon is kept. Weights below -1 reproduce wl = -1.
    """
    lam, T, mu0 = params.lam, params.horizon, params.mu0
    ext.check_signal_mix(mu0)
    if ext.p_H <= 0.0:
        raise PreconditionFailed("p_H must be positive")
    if wl > ext.p_L / ext.p_H + 1e-12:
        raise WeightOutOfRange(
            f"wl={wl:g} above the admissible cap p_L/p_H = {ext.p_L / ext.p_H:g}"
        )
    wl = max(wl, -1.0)
    u, c = ext.u, ext.c
    b1 = ext.mu_H - mu0 - wl * (mu0 - ext.mu_L)
    b2 = ext.mu_H + wl * ext.mu_L
    if b2 <= 0.0:
        raise PreconditionFailed("signal must stay informative: mu_H + wl mu_L <= 0")
    v_c = (c - u) / lam
    lo, hi = dist.support_lo, dist.support_hi

    def phi(v: float) -> float:
        return u - c + lam * virtual_value(dist, v, b1 / b2)

    if phi(lo) >= 0.0:
        v0 = lo
    elif phi(hi) <= 0.0:
        v0 = hi
    else:
        v0 = bisect_root(phi, lo, hi, tol=1e-10)

    # exact per-cell integrals; int (1-F)/f f dv over [v0, hi] = excess mass
    pi_v = (
        (u - c) * (1.0 - float(dist.cdf(v0)))
        + lam * dist.upper_partial_mean(v0)
        - lam * (b1 / b2) * dist.excess_above(v0)
    )
    top = min(max(v_c, lo), hi)
    pi_w = 0.0
    if top > lo:
        pi_w = (u - c) * float(dist.cdf(top)) + lam * (
            dist.mean - dist.upper_partial_mean(top)
        )

    const = (1.0 + wl) * (mu0 * (u + lam) - c)

    def slope(s: float) -> float:
        e = math.exp(-lam * s)
        return (
            b2 * pi_v * lam * e * (T - s)
            + b2 * (pi_v + pi_w) * math.expm1(-lam * s)
            + const
        )

    if pi_v + pi_w < 0.0 or slope(T) >= 0.0:
        t0 = T
    elif slope(0.0) <= 0.0:
        t0 = 0.0
    else:
        t0 = bisect_root(slope, 0.0, T, tol=1e-10)
    return CancellableTrial(
        cancel_threshold=v_c,
        v0=v0,
        t0=t0,
        pi_premium=pi_v,
        pi_cancel=pi_w,
        cancel_all=v_c >= hi,
    )


@dataclass(frozen=True)
class BadNewsReport:
    """Full-length service with a loss-triggered refund path.

    payoff_H is the no-loss seller's revenue, payoff_L nets out the
    expected refund (expected_refund <= 0).
    """

    access_uninformed: StepFunction
    access_after_report: float
    refund: RefundSchedule
    p0: float
    payoff_L: float
    payoff_H: float
    expected_refund: float
    wl: float
    falsify_margin: float

    @property
    def objective(self) -> float:
        return self.wl * self.payoff_L + self.payoff_H


def bad_news_mechanism(
    lam: float, l: float, u: float, mu0: float, wl: float, horizon: float
) -> BadNewsReport:
    """Optimal mechanism when learning arrives as losses of size l at rate
    lam under the bad state, against a type-independent utility flow u.

    Service runs the whole horizon and stops at the first reported loss;
    the report nets the refund
    delta(t) = -u (T - t) + l ln((mu0 + (1-mu0)e^{-lam t}) /
    (mu0 + (1-mu0)e^{-lam T})), the largest refund that never tempts an
    uninformed buyer into a false report (checked on a grid).
    """
    if not lam * l > u:
        raise PreconditionFailed(f"need lam*l > u, got {lam * l:g} <= {u:g}")
    if not u > (1.0 - mu0) * lam * l:
        raise PreconditionFailed(
            f"need u > (1-mu0) lam l, got {u:g} <= {(1.0 - mu0) * lam * l:g}"
        )
    if wl > weight_cap(mu0) + 1e-12:
        raise WeightOutOfRange(
            f"wl={wl:g} above the admissible cap (1 - mu0)/mu0 = {weight_cap(mu0):g}"
        )
    T = horizon
    tail_mass = mu0 + (1.0 - mu0) * math.exp(-lam * T)

    def delta(t: float) -> float:
        mass = mu0 + (1.0 - mu0) * math.exp(-lam * t)
        return -u * (T - t) + l * math.log(mass / tail_mass)

    hit = -math.expm1(-lam * T)
    e_delta = quad(
        lambda t: delta(t) * lam * math.exp(-lam * t), 0.0, T, **_QUAD_OPTS
    )[0]
    p0 = u * T - (1.0 - mu0) * (u * (T - hit / lam) + l * hit + e_delta)

    def posterior(t: float) -> float:
        return mu0 / (mu0 + (1.0 - mu0) * math.exp(-lam * t))

    def truthful_value(t: float) -> float:
        # continuation of an uninformed buyer who only reports real losses
        mt = posterior(t)
        survive = math.exp(-lam * (T - t)) * u * (T - t)
        flow, _ = quad(
            lambda s: lam
            * math.exp(-lam * (s - t))
            * (u * (s - t) - l - delta(s)),
            t,
            T,
            **_QUAD_OPTS,
        )
        return mt * u * (T - t) + (1.0 - mt) * (flow + survive)

    grid = np.linspace(0.0, T, _CHECK_POINTS)
    margin = min(truthful_value(t) + delta(t) for t in grid)
    if margin < -_FALSIFY_TOL:
        raise TrialkitError(f"false-report check failed: margin {margin:.3g}")
    return BadNewsReport(
        access_uninformed=StepFunction.constant(1.0, 0.0, T),
        access_after_report=0.0,
        refund=RefundSchedule.tabulate(delta, T),
        p0=p0,
        payoff_L=p0 + e_delta,
        payoff_H=p0,
        expected_refund=e_delta,
        wl=wl,
        falsify_margin=margin,
    )


@dataclass(frozen=True)
class MixedNewsReport:
    """Trial with report-time payments of both signs.

    A positive reward of size vbar pays the flat surcharge on the trial
    path; a negative reward of size vlow triggers the refund schedule.
    """

    access_uninformed: StepFunction
    t0: float
    refund_high: RefundSchedule
    refund_low: RefundSchedule
    p0: float
    payoff_L: float
    payoff_H: float
    expected_refund_high: float
    expected_refund_low: float
    wl: float
    falsify_margin: float

    @property
    def objective(self) -> float:
        return self.wl * self.payoff_L + self.payoff_H


def mixed_news_mechanism(
    lam: float, mu0: float, wl: float, horizon: float, vbar: float, vlow: float
) -> MixedNewsReport:
    """Optimal mechanism when the first reward reveals the type directly:
    size vbar > 0 under the high state, vlow < 0 under the low state, with
    mu0 vbar + (1 - mu0) vlow normalized to 1.

    The uninformed path is a trial of length t0 maximizing the weighted
    payoff (coarse scan plus golden-section); a high report pays
    lam vbar (T - max(t, t0)), a low report collects the refund that keeps
    false low reports unattractive (checked on a grid).
    """
    if not vbar > 0.0 > vlow:
        raise PreconditionFailed("need vbar > 0 > vlow")
    mean = mu0 * vbar + (1.0 - mu0) * vlow
    if abs(mean - 1.0) > _CONSISTENCY_TOL:
        raise PreconditionFailed(f"mixed reward mean {mean:.12g} != 1")
    if wl > weight_cap(mu0) + 1e-12:
        raise WeightOutOfRange(
            f"wl={wl:g} above the admissible cap (1 - mu0)/mu0 = {weight_cap(mu0):g}"
        )
    T = horizon
    m = mu0 * lam
    crate = mu0 * lam * vbar

    def delta_low(t: float, t0: float) -> float:
        if t >= t0:
            return 0.0
        d = t0 - t
        e = math.exp(-m * d)
        return -lam * (
            (1.0 + crate * d) * -math.expm1(-m * d) / m
            - crate * (1.0 - (1.0 + m * d) * e) / (m * m)
        )

    def parts(t0: float) -> tuple[float, float, float]:
        hit = -math.expm1(-lam * t0)
        e_dh = hit * lam * vbar * (T - t0)
        if t0 > 0.0:
            e_dl = quad(
                lambda tau: delta_low(tau, t0) * lam * math.exp(-lam * tau),
                0.0,
                t0,
                **_QUAD_OPTS,
            )[0]
        else:
            e_dl = 0.0
        gross = crate * ((T - t0) * hit + t0 - hit / lam)
        p0 = hit + gross - mu0 * e_dh - (1.0 - mu0) * e_dl
        return p0, e_dh, e_dl

    def weighted(t0: float) -> float:
        p0, e_dh, e_dl = parts(t0)
        return wl * (p0 + e_dl) + (p0 + e_dh)

    scan = np.linspace(0.0, T, 301)
    i = int(np.argmax([weighted(t) for t in scan]))
    t0 = golden_max(
        weighted, scan[max(i - 1, 0)], scan[min(i + 1, scan.size - 1)], tol=1e-9
    )
    p0, e_dh, e_dl = parts(t0)

    def truthful_value(t: float) -> float:
        if t >= t0:
            return 0.0
        surcharge = crate * (T - t0)
        val, _ = quad(
            lambda s: lam
            * math.exp(-lam * (s - t))
            * (1.0 + crate * (T - s) - surcharge - (1.0 - mu0) * delta_low(s, t0)),
            t,
            t0,
            **_QUAD_OPTS,
        )
        return val

    grid = np.linspace(0.0, T, _CHECK_POINTS)
    margin = min(truthful_value(t) + delta_low(t, t0) for t in grid)
    if margin < -_FALSIFY_TOL:
        raise TrialkitError(f"false-report check failed: margin {margin:.3g}")
    return MixedNewsReport(
        access_uninformed=StepFunction.indicator(0.0, t0, 0.0, T),
        t0=t0,
        refund_high=RefundSchedule.tabulate(
            lambda t: lam * vbar * (T - max(t, t0)), T
        ),
        refund_low=RefundSchedule.tabulate(lambda t: delta_low(t, t0), T),
        p0=p0,
        payoff_L=p0 + e_dl,
        payoff_H=p0 + e_dh,
        expected_refund_high=e_dh,
        expected_refund_low=e_dl,
        wl=wl,
        falsify_margin=margin,
    )

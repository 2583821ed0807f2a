"""Screening technologies: option menus, their lower envelope, and the
dynamic tiered-pricing solver that generalizes the single-tier trial.

The budget path walks the envelope's extreme options in order of
decreasing learning intensity; only the switch times are unknown, and
payments follow the same envelope/binding-participation bookkeeping as
the trial solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from ._roots import bisect_root, golden_max
from .errors import DegenerateSet, PreconditionFailed
from .mechanism import DirectMechanism, StepFunction
from .primitives import ModelParams, ValueDistribution
from .trial import expected_virtual_surplus, free_trial, solve_v0

_SWITCH_TOL = 1e-8
_DSTAR_EPS = 1e-12


@dataclass(frozen=True)
class ScreeningSet:
    """Finite menu of (learning intensity, quality) pairs in [0, 1]^2.

    Must offer the premium option (1, 1) and at least one option that
    produces no learning (I = 0); duplicates are dropped.
    """

    options: tuple[tuple[float, float], ...]

    def __init__(self, options: Sequence[Sequence[float]]):
        seen = set()
        for opt in options:
            i, q = float(opt[0]), float(opt[1])
            if not (0.0 <= i <= 1.0 and 0.0 <= q <= 1.0):
                raise PreconditionFailed(f"option ({i:g}, {q:g}) outside [0, 1]^2")
            seen.add((i, q))
        opts = tuple(sorted(seen))
        if (1.0, 1.0) not in seen:
            raise PreconditionFailed("screening set must offer the premium option (1, 1)")
        if not any(i == 0.0 for i, _ in opts):
            raise PreconditionFailed("screening set must offer an option with I = 0")
        object.__setattr__(self, "options", opts)


def image_set(screening) -> list[tuple[float, float]]:
    """Map options (I, q) to (intensity, flow utility) points (I, qI)."""
    opts = screening.options if isinstance(screening, ScreeningSet) else screening
    image = {(float(i), float(i) * float(q)) for i, q in opts}
    return sorted(image)


def lower_envelope_extremes(points) -> list[tuple[float, float]]:
    """Extreme points of the lower convex envelope, sorted by intensity.

    Monotone-chain lower hull; collinear interior points are dropped so
    only genuine kinks survive.
    """
    pts = sorted({(float(i), float(u)) for i, u in points})
    if len(pts) < 2:
        raise DegenerateSet("need at least two distinct points for an envelope")
    hull: list[tuple[float, float]] = []
    for p in pts:
        while len(hull) >= 2:
            ox, oy = hull[-2]
            ax, ay = hull[-1]
            if (ax - ox) * (p[1] - oy) - (ay - oy) * (p[0] - ox) <= 0.0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def uses_intermediate(I1: float, q1: float, I2: float, q2: float) -> bool:
    """Whether the steeper option (I2, q2) displaces (I1, q1) in the
    optimal path: it must buy strictly more learning net of utility."""
    return I2 * (1.0 - q2) > I1 * (1.0 - q1)


def horizon_condition(params: ModelParams, dist: ValueDistribution, dstar) -> bool:
    """Horizon long enough for the tiered incentive argument to close.

    Scales with the slowest positive learning intensity on the envelope;
    trivially true when the prior is below the lowest value.
    """
    vlo = dist.support_lo
    shortfall = max(params.mu0 - vlo, 0.0)
    if shortfall == 0.0:
        return True
    if vlo <= 0.0:
        return False
    i_low = min(i for i, _ in dstar if i > _DSTAR_EPS)
    s = dist.excess_above(params.mu0)
    if s <= 0.0:
        return False
    bound = ((2.0 * s + 1.0 - vlo) / (i_low * s)) * shortfall / ((1.0 - params.mu0) * vlo)
    return params.lam * params.horizon > bound


@dataclass(frozen=True)
class TieredMechanism:
    """Budget path over screening options plus the upgrade tier.

    ``budget_path`` lists (segment start, (I, q)) with intensity strictly
    decreasing across segments; the final segment runs to the horizon.
    """

    budget_path: tuple[tuple[float, tuple[float, float]], ...]
    v0: float
    p0: float
    lam: float
    horizon: float

    def intensity_path(self) -> StepFunction:
        edges = [start for start, _ in self.budget_path] + [self.horizon]
        return StepFunction(edges, [opt[0] for _, opt in self.budget_path])

    def utility_path(self) -> StepFunction:
        edges = [start for start, _ in self.budget_path] + [self.horizon]
        return StepFunction(edges, [opt[0] * opt[1] for _, opt in self.budget_path])

    def upgrade_price_rule(self, s: float, t: float) -> float:
        """Premium surcharge for full utility on [s, t]: threshold flow
        value times the utility the budget path withholds there."""
        q = self.utility_path()
        return self.v0 * self.lam * ((t - s) - (q.cumulative(t) - q.cumulative(s)))


@dataclass(frozen=True)
class TieredReport:
    """Solved tiered mechanism with payoffs and the reduction diagnostics."""

    mechanism: TieredMechanism
    pi0: float
    mu_L: float
    payoff_L: float
    payoff_H: float
    wl: float
    horizon_ok: bool

    @property
    def objective(self) -> float:
        return self.wl * self.payoff_L + self.payoff_H


def _segment_values(dstar_desc, switches, T):
    """Segments (a, b, intensity, flow utility) for given switch times."""
    starts = [0.0, *switches]
    ends = [*switches, T]
    return [
        (a, b, opt[0], opt[0] * opt[1])
        for (a, b), opt in zip(zip(starts, ends), dstar_desc)
    ]


def _reduced_objective(dstar_desc, switches, lam, T, mu_L):
    # total = sum over segments of (T - t + Q(t)) weighted by the arrival
    # density, plus the terminal utility credit; exact per segment.
    total = 0.0
    acc_i = acc_q = 0.0
    for a, b, i, u in _segment_values(dstar_desc, switches, T):
        d = b - a
        if d > 0.0 and i > 0.0:
            e = math.exp(-lam * i * d)
            hump = (1.0 - (1.0 + lam * i * d) * e) / (lam * i)
            total += math.exp(-lam * acc_i) * (
                (T - a + acc_q) * (1.0 - e) + (u - 1.0) * hump
            )
        acc_i += i * d
        acc_q += u * d
    total += (math.exp(-lam * acc_i) - 1.0 + mu_L) * acc_q
    return total


def _solve_switches(dstar_desc, lam, T, mu_L):
    m = len(dstar_desc) - 1
    if mu_L >= 1.0 - math.exp(-lam * T):
        return [T] * m

    if m == 1:
        # two-point envelope: the switch condition is the trial stopping
        # rule, so use its monotone residual instead of a blind search
        def resid(t: float) -> float:
            e = math.exp(-lam * t)
            return lam * e * (T - t) - (1.0 - e) + mu_L

        s = bisect_root(resid, 0.0, T, tol=1e-10, f_lo=lam * T + mu_L)
        return [s]

    def value(switches) -> float:
        return _reduced_objective(dstar_desc, switches, lam, T, mu_L)

    if m == 2:
        def best_inner(s1: float) -> float:
            s2 = golden_max(lambda x: value([s1, x]), s1, T, tol=_SWITCH_TOL)
            return value([s1, s2])

        s1 = golden_max(best_inner, 0.0, T, tol=_SWITCH_TOL)
        s2 = golden_max(lambda x: value([s1, x]), s1, T, tol=_SWITCH_TOL)
        switches = [s1, s2]
    else:
        switches = [T * (j + 1) / (m + 1) for j in range(m)]

    for _ in range(3 if m == 2 else 100):
        moved = 0.0
        for j in range(m):
            lo = switches[j - 1] if j > 0 else 0.0
            hi = switches[j + 1] if j + 1 < m else T
            old = switches[j]
            switches[j] = golden_max(
                lambda x: value(switches[:j] + [x] + switches[j + 1 :]),
                lo,
                hi,
                tol=_SWITCH_TOL,
            )
            moved = max(moved, abs(switches[j] - old))
        if moved < 1e-9:
            break
    return switches


def _payoffs(dstar_desc, switches, params, dist, v0):
    """Ex-ante charge and type payoffs from first principles.

    Independent accounting from the reduced objective: expected gross
    consumption value and envelope payments conditional on a high match,
    with the ex-ante charge extracting the prior-weighted surplus.
    """
    lam, T = params.lam, params.horizon
    s1 = dist.upper_partial_mean(v0)
    tail_rev = (1.0 - dist.cdf(v0)) * lam * v0
    segs = _segment_values(dstar_desc, switches, T)
    q_total = sum(u * (b - a) for a, b, _, u in segs)

    gross = delta = 0.0
    acc_i = acc_q = 0.0
    for a, b, i, u in segs:
        d = b - a
        if d > 0.0 and i > 0.0:
            q_opt = u / i
            e = math.exp(-lam * i * d)
            p = 1.0 - e
            j = (1.0 - (1.0 + lam * i * d) * e) / (lam * i)
            g_a = (q_total - acc_q)
            decay = math.exp(-lam * acc_i)
            gross += decay * (
                q_opt * p
                + lam * s1 * ((T - a) * p - j)
                + lam * (1.0 - s1) * (g_a * p - u * j)
            )
            delta += decay * tail_rev * ((T - a - g_a) * p - (1.0 - u) * j)
        acc_i += i * d
        acc_q += u * d
    return gross, delta


def solve_tiered(
    params: ModelParams,
    dist: ValueDistribution,
    wl: float,
    screening,
) -> TieredReport:
    """Optimal dynamic tiered pricing for a screening menu.

    The upgrade threshold coincides with the trial solver's; the budget
    path walks the envelope extremes in decreasing-intensity order with
    switch times found per segment (monotone residual when the envelope
    is two points, golden-section search otherwise). The ex-ante charge
    binds participation; below wl = -1 it is left at zero, where the
    weighted objective no longer depends on it.
    """
    if not isinstance(screening, ScreeningSet):
        screening = ScreeningSet(screening)
    mu0 = params.mu0
    lam, T = params.lam, params.horizon

    images = image_set(screening)
    dstar = lower_envelope_extremes(images)
    option_of = {}
    for i, q in screening.options:
        key = (i, i * q)
        if key not in option_of or q < option_of[key][1]:
            option_of[key] = (i, q)
    dstar_desc = [option_of[p] for p in reversed(dstar)]

    wl_eff = max(wl, -1.0)
    v0 = solve_v0(dist, mu0, wl_eff)
    pi0 = expected_virtual_surplus(dist, mu0, wl_eff, v0)
    mu_L = max(1.0 + wl_eff, 0.0) * mu0 / pi0

    switches = _solve_switches(dstar_desc, lam, T, mu_L)
    gross, delta = _payoffs(dstar_desc, switches, params, dist, v0)

    p0 = mu0 * (gross - delta) if wl > -1.0 else 0.0
    payoff_l = p0
    payoff_h = p0 + delta

    path = []
    starts = [0.0, *switches]
    ends = [*switches, T]
    for (a, b), opt in zip(zip(starts, ends), dstar_desc):
        if b - a > _DSTAR_EPS:
            path.append((a, opt))
    if not path:
        path.append((0.0, dstar_desc[-1]))

    mech = TieredMechanism(
        budget_path=tuple(path), v0=v0, p0=p0, lam=lam, horizon=T
    )
    return TieredReport(
        mechanism=mech,
        pi0=pi0,
        mu_L=mu_L,
        payoff_L=payoff_l,
        payoff_H=payoff_h,
        wl=wl,
        horizon_ok=horizon_condition(params, dist, dstar),
    )


def to_direct(mech: TieredMechanism) -> DirectMechanism:
    """Direct-mechanism view of a tiered design for the IC checker and
    the simulator."""
    lam, T, v0 = mech.lam, mech.horizon, mech.v0
    access_u = mech.intensity_path()
    utility_u = mech.utility_path()

    def access_post(v: float, t: float) -> StepFunction:
        if v >= v0 - 1e-12:
            return StepFunction.constant(1.0, min(t, T), T)
        return access_u.restrict(t, T)

    def utility_post(v: float, t: float) -> StepFunction:
        if v >= v0 - 1e-12:
            return StepFunction.constant(1.0, min(t, T), T)
        return utility_u.restrict(t, T)

    def delta(v: float, t: float) -> float:
        if v >= v0 - 1e-12:
            return lam * v0 * ((T - min(t, T)) - utility_u.tail(t))
        return 0.0

    return DirectMechanism(
        access_uninformed=access_u,
        access_post=access_post,
        price_uninformed_total=mech.p0,
        delta=delta,
        utility_uninformed=utility_u,
        utility_post=utility_post,
        upgrade_threshold=v0,
    )


def freemium_mechanism(params: ModelParams, dist: ValueDistribution) -> DirectMechanism:
    """Free full-speed learning at zero utility, premium upgrade on news.

    The budget option is (1, 0): buyers learn at the full rate but consume
    nothing until they upgrade at the monopoly-style threshold.
    """
    lam, T = params.lam, params.horizon
    v0 = solve_v0(dist, params.mu0, -1.0)
    access_u = StepFunction.constant(1.0, 0.0, T)
    utility_u = StepFunction.constant(0.0, 0.0, T)

    def access_post(v: float, t: float) -> StepFunction:
        return StepFunction.constant(1.0, min(t, T), T)

    def utility_post(v: float, t: float) -> StepFunction:
        level = 1.0 if v >= v0 - 1e-12 else 0.0
        return StepFunction.constant(level, min(t, T), T)

    def delta(v: float, t: float) -> float:
        if v >= v0 - 1e-12:
            return lam * v0 * (T - min(t, T))
        return 0.0

    return DirectMechanism(
        access_uninformed=access_u,
        access_post=access_post,
        price_uninformed_total=0.0,
        delta=delta,
        utility_uninformed=utility_u,
        utility_post=utility_post,
        upgrade_threshold=v0,
    )


def welfare_compare(
    params: ModelParams, dist: ValueDistribution, mu0_grid
) -> list[tuple[float, float, float]]:
    """Welfare of the free trial vs freemium-premium pricing, per prior.

    Both designs fix their thresholds at wl = -1, so the fractions of the
    first-best lam * mu0 * T are constant in the prior; rows repeat them
    for plotting convenience.
    """
    lam, T = params.lam, params.horizon
    ft = free_trial(params, dist)
    s1_m = dist.upper_partial_mean(ft.v_M)
    frac_free = (
        ft.t_M - math.expm1(-lam * ft.t_M) * (T - ft.t_M) * s1_m
    ) / T
    v0 = solve_v0(dist, params.mu0, -1.0)
    frac_freemium = dist.upper_partial_mean(v0) * (T + math.expm1(-lam * T) / lam) / T
    return [(float(m), frac_free, frac_freemium) for m in mu0_grid]

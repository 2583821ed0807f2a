"""Direct-mechanism representation and incentive / participation checks.

A direct mechanism is described by the uninformed access path, the
post-report allocation, the upfront price, and the report-time payment
rule. Checks sweep grids of values, report times, and deviation times;
each family reports its worst violation so a corrupted mechanism points
at the constraint it breaks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .primitives import ModelParams, ValueDistribution
from .trial import TrialMechanism

_POSITIVE_LEVEL = 1e-12


class StepFunction:
    """Right-continuous step function on a closed interval.

    ``edges`` has one more entry than ``values``; segment i takes
    ``values[i]`` on [edges[i], edges[i+1]). Evaluation outside the
    domain clips to the boundary segment.
    """

    __slots__ = ("edges", "values", "_cum")

    def __init__(self, edges, values):
        edges = np.atleast_1d(np.asarray(edges, dtype=float))
        values = np.atleast_1d(np.asarray(values, dtype=float))
        if edges.ndim != 1 or values.ndim != 1 or edges.size != values.size + 1:
            raise ValueError("need n+1 edges for n segment values")
        if np.any(np.diff(edges) < 0.0):
            raise ValueError("edges must be nondecreasing")
        self.edges = edges
        self.values = values
        self._cum = np.concatenate(([0.0], np.cumsum(np.diff(edges) * values)))

    @classmethod
    def constant(cls, level: float, start: float, end: float) -> "StepFunction":
        return cls([start, end], [level])

    @classmethod
    def indicator(cls, a: float, b: float, start: float, end: float) -> "StepFunction":
        """1 on [a, b), 0 elsewhere in [start, end]."""
        a = min(max(a, start), end)
        b = min(max(b, start), end)
        edges = [start]
        values = []
        for e, lvl in ((a, 0.0), (b, 1.0), (end, 0.0)):
            if e > edges[-1]:
                edges.append(e)
                values.append(lvl)
        if not values:
            return cls([start, end], [0.0])
        return cls(edges, values)

    @property
    def start(self) -> float:
        return float(self.edges[0])

    @property
    def end(self) -> float:
        return float(self.edges[-1])

    def _segment_of(self, t):
        idx = np.searchsorted(self.edges, t, side="right") - 1
        return np.clip(idx, 0, self.values.size - 1)

    def __call__(self, t):
        out = self.values[self._segment_of(t)]
        return float(out) if np.isscalar(t) else out

    def cumulative(self, t):
        """Integral from the left endpoint to t (t clipped to the domain)."""
        tc = np.clip(t, self.edges[0], self.edges[-1])
        idx = self._segment_of(tc)
        out = self._cum[idx] + (tc - self.edges[idx]) * self.values[idx]
        return float(out) if np.isscalar(t) else out

    def integral(self) -> float:
        return float(self._cum[-1])

    def tail(self, t):
        return self.integral() - self.cumulative(t)

    def restrict(self, a: float, b: float) -> "StepFunction":
        """The same function viewed on [a, b] (degenerate b <= a allowed)."""
        a = min(max(a, self.start), self.end)
        b = min(max(b, self.start), self.end)
        if b <= a:
            return StepFunction([a, a], [self(a)])
        inner = self.edges[(self.edges > a) & (self.edges < b)]
        edges = np.concatenate(([a], inner, [b]))
        return StepFunction(edges, self.values[self._segment_of(edges[:-1])])


@dataclass(frozen=True)
class DirectMechanism:
    """Allocation and payment rules indexed by reports.

    ``access_post`` and ``utility_post`` map (reported value, report time)
    to the step function of rights on [t, T]; ``delta`` is the payment due
    at the report. Utility rights default to access rights; they differ
    for free-tier designs where a buyer can learn without consuming.
    """

    access_uninformed: StepFunction
    access_post: Callable[[float, float], StepFunction]
    price_uninformed_total: float
    delta: Callable[[float, float], float]
    utility_uninformed: StepFunction | None = None
    utility_post: Callable[[float, float], StepFunction] | None = None
    upgrade_threshold: float | None = None

    def uninformed_utility(self) -> StepFunction:
        return self.utility_uninformed if self.utility_uninformed is not None else self.access_uninformed

    def post_utility(self, v: float, t: float) -> StepFunction:
        fn = self.utility_post if self.utility_post is not None else self.access_post
        return fn(v, t)


def from_trial(trial: TrialMechanism, params: ModelParams) -> DirectMechanism:
    """Direct form of a trial: free consumption on [0, t0]; a report with
    value at or above v0 buys the remainder at the posted upgrade payment,
    anything lower just rides out the trial."""
    lam, T = params.lam, params.horizon
    t0, v0 = trial.t0, trial.v0
    access_u = StepFunction.indicator(0.0, t0, 0.0, T)

    def access_post(v: float, t: float) -> StepFunction:
        if v >= v0 - 1e-12:
            return StepFunction.constant(1.0, min(t, T), T)
        return access_u.restrict(t, T)

    def delta(v: float, t: float) -> float:
        if v >= v0 - 1e-12:
            return lam * v0 * (T - max(t, t0))
        return 0.0

    return DirectMechanism(
        access_uninformed=access_u,
        access_post=access_post,
        price_uninformed_total=trial.p0,
        delta=delta,
        upgrade_threshold=v0,
    )


def interim_utility(mech: DirectMechanism, v: float, t: float, params: ModelParams) -> float:
    """Truthful continuation utility of a buyer who learned v at time t."""
    return params.lam * v * mech.post_utility(v, t).integral() - mech.delta(v, t)


def posterior_no_news(mech: DirectMechanism, mu0: float, t: float, params: ModelParams) -> float:
    """Belief that the good is a match after t units without news."""
    odds = mu0 * math.exp(-params.lam * mech.access_uninformed.cumulative(t))
    return odds / (odds + 1.0 - mu0)


@dataclass
class ICReport:
    violations: dict[str, float]
    tol: float
    passed: bool
    ir_residual: float = field(default=0.0)

    @property
    def worst(self) -> float:
        return max(self.violations.values())

    @property
    def worst_family(self) -> str:
        return max(self.violations, key=self.violations.get)

    def to_json(self) -> str:
        return json.dumps(
            {
                "passed": self.passed,
                "tol": self.tol,
                "worst_family": self.worst_family,
                "ir_residual": self.ir_residual,
                "violations": self.violations,
            },
            indent=2,
            sort_keys=False,
        )


def _expected_report_value(
    mech: DirectMechanism,
    dist: ValueDistribution,
    params: ModelParams,
    tau: float,
    v_nodes: np.ndarray,
) -> float:
    """E_v of the lump plus truthful continuation at a news time tau."""
    lam = params.lam
    iu = mech.access_uninformed(tau)
    ratio = mech.uninformed_utility()(tau) / iu if iu > _POSITIVE_LEVEL else 0.0

    def h(v: float) -> float:
        return v * ratio + lam * v * mech.post_utility(v, tau).integral() - mech.delta(v, tau)

    total = 0.0
    for a, b in zip(v_nodes[:-1], v_nodes[1:]):
        if b <= a:
            continue
        m = 0.5 * (a + b)
        fa, fm, fb = dist.pdf(a) * h(a), dist.pdf(m) * h(m), dist.pdf(b) * h(b)
        total += (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return total


def check_ic(
    mech: DirectMechanism,
    dist: ValueDistribution,
    params: ModelParams,
    mu0: float,
    *,
    v_grid_size: int = 64,
    t_grid_size: int = 64,
    deviation_times: int = 16,
    tol: float | None = None,
) -> ICReport:
    """Grid check of every deviation family plus ex-ante participation.

    Families: informed staying silent forever; misreporting the value at
    the true news time; delaying the report to a later time with a
    possibly different value; an uninformed buyer claiming news once
    learning has ended (the binding time for designs whose uninformed
    utility path terminates); ex-ante participation of the uninformed;
    and payment misreports, which are vacuous under pooled upfront
    pricing. ``ir_residual`` carries the signed participation slack so a
    solved mechanism can be tested for a binding constraint.
    """
    lam, T = params.lam, params.horizon
    if tol is None:
        tol = 1e-8 * lam * T
    vlo, vhi = float(dist.knots[0]), float(dist.knots[-1])
    vgrid = np.linspace(vlo, vhi, v_grid_size)
    tgrid = np.linspace(0.0, T, t_grid_size)

    Q = np.empty((v_grid_size, t_grid_size))
    D = np.empty_like(Q)
    for j, t in enumerate(tgrid):
        for i, v in enumerate(vgrid):
            Q[i, j] = mech.post_utility(v, t).integral()
            D[i, j] = mech.delta(v, t)
    u_truth = lam * vgrid[:, None] * Q - D

    uU = mech.uninformed_utility()
    QU = np.array([uU.tail(t) for t in tgrid])

    viol = {}
    viol["silent_forever"] = max(0.0, float(np.max(lam * vgrid[:, None] * QU[None, :] - u_truth)))

    gain_v = lam * vgrid[:, None, None] * Q[None, :, :] - D[None, :, :] - u_truth[:, None, :]
    viol["value_misreport"] = max(0.0, float(np.max(gain_v)))

    worst_joint = -np.inf
    for t2 in np.linspace(0.0, T, deviation_times):
        Q2 = np.array([mech.post_utility(v, t2).integral() for v in vgrid])
        D2 = np.array([mech.delta(v, t2) for v in vgrid])
        QU2 = uU.tail(t2)
        feasible = tgrid <= t2 + 1e-12
        if not feasible.any():
            continue
        gain = (
            lam * vgrid[:, None, None] * (QU[None, None, feasible] - QU2 + Q2[None, :, None])
            - D2[None, :, None]
            - u_truth[:, None, feasible]
        )
        worst_joint = max(worst_joint, float(np.max(gain)))
    viol["delayed_report"] = max(0.0, worst_joint)

    access = mech.access_uninformed
    positive = access.values > _POSITIVE_LEVEL
    t_end = float(access.edges[1:][positive][-1]) if positive.any() else 0.0
    if mech.upgrade_threshold is None:
        viol["uninformed_upgrade"] = 0.0
    else:
        mu_end = posterior_no_news(mech, mu0, t_end, params)
        viol["uninformed_upgrade"] = max(0.0, mu_end - mech.upgrade_threshold) * lam * (T - t_end)

    thr = mech.upgrade_threshold
    base = np.unique(np.concatenate([np.linspace(vlo, vhi, 129), dist.knots]))
    if thr is not None and vlo < thr < vhi:
        base = np.unique(np.concatenate([base, [thr - 1e-9, thr]]))
    dens_edges = [float(e) for e in access.edges if 0.0 < e < T]

    def integrand(tau: float) -> float:
        a = access(tau)
        if a <= _POSITIVE_LEVEL:
            return 0.0
        dens = lam * a * math.exp(-lam * access.cumulative(tau))
        return dens * _expected_report_value(mech, dist, params, tau, base)

    gross, _ = quad(integrand, 0.0, T, points=dens_edges or None, limit=200, epsabs=1e-11, epsrel=1e-10)
    ir_residual = mu0 * gross - mech.price_uninformed_total
    viol["participation"] = max(0.0, -ir_residual)

    viol["payment_misreport"] = 0.0

    passed = all(x <= tol for x in viol.values())
    return ICReport(violations=viol, tol=tol, passed=passed, ir_residual=ir_residual)

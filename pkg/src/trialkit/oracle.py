"""Brute-force optimality oracles, independent of the closed-form solver.

Two layers: the reduced access-control problem is integrated segment by
segment and searched directly over switch times or per-bin levels, and
the relaxed design problem is enumerated on a time/value lattice with
envelope payments and a binding ex-ante participation charge.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded
from .mechanism import StepFunction
from .primitives import ModelParams, ValueDistribution
from .trial import solve_trial

_SWITCH_BUDGET = 400
_LEVEL_BIN_BUDGET = 14
_LEVEL_CANDIDATE_BUDGET = 1 << 24
_RESTRICTED_BIN_BUDGET = 8
_UNRESTRICTED_BIN_BUDGET = 4
_VALUE_POINT_BUDGET = 6
_ENUM_CHUNK = 1 << 16


def control_objective(
    access: StepFunction,
    params: ModelParams,
    pi0: float,
    mu0: float,
    wl: float,
    *,
    min_subintervals: int = 1000,
) -> float:
    """Weighted seller payoff of an arbitrary access path on [0, T].

    The integrand is exponential in the cumulative access between
    breakpoints, so each cell of the refined partition is accumulated in
    closed form; the refinement only subdivides constant segments and
    exists to keep the partition finer than ``min_subintervals`` cells.
    """
    lam, T = params.lam, params.horizon
    if abs(access.start) > 1e-9 or abs(access.end - T) > 1e-9:
        raise ValueError("access path must be defined on [0, horizon]")
    levels = np.asarray(access.values, dtype=float)
    if levels.size and (levels.min() < -1e-9 or levels.max() > 1.0 + 1e-9):
        raise ValueError("access levels must lie in [0, 1]")
    widths = np.diff(access.edges)
    keep = widths > 0.0
    widths, levels = widths[keep], np.clip(levels[keep], 0.0, 1.0)
    starts = access.edges[:-1][keep]

    cell_a, cell_h, cell_u = [], [], []
    for a, h, u in zip(starts, widths, levels):
        m = max(1, math.ceil(min_subintervals * h / T))
        sub = a + h / m * np.arange(m)
        cell_a.append(sub)
        cell_h.append(np.full(m, h / m))
        cell_u.append(np.full(m, u))
    a = np.concatenate(cell_a)
    h = np.concatenate(cell_h)
    u = np.concatenate(cell_u)

    mass = u * h
    x_end = np.cumsum(mass)
    x_start = x_end - mass
    x_total = x_end[-1]
    slack = (T - a) - (x_total - x_start)
    e = np.exp(-lam * mass)
    den = np.where(u > 0.0, lam * u, 1.0)
    curved = np.where(u > 0.0, (u - 1.0) * (1.0 - (1.0 + lam * mass) * e) / den, 0.0)
    pieces = np.exp(-lam * x_start) * (slack * (1.0 - e) + curved)
    weight = mu0 * max(1.0 + wl, 0.0)
    return float(pi0 * lam * np.sum(pieces) + weight * lam * x_total)


def _bang_bang_values(switch, lam, T, pi0, weight):
    return weight * lam * switch - pi0 * lam * (T - switch) * np.expm1(-lam * switch)


def _binned_values(levels, lam, T, pi0, weight):
    # levels: (n, K) per-bin access on K equal bins; same accounting as
    # control_objective, vectorized over candidates.
    n, k = levels.shape
    width = T / k
    t_left = width * np.arange(k)
    mass = levels * width
    x_end = np.cumsum(mass, axis=1)
    x_start = x_end - mass
    x_total = x_end[:, -1:]
    slack = (T - t_left) - (x_total - x_start)
    e = np.exp(-lam * mass)
    den = np.where(levels > 0.0, lam * levels, 1.0)
    curved = np.where(
        levels > 0.0, (levels - 1.0) * (1.0 - (1.0 + lam * mass) * e) / den, 0.0
    )
    pieces = np.exp(-lam * x_start) * (slack * (1.0 - e) + curved)
    return pi0 * lam * pieces.sum(axis=1) + weight * lam * x_total[:, 0]


def search_optimal_control(
    params: ModelParams,
    pi0: float,
    mu0: float,
    wl: float,
    K: int,
    levels=None,
) -> tuple[StepFunction, float]:
    """Directly maximize the reduced control objective.

    With ``levels=None``, scans K bang-bang switch times on [0, T].
    Otherwise enumerates every len(levels)**K per-bin level path on K
    equal bins (ties keep the first candidate in enumeration order).
    """
    lam, T = params.lam, params.horizon
    weight = mu0 * max(1.0 + wl, 0.0)
    if levels is None:
        if K > _SWITCH_BUDGET:
            raise BudgetExceeded(f"switch scan allows at most {_SWITCH_BUDGET} candidates, got {K}")
        switch = np.linspace(0.0, T, K)
        vals = _bang_bang_values(switch, lam, T, pi0, weight)
        best = int(np.argmax(vals))
        path = StepFunction.indicator(0.0, float(switch[best]), 0.0, T)
        return path, float(vals[best])

    grid = np.asarray(levels, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("levels must be a nonempty 1-d grid")
    total = grid.size**K
    if K > _LEVEL_BIN_BUDGET or total > _LEVEL_CANDIDATE_BUDGET:
        raise BudgetExceeded(
            f"level enumeration capped at {_LEVEL_BIN_BUDGET} bins and "
            f"{_LEVEL_CANDIDATE_BUDGET} candidates, got {grid.size}^{K}"
        )
    shape = (grid.size,) * K
    best_val, best_idx = -math.inf, 0
    for lo in range(0, total, _ENUM_CHUNK):
        idx = np.arange(lo, min(lo + _ENUM_CHUNK, total))
        digits = np.stack(np.unravel_index(idx, shape), axis=1)
        vals = _binned_values(grid[digits], lam, T, pi0, weight)
        j = int(np.argmax(vals))
        if vals[j] > best_val:
            best_val, best_idx = float(vals[j]), lo + j
    digits = np.unravel_index(best_idx, shape)
    path = StepFunction(np.linspace(0.0, T, K + 1), grid[np.asarray(digits)])
    return path, best_val


@dataclass(frozen=True)
class OracleReport:
    """Best lattice mechanism found by exhaustive enumeration."""

    value: float
    analytic_value: float
    gap: float
    pattern: tuple[int, ...]
    thresholds: tuple[float, ...]
    pi_L: float
    pi_H: float
    p0: float
    bin_width: float
    value_step: float
    mode: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "discrete_value": self.value,
                "analytic_value": self.analytic_value,
                "gap": self.gap,
                "argmax": {
                    "access_pattern": list(self.pattern),
                    "thresholds": list(self.thresholds),
                    "pi_L": self.pi_L,
                    "pi_H": self.pi_H,
                    "p0": self.p0,
                },
                "bin_width": self.bin_width,
                "value_step": self.value_step,
                "mode": self.mode,
            },
            indent=2,
        )


def discrete_relaxed_oracle(
    params: ModelParams,
    dist: ValueDistribution,
    mu0: float,
    wl: float,
    K: int,
    M: int,
    mode: str = "restricted",
    value_grid=None,
) -> OracleReport:
    """Enumerate lattice mechanisms: binary access per time bin, a
    threshold path on the value grid, envelope payments, and an ex-ante
    charge that binds participation.

    ``restricted`` keeps nonincreasing threshold paths (the shape a
    pointwise maximizer must take under regularity); ``unrestricted``
    enumerates all M**K paths and is budgeted to small K to audit the
    restriction itself. Ties go to less total access, then lower
    thresholds.
    """
    lam, T = params.lam, params.horizon
    if value_grid is not None:
        grid = np.asarray(value_grid, dtype=float)
        if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0.0):
            raise ValueError("value_grid must be strictly increasing")
        M = grid.size
    else:
        grid = np.linspace(dist.support_lo, dist.support_hi, M)
    if mode == "restricted":
        if K > _RESTRICTED_BIN_BUDGET or M > _VALUE_POINT_BUDGET:
            raise BudgetExceeded(
                f"restricted mode allows K <= {_RESTRICTED_BIN_BUDGET}, "
                f"M <= {_VALUE_POINT_BUDGET}, got K={K}, M={M}"
            )
        idx_desc = range(M - 1, -1, -1)
        paths = np.array(
            list(itertools.combinations_with_replacement(idx_desc, K)), dtype=int
        )
    elif mode == "unrestricted":
        if K > _UNRESTRICTED_BIN_BUDGET or M > _VALUE_POINT_BUDGET:
            raise BudgetExceeded(
                f"unrestricted mode allows K <= {_UNRESTRICTED_BIN_BUDGET}, "
                f"M <= {_VALUE_POINT_BUDGET}, got K={K}, M={M}"
            )
        paths = np.array(list(itertools.product(range(M), repeat=K)), dtype=int)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    width = T / K
    t_left = width * np.arange(K)
    patterns = np.array(list(itertools.product((0.0, 1.0), repeat=K)))
    mass = patterns * width
    x_end = np.cumsum(mass, axis=1)
    x_start = x_end - mass
    x_total = x_end[:, -1:]
    remaining = x_total - x_start
    decay = np.exp(-lam * x_start) * patterns
    e = math.exp(-lam * width)
    hump = (1.0 - (1.0 + lam * width) * e) / lam

    # Per active bin, conditional on news there: the buyer consumes the
    # lump, upgraders (v >= threshold) take lam*v per unit time to T,
    # everyone else rides out the remaining uninformed path. The envelope
    # payment charges threshold flow value for the access the upgrade adds.
    s1 = np.array([dist.upper_partial_mean(v) for v in grid])
    rev = np.array([lam * v * (1.0 - dist.cdf(v)) for v in grid])
    base = decay * ((1.0 - e) * (1.0 + lam * remaining) - lam * hump)
    upgrade_gain = decay * (1.0 - e) * lam * ((T - t_left) - remaining)
    news_value = base.sum(axis=1)[:, None] + upgrade_gain @ s1[paths].T
    news_delta = (upgrade_gain / lam) @ rev[paths].T

    p0 = mu0 * (news_value - news_delta)
    pay_l = p0
    pay_h = p0 + news_delta
    objective = wl * pay_l + pay_h

    best = float(objective.max())
    tie_p, tie_c = np.nonzero(objective == best)
    order = sorted(
        range(tie_p.size),
        key=lambda i: (
            float(x_total[tie_p[i], 0]),
            tuple(grid[paths[tie_c[i]]]),
            tuple(patterns[tie_p[i]]),
        ),
    )
    p, c = int(tie_p[order[0]]), int(tie_c[order[0]])

    analytic = solve_trial(params, dist, wl).objective
    return OracleReport(
        value=best,
        analytic_value=float(analytic),
        gap=float(analytic - best),
        pattern=tuple(int(b) for b in patterns[p]),
        thresholds=tuple(float(v) for v in grid[paths[c]]),
        pi_L=float(pay_l[p, c]),
        pi_H=float(pay_h[p, c]),
        p0=float(p0[p, c]),
        bin_width=width,
        value_step=float(np.max(np.diff(grid))) if M > 1 else 0.0,
        mode=mode,
    )

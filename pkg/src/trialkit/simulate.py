"""Monte Carlo simulation of the buyer's game under a direct mechanism.

Paths are driven by counter-based RNG streams (Philox4x64-10, keyed by
seed XOR stream index) so results are bit-identical for a given (seed,
paths) regardless of chunking or worker count. Stream p's uniforms agree
with numpy's ``Generator(Philox(key=[seed ^ p, 0])).random()`` draws,
which the tests pin down.

Per-path uniform slots: 0 type, 1 value, 2 arrival clock, 3 lump
consumption gate, 4 reward count after the news event; the rest of the
16-slot block is reserved.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import poisson

from .mechanism import DirectMechanism, StepFunction
from .primitives import ModelParams, ValueDistribution

_CHUNK = 1 << 17
_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_SHIFT32 = np.uint64(32)
_MASK32 = np.uint64(0xFFFFFFFF)
_U53 = 2.0 ** -53


def _mulhilo(a: np.uint64, b: np.ndarray):
    lo = a * b
    a0, a1 = a & _MASK32, a >> _SHIFT32
    b0, b1 = b & _MASK32, b >> _SHIFT32
    x = a0 * b0
    y = a1 * b0 + (x >> _SHIFT32)
    z = a0 * b1 + (y & _MASK32)
    hi = a1 * b1 + (y >> _SHIFT32) + (z >> _SHIFT32)
    return hi, lo


def _philox_block(c0, c1, c2, c3, k0, k1):
    k0 = k0.copy()
    k1 = k1.copy()
    for r in range(10):
        if r > 0:
            k0 = k0 + _W0
            k1 = k1 + _W1
        hi0, lo0 = _mulhilo(_M0, c0)
        hi1, lo1 = _mulhilo(_M1, c2)
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


def stream_uniforms(seed: int, streams: np.ndarray, n_cols: int = 16) -> np.ndarray:
    """Uniforms [0,1) for the given stream indices, n_cols per stream.

    Matches numpy: column 4j+i is draw 4j+i of Philox keyed [seed ^ s, 0]
    (numpy advances the block counter before each fill, hence j+1 below).
    """
    streams = np.asarray(streams, dtype=np.uint64)
    k0 = np.uint64(seed) ^ streams
    k1 = np.zeros_like(k0)
    out = np.empty((streams.size, n_cols))
    for j in range((n_cols + 3) // 4):
        c0 = np.full(streams.size, j + 1, dtype=np.uint64)
        z = np.zeros_like(c0)
        block = _philox_block(c0, z, z.copy(), z.copy(), k0, k1)
        for i in range(4):
            if 4 * j + i < n_cols:
                out[:, 4 * j + i] = (block[i] >> np.uint64(11)).astype(np.float64) * _U53
    return out


def _path_uniforms(seed: int, lo: int, hi: int, antithetic: bool) -> np.ndarray:
    paths = np.arange(lo, hi, dtype=np.uint64)
    if not antithetic:
        return stream_uniforms(seed, paths)
    u = stream_uniforms(seed, paths >> np.uint64(1))
    odd = (paths & np.uint64(1)).astype(bool)
    u[odd] = 1.0 - u[odd]
    return u


@dataclass(frozen=True)
class BuyerStrategy:
    """A reporting rule for the buyer side of the game."""

    kind: str
    offset: float = 0.0
    value_map: Callable[[float], float] | None = None
    upgrade_time: float = 0.0
    report_value: float | None = None
    label: str | None = None

    @classmethod
    def truthful(cls) -> "BuyerStrategy":
        return cls("truthful")

    @classmethod
    def silent_forever(cls) -> "BuyerStrategy":
        return cls("silent_forever")

    @classmethod
    def delayed_report(cls, offset: float) -> "BuyerStrategy":
        if offset < 0:
            raise ValueError("offset must be nonnegative")
        return cls("delayed_report", offset=offset)

    @classmethod
    def misreport_value(cls, value_map: Callable[[float], float], label: str | None = None) -> "BuyerStrategy":
        return cls("misreport_value", value_map=value_map, label=label)

    @classmethod
    def uninformed_upgrade_at(cls, t: float, report_value: float | None = None) -> "BuyerStrategy":
        return cls("uninformed_upgrade_at", upgrade_time=t, report_value=report_value)

    def describe(self) -> str:
        if self.kind == "delayed_report":
            return f"delayed_report(+{self.offset:g})"
        if self.kind == "uninformed_upgrade_at":
            rv = "" if self.report_value is None else f", v'={self.report_value:g}"
            return f"uninformed_upgrade_at({self.upgrade_time:g}{rv})"
        if self.kind == "misreport_value":
            return f"misreport_value({self.label or '<map>'})"
        return self.kind


@dataclass(frozen=True)
class SimConfig:
    paths: int
    seed: int
    strategy: BuyerStrategy = field(default_factory=BuyerStrategy.truthful)
    antithetic: bool = False

    def __post_init__(self):
        if self.paths < 1:
            raise ValueError("paths must be >= 1")
        if self.antithetic and self.paths % 2:
            raise ValueError("antithetic pairing needs an even path count")


@dataclass
class SimReport:
    paths: int
    seed: int
    strategy: str
    revenue_mean: float
    revenue_se: float
    revenue_H_mean: float
    revenue_H_se: float
    revenue_L_mean: float
    revenue_L_se: float
    buyer_mean: float
    buyer_se: float
    consumption_mean: float
    conservation_gap: float
    n_H: int
    n_L: int

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2)


def invert_cumulative_intensity(access: StepFunction, lam: float, clock) -> np.ndarray:
    """First time lam * integral(access) reaches each exponential clock value
    (np.inf where the total mass is never reached)."""
    edges = access.edges
    mass = lam * access.cumulative(edges)
    clock = np.asarray(clock, dtype=float)
    tau = np.interp(clock, mass, edges)
    return np.where(clock < mass[-1], tau, np.inf)


def sample_arrival(I_U: StepFunction, lam: float, rng: np.random.Generator, size: int | None = None):
    """First-arrival time(s) of the Poisson process with rate lam * I_U(t)."""
    clock = rng.exponential(size=size)
    out = invert_cumulative_intensity(I_U, lam, clock)
    return float(out) if size is None else out


def _poisson_counts(u: np.ndarray, mu: np.ndarray) -> np.ndarray:
    if u.size == 0:
        return np.zeros(0)
    q = np.minimum(u, 1.0 - _U53)
    return np.where(mu > 0.0, poisson.ppf(q, np.maximum(mu, 1e-300)), 0.0)


def _simulate_paths(mech: DirectMechanism, params: ModelParams, dist: ValueDistribution, config: SimConfig):
    lam, T = params.lam, params.horizon
    mu0 = params.mu0
    P = config.paths
    access_u = mech.access_uninformed
    util_u = mech.uninformed_utility()
    p0 = mech.price_uninformed_total
    strat = config.strategy

    theta = np.zeros(P, dtype=bool)
    value = np.zeros(P)
    tau = np.full(P, np.inf)
    delta_paid = np.zeros(P)
    consumption = np.zeros(P)

    for lo in range(0, P, _CHUNK):
        hi = min(lo + _CHUNK, P)
        u = _path_uniforms(config.seed, lo, hi, config.antithetic)
        sl = slice(lo, hi)
        th = u[:, 0] < mu0
        v = dist.quantile(u[:, 1])
        clock = -np.log1p(-u[:, 2])
        theta[sl], value[sl] = th, v
        t_arr = np.where(th, invert_cumulative_intensity(access_u, lam, clock), np.inf)

        if strat.kind == "uninformed_upgrade_at":
            t_up = min(strat.upgrade_time, T)
            if strat.report_value is not None:
                rv = strat.report_value
            elif mech.upgrade_threshold is not None:
                rv = mech.upgrade_threshold
            else:
                rv = float(dist.knots[-1])
            news_first = th & (t_arr < t_up)
            _resolve_report(mech, lam, news_first, t_arr, v, 0.0, None, u, sl,
                            access_u, util_u, tau, delta_paid, consumption)
            upgraded = ~news_first
            d_up = mech.delta(rv, t_up)
            post_a = mech.access_post(rv, t_up)
            post_u = mech.post_utility(rv, t_up)
            delta_paid[sl][upgraded] += d_up
            live = upgraded & th
            if live.any():
                residual = clock[live] - lam * access_u.cumulative(t_up)
                t2 = invert_cumulative_intensity(post_a, lam, residual)
                arrived = np.isfinite(t2)
                a_idx = np.flatnonzero(live)[arrived]
                t2a = t2[arrived]
                ratio = np.where(post_a(t2a) > 1e-12, post_u(t2a) / np.maximum(post_a(t2a), 1e-300), 0.0)
                lump = (u[a_idx, 3] < ratio).astype(float)
                counts = _poisson_counts(u[a_idx, 4], lam * post_u.tail(t2a))
                consumption[sl][a_idx] = v[a_idx] * (lump + counts)
                tau[sl][a_idx] = t2a
        elif strat.kind == "silent_forever":
            idx = np.flatnonzero(th & np.isfinite(t_arr))
            if idx.size:
                ta = t_arr[idx]
                iu = access_u(ta)
                ratio = np.where(iu > 1e-12, util_u(ta) / np.maximum(iu, 1e-300), 0.0)
                lump = (u[idx, 3] < ratio).astype(float)
                counts = _poisson_counts(u[idx, 4], lam * util_u.tail(ta))
                consumption[sl][idx] = v[idx] * (lump + counts)
            tau[sl] = t_arr
        else:
            offset = strat.offset if strat.kind == "delayed_report" else 0.0
            vmap = strat.value_map if strat.kind == "misreport_value" else None
            arrived = th & np.isfinite(t_arr)
            _resolve_report(mech, lam, arrived, t_arr, v, offset, vmap, u, sl,
                            access_u, util_u, tau, delta_paid, consumption)

    revenue = p0 + delta_paid
    buyer = consumption - p0 - delta_paid
    return {
        "theta": theta,
        "value": value,
        "tau": tau,
        "revenue": revenue,
        "buyer": buyer,
        "consumption": consumption,
    }


def _resolve_report(mech, lam, arrived, t_arr, v, offset, vmap, u, sl,
                    access_u, util_u, tau, delta_paid, consumption):
    """Report at news time (plus offset), with an optional value map."""
    T = access_u.end
    idx = np.flatnonzero(arrived)
    if idx.size == 0:
        return
    ta = t_arr[idx]
    rt = np.minimum(ta + offset, T)
    rv = np.array([vmap(x) for x in v[idx]]) if vmap is not None else v[idx]
    iu = access_u(ta)
    ratio = np.where(iu > 1e-12, util_u(ta) / np.maximum(iu, 1e-300), 0.0)
    lump = (u[idx, 3] < ratio).astype(float)
    mid_mass = util_u.tail(ta) - util_u.tail(rt)
    post_mass = np.empty(idx.size)
    dl = np.empty(idx.size)
    for k in range(idx.size):
        post_mass[k] = mech.post_utility(rv[k], rt[k]).integral()
        dl[k] = mech.delta(rv[k], rt[k])
    counts = _poisson_counts(u[idx, 4], lam * (mid_mass + post_mass))
    consumption[sl][idx] = v[idx] * (lump + counts)
    delta_paid[sl][idx] += dl
    tau[sl][idx] = ta


def _mean_se(x: np.ndarray, antithetic: bool) -> tuple[float, float]:
    if x.size == 0:
        return math.nan, math.nan
    if antithetic and x.size % 2 == 0 and x.size >= 4:
        pairs = x.reshape(-1, 2).mean(axis=1)
        return float(pairs.mean()), float(pairs.std(ddof=1) / math.sqrt(pairs.size))
    if x.size < 2:
        return float(x.mean()), math.nan
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def simulate_game(mech: DirectMechanism, params: ModelParams, dist: ValueDistribution, config: SimConfig) -> SimReport:
    """Estimate revenues by type and the buyer's payoff under the configured
    strategy. The accounting identity buyer + revenue = consumption holds
    path by path; the report carries its worst residual."""
    paths = _simulate_paths(mech, params, dist, config)
    theta, revenue, buyer = paths["theta"], paths["revenue"], paths["buyer"]
    rev_mean, rev_se = _mean_se(revenue, config.antithetic)
    buy_mean, buy_se = _mean_se(buyer, config.antithetic)
    rev_h, se_h = _mean_se(revenue[theta], False)
    rev_l, se_l = _mean_se(revenue[~theta], False)
    gap = float(np.max(np.abs(buyer + revenue - paths["consumption"])))
    return SimReport(
        paths=config.paths,
        seed=config.seed,
        strategy=config.strategy.describe(),
        revenue_mean=rev_mean,
        revenue_se=rev_se,
        revenue_H_mean=rev_h,
        revenue_H_se=se_h,
        revenue_L_mean=rev_l,
        revenue_L_se=se_l,
        buyer_mean=buy_mean,
        buyer_se=buy_se,
        consumption_mean=float(paths["consumption"].mean()),
        conservation_gap=gap,
        n_H=int(theta.sum()),
        n_L=int((~theta).sum()),
    )


@dataclass
class ScanRow:
    strategy: str
    buyer_mean: float
    gain_mean: float
    gain_se: float

    @property
    def z(self) -> float:
        if self.gain_se > 0:
            return self.gain_mean / self.gain_se
        return 0.0 if self.gain_mean == 0 else math.copysign(math.inf, self.gain_mean)


def best_response_scan(
    mech: DirectMechanism,
    params: ModelParams,
    dist: ValueDistribution,
    config: SimConfig,
    deviation_set: Sequence[BuyerStrategy],
) -> list[ScanRow]:
    """Common-random-number comparison of each deviation against the
    configured baseline strategy (truthful by default). A mechanism is
    incentive compatible in the scanned family when every gain_mean is
    below 3 gain_se."""
    base = _simulate_paths(mech, params, dist, config)["buyer"]
    rows = [ScanRow(config.strategy.describe(), float(base.mean()), 0.0, 0.0)]
    for dev in deviation_set:
        alt_cfg = SimConfig(paths=config.paths, seed=config.seed, strategy=dev, antithetic=config.antithetic)
        alt = _simulate_paths(mech, params, dist, alt_cfg)["buyer"]
        diff = alt - base
        gain, se = _mean_se(diff, config.antithetic)
        rows.append(ScanRow(dev.describe(), float(alt.mean()), gain, se))
    return rows


def standard_deviations(mech: DirectMechanism, params: ModelParams, dist: ValueDistribution) -> list[BuyerStrategy]:
    """A default deviation battery touching every IC family."""
    T = params.horizon
    vlo, vhi = float(dist.knots[0]), float(dist.knots[-1])
    devs = [
        BuyerStrategy.silent_forever(),
        BuyerStrategy.delayed_report(0.1 * T),
        BuyerStrategy.delayed_report(0.3 * T),
        BuyerStrategy.misreport_value(lambda v: max(vlo, 0.95 * v), label="shade 5%"),
        BuyerStrategy.misreport_value(lambda v: min(vhi, 1.05 * v), label="inflate 5%"),
        BuyerStrategy.misreport_value(lambda v: vlo, label="report floor"),
    ]
    access = mech.access_uninformed
    positive = access.values > 1e-12
    t_end = float(access.edges[1:][positive][-1]) if positive.any() else 0.0
    devs.append(BuyerStrategy.uninformed_upgrade_at(t_end))
    if t_end > 0:
        devs.append(BuyerStrategy.uninformed_upgrade_at(0.5 * t_end))
    return devs

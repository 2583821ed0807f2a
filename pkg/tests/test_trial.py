import math

import numpy as np
import pytest

from trialkit import ModelParams, ValueDistribution, WeightOutOfRange
from trialkit.trial import (
    BOUNDARY_CORNER_T,
    BOUNDARY_INTERIOR,
    BOUNDARY_PRICE_INTERVAL,
    PriceInterval,
    free_trial,
    solve_trial,
    weight_cap,
)

from conftest import random_model, random_uniform_dist

# frozen solver outputs for lam=1, T=5, mu0=0.5, uniform [0.9, 1.1]
FROZEN = {
    0.0: dict(v0=0.9, pi0=0.95, t0=2.10651821862, p0=1.18033202916, pi_H=3.46764458656),
    0.5: dict(v0=0.9, pi0=0.975, t0=2.66946886121, p0=1.44318697689, pi_H=3.39533280997),
    -0.5: dict(v0=0.9, pi0=0.925, t0=1.75971219267, p0=1.01398871955, pi_H=3.42837593744),
}


@pytest.mark.parametrize("wl", sorted(FROZEN))
def test_frozen_solutions(params, narrow, wl):
    rep = solve_trial(params, narrow, wl)
    want = FROZEN[wl]
    assert rep.mechanism.v0 == pytest.approx(want["v0"], abs=1e-9)
    assert rep.pi0 == pytest.approx(want["pi0"], abs=1e-9)
    assert rep.mechanism.t0 == pytest.approx(want["t0"], abs=1e-9)
    assert rep.mechanism.p0 == pytest.approx(want["p0"], abs=1e-9)
    assert rep.payoff_H == pytest.approx(want["pi_H"], abs=1e-9)
    assert rep.payoff_L == rep.mechanism.p0
    assert rep.boundary_case == BOUNDARY_INTERIOR
    assert rep.objective == pytest.approx(wl * rep.payoff_L + rep.payoff_H)


def test_weight_cap():
    assert weight_cap(0.5) == pytest.approx(1.0)
    assert weight_cap(0.25) == pytest.approx(3.0)


def test_cap_weight_sells_whole_horizon(params, narrow):
    rep = solve_trial(params, narrow, weight_cap(params.mu0))
    assert rep.mechanism.t0 == params.horizon
    assert rep.boundary_case == BOUNDARY_CORNER_T
    # both types pay the full first-best surplus
    assert rep.payoff_L == pytest.approx(2.5, abs=1e-10)
    assert rep.payoff_H == pytest.approx(2.5, abs=1e-10)


def test_above_cap_rejected(params, narrow):
    with pytest.raises(WeightOutOfRange):
        solve_trial(params, narrow, weight_cap(params.mu0) + 1e-6)


def test_free_trial_matches_wl_minus_one(params, narrow):
    t_M, v_M, pi_F = free_trial(params, narrow)
    assert t_M == pytest.approx(1.50333582699, abs=1e-9)
    assert v_M == pytest.approx(0.9)
    assert pi_F == pytest.approx(2.44714612467, abs=1e-9)
    rep = solve_trial(params, narrow, -1.0)
    assert rep.mechanism.t0 == pytest.approx(t_M, abs=1e-10)
    assert rep.mechanism.v0 == pytest.approx(v_M, abs=1e-12)
    assert rep.payoff_H - rep.payoff_L == pytest.approx(pi_F, abs=1e-10)


def test_price_interval_below_minus_one(params, narrow):
    rep = solve_trial(params, narrow, -1.5)
    assert rep.boundary_case == BOUNDARY_PRICE_INTERVAL
    assert isinstance(rep.price_interval, PriceInterval)
    assert rep.price_interval.lo == 0.0
    assert rep.price_interval.selected == 0.0
    assert rep.mechanism.p0 == 0.0

    mid = solve_trial(params, narrow, -1.5, selection=0.5)
    assert mid.mechanism.p0 == pytest.approx(0.5 * mid.price_interval.hi)
    with pytest.raises(ValueError):
        solve_trial(params, narrow, -1.5, selection=1.5)


def test_interval_cap_price_is_d1_price(params, narrow):
    # at wl = -1 the admissible price interval tops out at the D1 level
    rep = solve_trial(params, narrow, -1.0)
    assert rep.price_interval.hi == pytest.approx(0.887620475978, abs=1e-9)


def test_uniform_closed_form_threshold(rng):
    # v0 = max(1 - d, A (1 + d) / (1 + A)) on uniform [1-d, 1+d]
    for _ in range(40):
        d = float(rng.uniform(0.05, 0.95))
        mu0 = float(rng.uniform(0.1, 0.9))
        wl = float(rng.uniform(-1.0, weight_cap(mu0)))
        dist = ValueDistribution.uniform(1.0 - d, 1.0 + d)
        params = ModelParams(lam=1.0, horizon=5.0, mu0=mu0)
        A = min(max(1.0 - mu0 * (wl + 1.0), 0.0), 1.0)
        want = max(1.0 - d, A * (1.0 + d) / (1.0 + A))
        rep = solve_trial(params, dist, wl)
        assert rep.mechanism.v0 == pytest.approx(want, abs=1e-8)


def test_comparative_statics_in_weight(params, narrow):
    wls = np.linspace(-1.0, weight_cap(params.mu0), 41)
    reps = [solve_trial(params, narrow, float(w)) for w in wls]
    t0s = np.array([r.mechanism.t0 for r in reps])
    v0s = np.array([r.mechanism.v0 for r in reps])
    assert np.all(np.diff(t0s) >= -1e-10)
    assert np.all(np.diff(v0s) <= 1e-10)


def test_comparative_statics_in_prior(rng):
    dist = ValueDistribution.uniform(0.2, 1.8)
    for wl in (-0.5, 0.0, 0.75):
        # stay under the admissible-weight cap: mu0 < 1 / (1 + wl)
        hi = min(0.85, 1.0 / (1.0 + wl) - 0.02)
        mus = np.linspace(0.15, hi, 29)
        reps = [
            solve_trial(ModelParams(lam=1.0, horizon=5.0, mu0=float(m)), dist, wl)
            for m in mus
        ]
        t0s = np.array([r.mechanism.t0 for r in reps])
        v0s = np.array([r.mechanism.v0 for r in reps])
        assert np.all(np.diff(t0s) >= -1e-10)
        assert np.all(np.diff(v0s) <= 1e-10)


def test_longer_horizon_lengthens_trial(rng):
    for _ in range(20):
        m = random_model(rng)
        dist = random_uniform_dist(rng)
        wl = float(rng.uniform(-1.0, weight_cap(m.mu0)))
        shorter = solve_trial(m, dist, wl)
        stretched = ModelParams(lam=m.lam, horizon=m.horizon * 1.5, mu0=m.mu0)
        longer = solve_trial(stretched, dist, wl)
        assert longer.mechanism.t0 >= shorter.mechanism.t0 - 1e-10


def test_payoffs_scale_with_rate(rng):
    # time rescaling: (lam, T) and (2 lam, T/2) give identical payoffs
    for _ in range(10):
        mu0 = float(rng.uniform(0.2, 0.8))
        wl = float(rng.uniform(-1.0, weight_cap(mu0)))
        dist = random_uniform_dist(rng)
        a = solve_trial(ModelParams(lam=1.0, horizon=6.0, mu0=mu0), dist, wl)
        b = solve_trial(ModelParams(lam=2.0, horizon=3.0, mu0=mu0), dist, wl)
        assert a.payoff_L == pytest.approx(b.payoff_L, abs=1e-9)
        assert a.payoff_H == pytest.approx(b.payoff_H, abs=1e-9)
        assert a.mechanism.t0 == pytest.approx(2.0 * b.mechanism.t0, abs=1e-8)


def test_post_trial_price_identity(params, narrow):
    rep = solve_trial(params, narrow, 0.3)
    m = rep.mechanism
    assert m.post_trial_price == pytest.approx(
        params.lam * m.v0 * (params.horizon - m.t0)
    )

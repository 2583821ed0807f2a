import math

import numpy as np
import pytest

from trialkit import (
    ModelParams,
    PreconditionFailed,
    UseFiniteHorizon,
    ValueDistribution,
    WeightOutOfRange,
)
from trialkit.extensions import (
    ExtendedParams,
    RefundSchedule,
    bad_news_mechanism,
    cancellable_trial,
    infinite_horizon_trial,
    mixed_news_mechanism,
)
from trialkit.trial import free_trial, solve_trial


# -- discounted infinite horizon ---------------------------------------------


def test_infinite_horizon_frozen():
    dist = ValueDistribution.uniform(0.9, 1.1)
    rep = infinite_horizon_trial(1.0, 0.1, 0.3, 0.0, dist)
    assert rep.v0 == pytest.approx(0.9)
    assert rep.pi0 == pytest.approx(0.93, abs=1e-9)
    assert rep.t0 == pytest.approx(2.78736003956, abs=1e-8)
    assert rep.p_uninformed == pytest.approx(0.942822116, abs=1e-8)
    assert rep.upgrade_price == pytest.approx(6.8106568781, abs=1e-8)
    assert rep.r == 0.1
    assert rep.wl == 0.0


def test_infinite_horizon_free_trial_length():
    # wl = -1 kills the price motive: t0 = ln(lam/r + 1) / lam
    dist = ValueDistribution.uniform(0.9, 1.1)
    rep = infinite_horizon_trial(1.0, 0.1, 0.3, -1.0, dist)
    assert rep.t0 == pytest.approx(math.log(11.0), abs=1e-9)
    # the reported price is the participation cap; any lower price works too
    assert rep.p_uninformed > 0.0


def test_infinite_horizon_sells_forever_at_cap():
    dist = ValueDistribution.uniform(0.9, 1.1)
    rep = infinite_horizon_trial(1.0, 0.1, 0.5, 1.0, dist)
    assert math.isinf(rep.t0)
    assert rep.p_uninformed == pytest.approx(5.0, abs=1e-10)
    assert rep.upgrade_price == 0.0


def test_infinite_horizon_needs_discounting():
    dist = ValueDistribution.uniform(0.9, 1.1)
    with pytest.raises(UseFiniteHorizon):
        infinite_horizon_trial(1.0, 0.0, 0.3, 0.0, dist)


def test_infinite_horizon_t0_is_argmax():
    # direct golden-section maximization of the weighted discounted payoff
    dist = ValueDistribution.uniform(0.9, 1.1)
    lam, r, mu0, wl = 1.3, 0.2, 0.4, 0.25
    rep = infinite_horizon_trial(lam, r, mu0, wl, dist)
    g1 = dist.excess_above(rep.v0)
    tail = 1.0 - dist.cdf(rep.v0)

    def value(s):
        pu = mu0 * (lam / r) * (
            -math.expm1(-r * s) + g1 * math.exp(-r * s) * -math.expm1(-lam * s)
        )
        upgrade = (lam * rep.v0 / r) * tail * math.exp(-r * s) * -math.expm1(-lam * s)
        return (1.0 + wl) * pu + upgrade

    grid = np.linspace(0.0, 6.0 * rep.t0, 20_001)
    best = grid[np.argmax([value(s) for s in grid])]
    assert rep.t0 == pytest.approx(best, abs=1e-3)


# -- cancellable trials with flow utility and partial signals -----------------

EXT = ExtendedParams(u=0.2, c=0.5, mu_H=0.8, mu_L=0.2, p_H=0.5, p_L=0.5)


def test_cancellable_frozen(params, wide):
    rep = cancellable_trial(params, EXT, wide, 0.3)
    assert rep.cancel_threshold == pytest.approx(0.3)
    assert rep.v0 == pytest.approx(0.594392523364, abs=1e-8)
    assert rep.t0 == pytest.approx(1.76170344369, abs=1e-8)
    assert rep.pi_premium == pytest.approx(0.565128504673, abs=1e-9)
    assert rep.pi_cancel == pytest.approx(-0.003125, abs=1e-9)
    assert not rep.cancel_all


def test_cancellable_degenerates_to_baseline(params, narrow):
    plain = ExtendedParams(u=0.0, c=0.0, mu_H=1.0, mu_L=0.0, p_H=0.5, p_L=0.5)
    for wl in (0.0, 0.4):
        got = cancellable_trial(params, plain, narrow, wl)
        want = solve_trial(params, narrow, wl)
        assert got.t0 == pytest.approx(want.mechanism.t0, abs=1e-8)
        assert got.v0 == pytest.approx(want.mechanism.v0, abs=1e-8)
    free = cancellable_trial(params, plain, narrow, -1.0)
    t_M, _, _ = free_trial(params, narrow)
    assert free.t0 == pytest.approx(t_M, abs=1e-8)


def test_cancellable_degenerates_at_other_rates(narrow):
    params = ModelParams(lam=1.7, horizon=5.0, mu0=0.5)
    plain = ExtendedParams(u=0.0, c=0.0, mu_H=1.0, mu_L=0.0, p_H=0.5, p_L=0.5)
    got = cancellable_trial(params, plain, narrow, 0.4)
    want = solve_trial(params, narrow, 0.4)
    assert got.t0 == pytest.approx(want.mechanism.t0, abs=1e-8)


def test_cancellable_weight_cap(params, wide):
    # admissible weights stop at p_L / p_H
    with pytest.raises(WeightOutOfRange):
        cancellable_trial(params, EXT, wide, 1.0 + 1e-6)
    cancellable_trial(params, EXT, wide, 1.0)  # the cap itself is fine


def test_cancellable_signal_mix_must_match_prior(wide):
    params = ModelParams(lam=1.0, horizon=5.0, mu0=0.4)
    with pytest.raises(PreconditionFailed):
        cancellable_trial(params, EXT, wide, 0.0)


def test_cancellable_all_cancel_flag(params):
    # c far above u + lam * support_hi: every learned value walks
    dist = ValueDistribution.uniform(0.9, 1.1)
    ext = ExtendedParams(u=0.0, c=2.0, mu_H=1.0, mu_L=0.0, p_H=0.5, p_L=0.5)
    rep = cancellable_trial(params, ext, dist, 0.0)
    assert rep.cancel_all


def test_extended_params_validation():
    with pytest.raises(ValueError):
        ExtendedParams(r=-0.1)
    with pytest.raises(ValueError):
        ExtendedParams(mu_H=0.3, mu_L=0.6)
    with pytest.raises(ValueError):
        ExtendedParams(p_H=-0.2)
    with pytest.raises(ValueError):
        ExtendedParams(l=-1.0)


# -- refund schedules ----------------------------------------------------------


def test_refund_schedule_validation():
    with pytest.raises(ValueError):
        RefundSchedule([0.0, 1.0], [0.5, 0.3])  # nonzero terminal delta
    with pytest.raises(ValueError):
        RefundSchedule([0.0, 0.0], [0.5, 0.0])
    with pytest.raises(ValueError):
        RefundSchedule([0.0], [0.0])


def test_refund_schedule_interpolation():
    fn = lambda t: (2.0 - t) ** 2 / 4.0 - (2.0 - t) / 2.0
    sched = RefundSchedule.tabulate(fn, 2.0)
    for t in (0.0, 0.31, 1.7, 2.0):
        assert sched(t) == pytest.approx(fn(t), abs=1e-5)
    # clipped outside the grid
    assert sched(-1.0) == sched(0.0)
    assert sched(3.0) == sched(2.0)
    arr = sched(np.array([0.5, 1.5]))
    assert arr.shape == (2,)


def test_refund_schedule_rows():
    sched = RefundSchedule([0.0, 1.0, 2.0], [-0.4, -0.1, 0.0])
    assert sched.to_rows() == [(0.0, -0.4), (1.0, -0.1), (2.0, 0.0)]


# -- bad-news learning ----------------------------------------------------------


def test_bad_news_frozen():
    rep = bad_news_mechanism(1.0, 1.0, 0.6, 0.5, 0.0, 2.0)
    assert rep.p0 == pytest.approx(0.633780830483, abs=1e-9)
    assert rep.payoff_H == pytest.approx(rep.p0)
    assert rep.payoff_L == pytest.approx(0.220353282812, abs=1e-9)
    assert rep.expected_refund == pytest.approx(-0.413427547671, abs=1e-9)
    assert rep.falsify_margin >= -1e-8
    # the ex-ante price refunds a time-zero report in full
    assert rep.p0 == pytest.approx(-rep.refund(0.0), abs=1e-10)
    for t, want in [
        (0.5, -0.552851026863),
        (1.0, -0.413666323525),
        (1.5, -0.22551473306),
    ]:
        assert rep.refund(t) == pytest.approx(want, abs=1e-7)


def test_bad_news_refund_shrinks_to_zero():
    rep = bad_news_mechanism(1.0, 1.0, 0.6, 0.5, 0.0, 2.0)
    mags = np.abs(rep.refund.deltas)
    assert np.all(np.diff(mags) <= 1e-12)
    assert rep.refund.deltas[-1] == pytest.approx(0.0, abs=1e-12)
    assert np.all(rep.refund.deltas <= 1e-12)  # refunds, never surcharges


def test_bad_news_preconditions():
    with pytest.raises(PreconditionFailed):
        bad_news_mechanism(1.0, 1.0, 1.2, 0.5, 0.0, 2.0)  # u >= lam l
    with pytest.raises(PreconditionFailed):
        bad_news_mechanism(1.0, 1.0, 0.4, 0.5, 0.0, 2.0)  # u too small
    with pytest.raises(WeightOutOfRange):
        bad_news_mechanism(1.0, 1.0, 0.6, 0.5, 1.5, 2.0)


def test_bad_news_objective_weights(params):
    flat = bad_news_mechanism(1.0, 1.0, 0.6, 0.5, 0.0, 2.0)
    tilted = bad_news_mechanism(1.0, 1.0, 0.6, 0.5, 0.5, 2.0)
    assert tilted.objective == pytest.approx(
        0.5 * tilted.payoff_L + tilted.payoff_H
    )
    assert flat.objective == pytest.approx(flat.payoff_H)


# -- mixed-news learning ---------------------------------------------------------


def test_mixed_news_frozen():
    rep = mixed_news_mechanism(1.0, 0.5, 0.0, 3.0, 3.0, -1.0)
    assert rep.t0 == pytest.approx(2.097386774, abs=1e-6)
    assert rep.objective == pytest.approx(6.06912109, abs=1e-8)
    assert rep.p0 == pytest.approx(3.693741446, abs=1e-6)
    assert rep.payoff_L == pytest.approx(1.721195728, abs=1e-6)
    assert rep.expected_refund_high == pytest.approx(2.375379644, abs=1e-6)
    assert rep.expected_refund_low == pytest.approx(-1.972545718, abs=1e-6)
    assert rep.falsify_margin >= -1e-8
    # low-value reports at time zero walk away with the full price
    assert rep.p0 == pytest.approx(-rep.refund_low(0.0), abs=1e-10)
    # high-value reports before t0 pay a flat surcharge lam vbar (T - t0)
    want = 1.0 * 3.0 * (3.0 - rep.t0)
    assert rep.refund_high(0.0) == pytest.approx(want, abs=1e-7)
    assert rep.refund_high(0.8 * rep.t0) == pytest.approx(want, abs=1e-7)


def test_mixed_news_terminal_zero():
    rep = mixed_news_mechanism(1.0, 0.5, 0.0, 3.0, 3.0, -1.0)
    assert rep.refund_low.deltas[-1] == pytest.approx(0.0, abs=1e-12)
    assert rep.refund_high.deltas[-1] == pytest.approx(0.0, abs=1e-12)


def test_mixed_news_whole_horizon_suboptimal():
    # cutting access at t0 < T beats selling the full horizon
    rep = mixed_news_mechanism(1.0, 0.5, 0.0, 3.0, 3.0, -1.0)
    assert rep.t0 < 3.0
    assert rep.objective > 5.892520641 - 1e-6


def test_mixed_news_preconditions():
    with pytest.raises(PreconditionFailed):
        mixed_news_mechanism(1.0, 0.5, 0.0, 3.0, -0.5, -1.0)
    with pytest.raises(PreconditionFailed):
        mixed_news_mechanism(1.0, 0.5, 0.0, 3.0, 3.0, -0.7)  # mean off 1
    with pytest.raises(WeightOutOfRange):
        mixed_news_mechanism(1.0, 0.5, 1.2, 3.0, 3.0, -1.0)


def test_mixed_news_access_stops_at_t0():
    rep = mixed_news_mechanism(1.0, 0.5, 0.0, 3.0, 3.0, -1.0)
    access = rep.access_uninformed
    assert access(rep.t0 / 2) == 1.0
    assert access(rep.t0 + 0.05) == 0.0

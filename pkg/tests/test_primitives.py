import math

import numpy as np
import pytest

from trialkit import (
    DegenerateDensity,
    IrregularDistribution,
    ModelParams,
    UnsupportedSupport,
    ValueDistribution,
    check_horizon,
    monopoly_price,
    virtual_value,
)


@pytest.mark.parametrize(
    "kw",
    [
        dict(lam=0.0, horizon=5.0, mu0=0.5),
        dict(lam=-1.0, horizon=5.0, mu0=0.5),
        dict(lam=1.0, horizon=0.0, mu0=0.5),
        dict(lam=1.0, horizon=5.0, mu0=0.0),
        dict(lam=1.0, horizon=5.0, mu0=1.0),
    ],
)
def test_model_params_rejects_bad_values(kw):
    with pytest.raises(ValueError):
        ModelParams(**kw)


def test_uniform_basic_shape():
    d = ValueDistribution.uniform(0.9, 1.1)
    assert d.support_lo == pytest.approx(0.9)
    assert d.support_hi == pytest.approx(1.1)
    assert d.mean == pytest.approx(1.0, abs=1e-12)
    assert d.cdf(0.9) == 0.0
    assert d.cdf(1.1) == 1.0
    assert d.cdf(1.0) == pytest.approx(0.5)
    assert d.pdf(1.0) == pytest.approx(5.0)
    assert d.quantile(0.25) == pytest.approx(0.95)


def test_uniform_is_rescaled_to_unit_mean():
    d = ValueDistribution.uniform(1.0, 3.0)
    assert d.mean == pytest.approx(1.0, abs=1e-12)
    assert d.scale == pytest.approx(0.5)
    assert d.support_lo == pytest.approx(0.5)


def test_tabulated_sorts_and_interpolates():
    d = ValueDistribution.tabulated([(1.4, 1.0), (0.6, 0.0), (1.0, 0.5)])
    assert d.support_lo == pytest.approx(0.6)
    assert d.cdf(0.8) == pytest.approx(0.25)
    assert d.pdf(1.2) == pytest.approx(1.25)
    # quantile inverts the piecewise-linear cdf on each cell
    for u in np.linspace(0.01, 0.99, 23):
        assert d.cdf(d.quantile(u)) == pytest.approx(u, abs=1e-12)


def test_distribution_validation_errors():
    with pytest.raises(ValueError):
        ValueDistribution.uniform(1.1, 0.9)
    with pytest.raises(ValueError):
        ValueDistribution("uniform", [0.9], [0.0])
    with pytest.raises(ValueError):
        ValueDistribution("uniform", [0.9, 1.1], [0.1, 1.0])
    with pytest.raises(DegenerateDensity):
        ValueDistribution.tabulated([(0.5, 0.0), (1.0, 0.4), (1.5, 0.4), (2.0, 1.0)])
    with pytest.raises(ValueError):
        ValueDistribution("uniform", [-0.5, 2.5], [0.0, 1.0])


def test_irregular_tabulated_rejected_unless_disabled():
    # density drops across cells, so v - (1-F)/f dips between knots
    points = [(0.2, 0.0), (0.8, 0.3), (1.3, 0.7), (1.9, 1.0)]
    with pytest.raises(IrregularDistribution):
        ValueDistribution.tabulated(points)
    d = ValueDistribution.tabulated(points, check_regularity=False)
    assert d.mean == pytest.approx(1.0, abs=1e-10)


def test_partial_means_match_quadrature():
    d = ValueDistribution.tabulated(
        [(0.2, 0.0), (0.8, 0.3), (1.3, 0.7), (1.9, 1.0)], check_regularity=False
    )
    edges = d.knots

    def integrate(fn, lo):
        # per-cell trapezoids: the density is a step, so never straddle a knot
        total = 0.0
        cuts = np.unique(np.concatenate([[lo], edges[edges > lo]]))
        for a, b in zip(cuts, cuts[1:]):
            vs = np.linspace(a, b, 20_001)
            mid = d.pdf(0.5 * (a + b))
            total += np.trapezoid(fn(vs) * mid, vs)
        return total

    for vhat in (0.2, 0.5, 0.8, 1.0, 1.3, 1.6, 1.9):
        upm = integrate(lambda v: v, vhat)
        exc = integrate(lambda v: v - vhat, vhat)
        assert d.upper_partial_mean(vhat) == pytest.approx(upm, abs=1e-9)
        assert d.excess_above(vhat) == pytest.approx(exc, abs=1e-9)


def test_excess_above_identity():
    # E[(v - a)+] = E[v 1{v >= a}] - a P(v >= a)
    d = ValueDistribution.uniform(0.3, 1.7)
    for a in (0.3, 0.6, 1.0, 1.4):
        want = d.upper_partial_mean(a) - a * (1.0 - d.cdf(a))
        assert d.excess_above(a) == pytest.approx(want, abs=1e-14)


def test_virtual_value_uniform_closed_form():
    d = ValueDistribution.uniform(0.9, 1.1)
    # v - c (1-F)/f with F linear: f = 5, 1-F = (1.1 - v) * 5
    for v in (0.9, 1.0, 1.05, 1.1):
        for c in (0.0, 0.4, 1.0):
            assert virtual_value(d, v, c) == pytest.approx(v - c * (1.1 - v))
    with pytest.raises(ValueError):
        virtual_value(d, 0.8, 1.0)
    with pytest.raises(ValueError):
        virtual_value(d, 1.0, 1.5)


def test_monopoly_price_uniform():
    assert monopoly_price(ValueDistribution.uniform(0.9, 1.1)) == pytest.approx(0.9)
    assert monopoly_price(ValueDistribution.uniform(0.0, 2.0)) == pytest.approx(
        1.0, abs=1e-9
    )
    # interior root: lo < E[v]/2 puts the unconstrained maximizer inside
    d = ValueDistribution.uniform(0.2, 1.8)
    p = monopoly_price(d)
    grid = np.linspace(0.2, 1.8, 40_001)
    rev = grid * (1.0 - d.cdf(grid))
    assert p == pytest.approx(grid[np.argmax(rev)], abs=1e-4)


def test_check_horizon():
    d = ValueDistribution.uniform(0.9, 1.1)
    assert check_horizon(ModelParams(lam=1.0, horizon=5.0, mu0=0.5), d)
    wide = ValueDistribution.uniform(0.2, 1.8)
    assert not check_horizon(ModelParams(lam=1.0, horizon=5.0, mu0=0.9), wide)
    assert check_horizon(ModelParams(lam=10.0, horizon=8.0, mu0=0.9), wide)
    zero_lo = ValueDistribution.uniform(0.0, 2.0)
    with pytest.raises(UnsupportedSupport):
        check_horizon(ModelParams(lam=1.0, horizon=5.0, mu0=0.5), zero_lo)


def test_knots_are_copies():
    d = ValueDistribution.uniform(0.9, 1.1)
    k = d.knots
    k[0] = 0.0
    assert d.support_lo == pytest.approx(0.9)

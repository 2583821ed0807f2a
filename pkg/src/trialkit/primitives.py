"""Model primitives: value distributions, hazard-adjusted values, horizon checks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._roots import bisect_root
from .errors import DegenerateDensity, IrregularDistribution, UnsupportedSupport

_REGULARITY_GRID = 1024
_REGULARITY_TOL = 1e-10
_MEAN_TOL = 1e-8


@dataclass(frozen=True)
class ModelParams:
    """Arrival rate, horizon length and prior probability of a high match."""

    lam: float
    horizon: float
    mu0: float

    def __post_init__(self):
        if self.lam <= 0.0:
            raise ValueError("lam must be strictly positive")
        if self.horizon <= 0.0:
            raise ValueError("horizon must be strictly positive")
        if not 0.0 < self.mu0 < 1.0:
            raise ValueError("mu0 must lie strictly inside (0, 1)")


class ValueDistribution:
    """Buyer value law on [support_lo, support_hi].

    Both families reduce to a piecewise-linear CDF over sorted knots: the
    uniform family is the two-knot special case, the tabulated family carries
    the user's breakpoints. Density is the per-cell CDF slope, so all moments
    used by the solvers (mean, partial means) are exact cell sums.

    Unless ``allow_unnormalized`` is set, the support is rescaled so the mean
    equals 1; the applied factor is kept in ``scale``.
    """

    __slots__ = ("family", "_vs", "_Fs", "_slopes", "scale", "allow_unnormalized")

    def __init__(
        self,
        family: str,
        knots_v: Sequence[float],
        knots_F: Sequence[float],
        *,
        allow_unnormalized: bool = False,
        check_regularity: bool = True,
    ):
        vs = np.asarray(knots_v, dtype=float)
        Fs = np.asarray(knots_F, dtype=float)
        if vs.ndim != 1 or vs.shape != Fs.shape or len(vs) < 2:
            raise ValueError("need matching 1-d knot arrays with at least two points")
        if np.any(np.diff(vs) <= 0.0):
            raise ValueError("value knots must be strictly increasing")
        if abs(Fs[0]) > 1e-12 or abs(Fs[-1] - 1.0) > 1e-12:
            raise ValueError("CDF knots must start at 0 and end at 1")
        if np.any(np.diff(Fs) <= 0.0):
            raise DegenerateDensity("CDF must be strictly increasing between knots")
        Fs = Fs.copy()
        Fs[0], Fs[-1] = 0.0, 1.0
        if vs[0] < 0.0:
            raise ValueError("support must be nonnegative")

        scale = 1.0
        if not allow_unnormalized:
            mean = self._raw_mean(vs, Fs)
            if abs(mean - 1.0) > _MEAN_TOL:
                scale = 1.0 / mean
                vs = vs * scale
            if abs(self._raw_mean(vs, Fs) - 1.0) > _MEAN_TOL:
                raise ValueError("normalization failed to bring the mean to 1")

        self.family = family
        self._vs = vs
        self._Fs = Fs
        self._slopes = np.diff(Fs) / np.diff(vs)
        self.scale = scale
        self.allow_unnormalized = allow_unnormalized

        if check_regularity:
            self._check_regular()

    # -- constructors -------------------------------------------------------

    @classmethod
    def uniform(cls, lo: float, hi: float, **kw) -> "ValueDistribution":
        if not hi > lo:
            raise ValueError("need hi > lo")
        return cls("uniform", [lo, hi], [0.0, 1.0], **kw)

    @classmethod
    def tabulated(cls, points: Sequence[Sequence[float]], **kw) -> "ValueDistribution":
        pts = sorted((float(v), float(F)) for v, F in points)
        vs = [p[0] for p in pts]
        Fs = [p[1] for p in pts]
        return cls("tabulated", vs, Fs, **kw)

    # -- internals -----------------------------------------------------------

    @staticmethod
    def _raw_mean(vs: np.ndarray, Fs: np.ndarray) -> float:
        # density is constant per cell: cell mass times cell midpoint, summed
        masses = np.diff(Fs)
        mids = 0.5 * (vs[:-1] + vs[1:])
        return float(np.dot(masses, mids))

    def _check_regular(self) -> None:
        grid = np.linspace(self._vs[0], self._vs[-1], _REGULARITY_GRID)
        psi = grid - (1.0 - self.cdf(grid)) / self.pdf(grid)
        if np.any(np.diff(psi) < -_REGULARITY_TOL):
            raise IrregularDistribution(
                "v - (1 - F(v))/f(v) is not nondecreasing on the support"
            )

    def _cell(self, v):
        idx = np.searchsorted(self._vs, v, side="right") - 1
        return np.clip(idx, 0, len(self._slopes) - 1)

    # -- queries -------------------------------------------------------------

    @property
    def support_lo(self) -> float:
        return float(self._vs[0])

    @property
    def support_hi(self) -> float:
        return float(self._vs[-1])

    @property
    def knots(self) -> np.ndarray:
        """Breakpoints of the piecewise-linear CDF (copy)."""
        return self._vs.copy()

    @property
    def mean(self) -> float:
        return self._raw_mean(self._vs, self._Fs)

    def cdf(self, v):
        """F(v), extended by 0 below and 1 above the support."""
        return np.interp(v, self._vs, self._Fs, left=0.0, right=1.0)

    def pdf(self, v):
        """f(v); zero outside the support."""
        v = np.asarray(v, dtype=float)
        inside = (v >= self._vs[0]) & (v <= self._vs[-1])
        out = np.where(inside, self._slopes[self._cell(v)], 0.0)
        return out if out.ndim else float(out)

    def quantile(self, u):
        """Inverse CDF; exact for the piecewise-linear representation."""
        return np.interp(u, self._Fs, self._vs)

    def upper_partial_mean(self, vhat: float) -> float:
        """Integral of v f(v) dv over [vhat, support_hi], exact per cell."""
        vhat = float(vhat)
        if vhat <= self._vs[0]:
            return self.mean
        if vhat >= self._vs[-1]:
            return 0.0
        i = int(self._cell(vhat))
        vs, slopes = self._vs, self._slopes
        a = np.maximum(vs[:-1], vhat)
        full = 0.5 * slopes * (vs[1:] ** 2 - a**2)
        return float(np.sum(full[i:]))

    def excess_above(self, vhat: float) -> float:
        """Integral of (v - vhat) f(v) dv over [vhat, support_hi]."""
        return self.upper_partial_mean(vhat) - vhat * (1.0 - float(self.cdf(vhat)))


def virtual_value(dist: ValueDistribution, v: float, coeff: float) -> float:
    """Hazard-adjusted value v - coeff * (1 - F(v)) / f(v).

    At the upper support endpoint the hazard term vanishes and the value
    itself is returned. coeff must lie in [0, 1].
    """
    v = float(v)
    if not dist.support_lo <= v <= dist.support_hi:
        raise ValueError(f"v={v:g} outside the support")
    if not 0.0 <= coeff <= 1.0:
        raise ValueError("coeff must lie in [0, 1]")
    if v == dist.support_hi:
        return v
    d = float(dist.pdf(v))
    if d <= 0.0:
        raise DegenerateDensity(f"pdf vanishes at interior point v={v:g}")
    return v - coeff * (1.0 - float(dist.cdf(v))) / d


def monopoly_price(dist: ValueDistribution) -> float:
    """Maximizer of v (1 - F(v)) over the support.

    Under regularity this is max(support_lo, root of the coeff=1 adjusted
    value), found by bisection to 1e-10.
    """
    lo, hi = dist.support_lo, dist.support_hi
    if virtual_value(dist, lo, 1.0) >= 0.0:
        return lo
    return bisect_root(lambda v: virtual_value(dist, v, 1.0), lo, hi, tol=1e-10)


def check_horizon(params: ModelParams, dist: ValueDistribution) -> bool:
    """True iff lam * T >= 2 (mu0 - support_lo)+ / ((1 - mu0) * support_lo).

    A nonpositive numerator always passes. Undefined for support_lo = 0.
    """
    vlo = dist.support_lo
    if vlo <= 0.0:
        raise UnsupportedSupport("horizon condition undefined for support_lo = 0")
    needed = 2.0 * max(params.mu0 - vlo, 0.0) / ((1.0 - params.mu0) * vlo)
    return params.lam * params.horizon >= needed

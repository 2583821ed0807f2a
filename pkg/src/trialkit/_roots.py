"""Bracketed scalar root finding and unimodal maximization.

Every residual solved in this package is monotone by construction, so plain
bisection is robust and sufficient; golden-section covers the few objectives
without a usable derivative.
"""

from __future__ import annotations

import math
from typing import Callable

from .errors import BracketingError

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def bisect_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    tol: float = 1e-10,
    f_lo: float | None = None,
    f_hi: float | None = None,
) -> float:
    """Root of ``f`` on [lo, hi] by bisection to absolute tolerance ``tol`` in x.

    The endpoint values must differ in sign; pass ``f_lo``/``f_hi`` to reuse
    already-computed endpoint evaluations.
    """
    a, b = float(lo), float(hi)
    fa = f(a) if f_lo is None else f_lo
    fb = f(b) if f_hi is None else f_hi
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0.0) == (fb > 0.0):
        raise BracketingError(
            f"no sign change on [{a:g}, {b:g}]: f(a)={fa:.6g}, f(b)={fb:.6g}"
        )
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm > 0.0) == (fa > 0.0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def golden_max(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    tol: float = 1e-8,
) -> float:
    """Argmax of a unimodal ``f`` on [lo, hi] by golden-section search."""
    a, b = float(lo), float(hi)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)

"""Adaptive Simpson quadrature.

Small self-contained integrator used for warp-profile integrals (volumes,
arc lengths, angle sweeps).  The absolute tolerance convention follows the
geometry modules: callers pass ``tol = 1e-10 * (domain length)`` unless they
need something tighter.
"""

from __future__ import annotations

from typing import Callable


def _simpson(f0: float, fm: float, f1: float, h: float) -> float:
    return h * (f0 + 4.0 * fm + f1) / 6.0


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-12, max_depth: int = 48) -> float:
    """Integrate ``f`` over [a, b] to absolute tolerance ``tol``."""
    if a == b:
        return 0.0
    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    whole = _simpson(fa, fm, fb, b - a)
    return _rec(f, a, b, fa, fm, fb, whole, tol, max_depth)


def _rec(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = _simpson(fa, flm, fm, m - a)
    right = _simpson(fm, frm, fb, b - m)
    err = left + right - whole
    if depth <= 0 or abs(err) <= 15.0 * tol:
        return left + right + err / 15.0
    return (_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + _rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1))

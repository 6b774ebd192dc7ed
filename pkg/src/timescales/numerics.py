"""
Numerical kernels: adaptive Simpson quadrature and one-sided Richardson
differentiation.  Both are deterministic and evaluate the integrand only at
points inside the closed interval they are given.
"""

from __future__ import annotations

import math
from typing import Callable

QUAD_TOL = 1e-11
QUAD_MAX_DEPTH = 40

DIFF_H0_MAX = 1e-2
DIFF_LEVELS = 12
_SAFE = 2.0


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = QUAD_TOL, max_depth: int = QUAD_MAX_DEPTH) -> float:
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    Classic Lyness scheme: a panel is accepted when the two-half Simpson sum
    differs from the whole-panel sum by at most ``15 * tol``; the accepted
    value carries the Richardson correction ``delta / 15``.  The tolerance is
    halved at every split and recursion stops at ``max_depth``.
    """
    if a == b:
        return 0.0
    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_panel(f, a, m, b, fa, fm, fb, whole, tol, max_depth)


def _simpson_panel(f, a, m, b, fa, fm, fb, whole, tol, depth):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if depth <= 0 or abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    return (_simpson_panel(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + _simpson_panel(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1))


def one_sided_derivative(f: Callable[[float], float], t: float, direction: int,
                         h0: float, levels: int = DIFF_LEVELS) -> tuple[float, float]:
    """Limit of the difference quotient ``(f(s) - f(t)) / (s - t)`` as ``s -> t``.

    ``s = t + direction*h`` with ``h = h0 * 2**-k`` for ``k < levels``; the
    quotients are extrapolated with a Ridders/Neville tableau.  One-sided
    quotients carry every power of ``h`` in their error expansion, so column
    ``j`` eliminates the ``h**j`` term (factor ``2**j``).

    Returns ``(value, est_error)`` where ``est_error`` is the gap between the
    selected extrapolant and its two tableau predecessors.
    """
    if h0 <= 0:
        raise ValueError("h0 must be positive")
    ft = f(t)

    def quotient(h):
        s = t + direction * h
        return (f(s) - ft) / (s - t)

    prev = [quotient(h0)]
    best, err = prev[0], math.inf
    h = h0
    for i in range(1, levels):
        h *= 0.5
        row = [quotient(h)]
        fac = 2.0
        for j in range(1, i + 1):
            row.append((fac * row[j - 1] - prev[j - 1]) / (fac - 1.0))
            fac *= 2.0
            errt = max(abs(row[j] - row[j - 1]), abs(row[j] - prev[j - 1]))
            if errt <= err:
                best, err = row[j], errt
        if abs(row[i] - prev[i - 1]) >= _SAFE * err:
            break
        prev = row
    return best, err

"""
Delta and nabla derivatives and integrals of functions on a time scale.

At a scattered point the derivative is the exact difference quotient across
the gap.  At a dense point it is the one-sided limit of difference quotients,
estimated by Richardson extrapolation inside the segment that contains the
point.

Integrals are evaluated by decomposition: adaptive Simpson over every maximal
interval of ``[a, b] ∩ T`` plus the exact contribution ``mu(t) f(t)``
(``nu(t) f(t)`` for nabla) of every scattered point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .errors import (
    EndpointNotInScale,
    NotInDomainKappa,
    OrderViolation,
    PointNotInScale,
    StepUnderflow,
)
from .expr import Expr, compile_expr, diff, parse
from .numerics import DIFF_H0_MAX, adaptive_simpson, one_sided_derivative
from .report import IdentityReport
from .timescale import DEFAULT_DENSITY, TimeScale

REGULARITY_TAGS = ("C_rd", "C_ld", "C1_rd", "C1_ld", "C_prd", "C_pld", "C1_prd", "C1_pld", "smooth")

_EPS = 2.220446049250313e-16


@dataclass(frozen=True, eq=False)
class TsFunction:
    """A function on a time scale, backed by an expression in ``t``.

    ``table`` is the one alternative representation: a point-to-value map on
    a purely discrete scale (used for minimizers found numerically).
    """

    expr: Expr | None
    scale: TimeScale
    regularity: str = "smooth"
    table: tuple[tuple[float, float], ...] | None = None
    _fn: Callable[[float], float] = field(init=False, repr=False)
    _dfn: Callable[[float], float] | None = field(init=False, repr=False, default=None)

    def __post_init__(self):
        if self.regularity not in REGULARITY_TAGS:
            raise ValueError(f"unknown regularity tag {self.regularity!r}")
        if (self.expr is None) == (self.table is None):
            raise ValueError("give exactly one of expr or table")
        if self.table is not None:
            if not self.scale.is_discrete:
                raise ValueError("table-backed functions live on purely discrete scales only")
            values = dict(self.table)
            if sorted(values) != self.scale.points():
                raise ValueError("table must list every point of the scale exactly once")

            def lookup(t):
                try:
                    return values[t]
                except KeyError:
                    raise PointNotInScale(t) from None

            object.__setattr__(self, "_fn", lookup)
            return
        if self.expr.free_vars() - {"t"}:
            raise ValueError("a time-scale function may only depend on t")
        fn = compile_expr(self.expr, ("t",))
        object.__setattr__(self, "_fn", fn)
        for t in self.scale.sample_points(DEFAULT_DENSITY):
            fn(t)

    @classmethod
    def from_source(cls, source: str, scale: TimeScale, regularity: str = "smooth") -> "TsFunction":
        return cls(parse(source, ("t",)), scale, regularity)

    @classmethod
    def from_table(cls, pairs: Iterable[tuple[float, float]], scale: TimeScale,
                   regularity: str = "smooth") -> "TsFunction":
        table = tuple(sorted((float(t), float(y)) for t, y in pairs))
        return cls(None, scale, regularity, table)

    def __call__(self, t: float) -> float:
        return self._fn(t)

    def slope(self, t: float) -> float:
        """Classical derivative of the backing expression at ``t``.

        At a dense point of the scale this is the delta and the nabla
        derivative; integrands use it instead of a numerical limit.
        """
        if self._dfn is None:
            if self.expr is None:
                raise StepUnderflow("a table-backed function has no dense points")
            object.__setattr__(self, "_dfn", compile_expr(diff(self.expr, "t"), ("t",)))
        return self._dfn(t)

    def __repr__(self):
        body = str(self.expr) if self.expr is not None else f"table[{len(self.table)}]"
        return f"TsFunction({body!r} on {self.scale}, {self.regularity})"


@dataclass(frozen=True)
class DerivativeResult:
    value: float
    method: str  # "scattered-exact" | "dense-limit"
    est_error: float


# ---------------------------------------------------------------------------
# derivatives


def _segment_room(scale: TimeScale, t: float) -> tuple[float, float]:
    lo, hi = scale.segments[scale.segment_index(t)]
    return lo, hi


def dense_limit(fn: Callable[[float], float], scale: TimeScale, t: float,
                prefer: int) -> DerivativeResult:
    """Derivative of ``fn`` at a dense point ``t`` from inside ``t``'s segment.

    ``prefer=+1`` steps forward (delta) and ``-1`` backward (nabla).  When the
    preferred side has less room than the initial step the other side is
    used; at a dense point both one-sided limits agree, and at ``max(T)``
    (``min(T)``) only one side exists.
    """
    lo, hi = _segment_room(scale, t)
    if hi == lo:
        raise StepUnderflow(f"no admissible step at isolated point {t!r}")
    h0 = min(DIFF_H0_MAX, (hi - lo) / 4.0)
    if prefer > 0:
        direction = 1 if hi - t >= h0 else -1
    else:
        direction = -1 if t - lo >= h0 else 1
    value, err = one_sided_derivative(fn, t, direction, h0)
    return DerivativeResult(value, "dense-limit", err)


def _scattered(fa: float, fb: float, gap: float) -> DerivativeResult:
    value = (fb - fa) / gap
    est = _EPS * ((abs(fa) + abs(fb)) / gap + abs(value))
    return DerivativeResult(value, "scattered-exact", est)


def delta_derivative(f: TsFunction, t: float) -> DerivativeResult:
    T = f.scale
    if not T.in_kappa_upper(t):
        raise NotInDomainKappa(f"{t!r} is not in T^kappa of {T}")
    s = T.sigma(t)
    if s > t:
        return _scattered(f(t), f(s), s - t)
    return dense_limit(f, T, t, +1)


def nabla_derivative(f: TsFunction, t: float) -> DerivativeResult:
    T = f.scale
    if not T.in_kappa_lower(t):
        raise NotInDomainKappa(f"{t!r} is not in T_kappa of {T}")
    r = T.rho(t)
    if r < t:
        return _scattered(f(r), f(t), t - r)
    return dense_limit(f, T, t, -1)


def delta_slope(f: TsFunction, scale: TimeScale, t: float) -> float:
    """``f^Delta(t)`` for use inside integrands: exact quotient or symbolic slope."""
    s = scale.sigma(t)
    if s > t:
        return (f(s) - f(t)) / (s - t)
    return f.slope(t)


def nabla_slope(f: TsFunction, scale: TimeScale, t: float) -> float:
    r = scale.rho(t)
    if r < t:
        return (f(t) - f(r)) / (t - r)
    return f.slope(t)


# ---------------------------------------------------------------------------
# useful formulas


def _scale_id(scale: TimeScale) -> str:
    return str(scale)


def check_sigma_formula(f: TsFunction, t: float, tol: float) -> IdentityReport:
    """Residual of ``f(sigma(t)) = f(t) + mu(t) f^Delta(t)`` at one point."""
    d = delta_derivative(f, t)
    T = f.scale
    residual = abs(f(T.sigma(t)) - f(t) - T.mu(t) * d.value)
    return IdentityReport("sigma_formula", _scale_id(T), 1, residual, tol)


def check_rho_formula(f: TsFunction, t: float, tol: float) -> IdentityReport:
    """Residual of ``f(rho(t)) = f(t) - nu(t) f^Nabla(t)`` at one point."""
    d = nabla_derivative(f, t)
    T = f.scale
    residual = abs(f(T.rho(t)) - f(t) + T.nu(t) * d.value)
    return IdentityReport("rho_formula", _scale_id(T), 1, residual, tol)


# ---------------------------------------------------------------------------
# integrals


def _check_endpoints(scale: TimeScale, a: float, b: float):
    for name, x in (("a", a), ("b", b)):
        if not scale.contains(x):
            raise EndpointNotInScale(f"{name}={x!r} is not in {scale}")
    if a > b:
        raise OrderViolation(f"a={a!r} > b={b!r}")


def integrate(scale: TimeScale, a: float, b: float, setting: str,
              dense: Callable[[float], float],
              point: Callable[[float], float] | None = None) -> float:
    """Delta or nabla integral over ``[a, b]`` of an integrand given in two parts.

    ``dense`` is the integrand's continuous extension on each segment (what
    the quadrature sees); ``point`` is its value at scattered points, where it
    may differ because terms such as ``y(sigma(t))`` jump.  ``point`` defaults
    to ``dense``.
    """
    _check_endpoints(scale, a, b)
    if point is None:
        point = dense
    if a == b:
        return 0.0
    segs = scale.segments
    terms = []
    for i, (lo, hi) in enumerate(segs):
        if hi < a or lo > b:
            continue
        p, q = max(lo, a), min(hi, b)
        if setting == "delta":
            # right-scattered point hi, gap to the next segment
            if i + 1 < len(segs) and a <= hi < b:
                terms.append((segs[i + 1][0] - hi) * point(hi))
        elif setting == "nabla":
            if i > 0 and a < lo <= b:
                terms.append((lo - segs[i - 1][1]) * point(lo))
        else:
            raise ValueError(f"setting must be 'delta' or 'nabla', not {setting!r}")
        if p < q:
            terms.append(adaptive_simpson(dense, p, q))
    return math.fsum(terms)


def delta_integral(f: TsFunction, a: float, b: float) -> float:
    return integrate(f.scale, a, b, "delta", f)


def nabla_integral(f: TsFunction, a: float, b: float) -> float:
    return integrate(f.scale, a, b, "nabla", f)


# ---------------------------------------------------------------------------
# integration by parts


def _same_scale(f: TsFunction, g: TsFunction) -> TimeScale:
    if f.scale != g.scale:
        raise ValueError("both functions must live on the same time scale")
    return f.scale


def ibp_delta_residual(f: TsFunction, g: TsFunction, a: float, b: float) -> float:
    """``|int f g^D - [f g]_a^b + int f^D g^sigma|`` over ``[a, b]``."""
    T = _same_scale(f, g)
    lhs = integrate(T, a, b, "delta",
                    dense=lambda s: f(s) * g.slope(s),
                    point=lambda s: f(s) * delta_slope(g, T, s))
    rest = integrate(T, a, b, "delta",
                     dense=lambda s: f.slope(s) * g(s),
                     point=lambda s: delta_slope(f, T, s) * g(T.sigma(s)))
    return abs(lhs - (f(b) * g(b) - f(a) * g(a)) + rest)


def ibp_nabla_residual(h: TsFunction, j: TsFunction, a: float, b: float) -> float:
    """``|int h j^N - [h j]_a^b + int h^N j^rho|`` over ``[a, b]``."""
    T = _same_scale(h, j)
    lhs = integrate(T, a, b, "nabla",
                    dense=lambda s: h(s) * j.slope(s),
                    point=lambda s: h(s) * nabla_slope(j, T, s))
    rest = integrate(T, a, b, "nabla",
                     dense=lambda s: h.slope(s) * j(s),
                     point=lambda s: nabla_slope(h, T, s) * j(T.rho(s)))
    return abs(lhs - (h(b) * j(b) - h(a) * j(a)) + rest)


def check_integration_by_parts_delta(f: TsFunction, g: TsFunction, a: float, b: float,
                                     tol: float) -> IdentityReport:
    residual = ibp_delta_residual(f, g, a, b)
    return IdentityReport("integration_by_parts_delta", _scale_id(f.scale), 1, residual, tol)


def check_integration_by_parts_nabla(h: TsFunction, j: TsFunction, a: float, b: float,
                                     tol: float) -> IdentityReport:
    residual = ibp_nabla_residual(h, j, a, b)
    return IdentityReport("integration_by_parts_nabla", _scale_id(h.scale), 1, residual, tol)

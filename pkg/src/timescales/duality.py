"""
Dual time scales, dual functions and executable checks of the delta/nabla
correspondences.

The dual of ``T`` is ``{-t : t in T}``; the dual of ``f`` is ``s -> f(-s)``.
Every ``verify_*`` function evaluates both sides of one correspondence on a
finite witness set and returns an :class:`IdentityReport`.  Scale-level
(structural) identities require a residual of exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .calculus import (
    TsFunction,
    check_integration_by_parts_delta,
    check_integration_by_parts_nabla,
    delta_derivative,
    delta_integral,
    nabla_derivative,
    nabla_integral,
)
from .errors import TimeScaleError
from .expr import substitute_negate
from .report import IdentityReport
from .timescale import DEFAULT_DENSITY, TimeScale

DUAL_REGULARITY = {
    "C_rd": "C_ld", "C_ld": "C_rd",
    "C1_rd": "C1_ld", "C1_ld": "C1_rd",
    "C_prd": "C_pld", "C_pld": "C_prd",
    "C1_prd": "C1_pld", "C1_pld": "C1_prd",
    "smooth": "smooth",
}

_RD_CLASSES = {"C_rd", "C1_rd", "C_prd", "C1_prd", "smooth"}
_LD_CLASSES = {"C_ld", "C1_ld", "C_pld", "C1_pld", "smooth"}


def dual_scale(T: TimeScale) -> TimeScale:
    """Reverse and negate the segments: ``[lo, hi] -> [-hi, -lo]``."""
    return TimeScale(tuple((-hi + 0.0, -lo + 0.0) for lo, hi in reversed(T.segments)))


@dataclass(frozen=True)
class DualPair:
    original: TimeScale
    dual: TimeScale

    @classmethod
    def of(cls, T: TimeScale) -> "DualPair":
        return cls(T, dual_scale(T))


def dual_function(f: TsFunction) -> TsFunction:
    """``f*(s) = f(-s)`` on the dual scale, with the regularity tag transported."""
    scale = dual_scale(f.scale)
    regularity = DUAL_REGULARITY[f.regularity]
    if f.table is not None:
        return TsFunction.from_table(((-t + 0.0, y) for t, y in f.table), scale, regularity)
    return TsFunction(substitute_negate(f.expr, "t"), scale, regularity)


# ---------------------------------------------------------------------------
# structural identities


def verify_jump_duality(T: TimeScale, tol: float = 0.0) -> IdentityReport:
    """``sigma*(s) = -rho(-s)`` and ``rho*(s) = -sigma(-s)`` on the dual grid.

    ``tol`` is accepted for a uniform interface; the check demands an exact
    match.
    """
    D = dual_scale(T)
    pts = D.sample_points(DEFAULT_DENSITY)
    worst = 0.0
    for s in pts:
        worst = max(worst, abs(D.sigma(s) + T.rho(-s)), abs(D.rho(s) + T.sigma(-s)))
    return IdentityReport("jump_duality", str(T), len(pts), worst, 0.0)


def _segment_mismatch(A: TimeScale, B: TimeScale) -> float:
    if len(A) != len(B):
        return float(abs(len(A) - len(B)) + min(len(A), len(B)))
    return float(sum(1 for x, y in zip(A.segments, B.segments) if x != y))


def verify_kappa_duality(T: TimeScale) -> IdentityReport:
    """``(T^k)* = (T*)_k`` and ``(T_k)* = (T*)^k`` as canonical scales.

    The residual counts mismatched segments, so a pass means structural
    equality.
    """
    D = dual_scale(T)
    upper = _segment_mismatch(dual_scale(T.kappa_upper()), D.kappa_lower())
    lower = _segment_mismatch(dual_scale(T.kappa_lower()), D.kappa_upper())
    return IdentityReport("kappa_duality", str(T), 2 * len(T), max(upper, lower), 0.0)


def verify_graininess_duality(T: TimeScale, tol: float = 0.0) -> IdentityReport:
    """``nu*(s) = mu(-s)`` and ``mu*(s) = nu(-s)`` exactly on the dual grid."""
    D = dual_scale(T)
    pts = D.sample_points(DEFAULT_DENSITY)
    worst = 0.0
    for s in pts:
        worst = max(worst, abs(D.nu(s) - T.mu(-s)), abs(D.mu(s) - T.nu(-s)))
    return IdentityReport("graininess_duality", str(T), len(pts), worst, 0.0)


def verify_classification_duality(T: TimeScale) -> IdentityReport:
    """``t`` right-dense (right-scattered) iff ``-t`` left-dense (left-scattered)."""
    D = dual_scale(T)
    pts = T.sample_points(DEFAULT_DENSITY)
    bad = 0
    for t in pts:
        c, d = T.classify(t), D.classify(-t)
        bad += (c.right_dense != d.left_dense) + (c.left_dense != d.right_dense)
    return IdentityReport("classification_duality", str(T), len(pts), float(bad), 0.0)


def verify_regularity_transport() -> IdentityReport:
    """The tag map is an involution that swaps rd and ld classes."""
    bad = 0
    for tag, dual in DUAL_REGULARITY.items():
        bad += DUAL_REGULARITY[dual] != tag
        bad += (tag in _RD_CLASSES) != (dual in _LD_CLASSES)
    return IdentityReport("regularity_transport", "-", len(DUAL_REGULARITY), float(bad), 0.0)


# ---------------------------------------------------------------------------
# analytic identities


DualMap = Callable[[TsFunction], TsFunction]


def verify_derivative_duality(f: TsFunction, tol: float,
                              dual: DualMap = dual_function) -> IdentityReport:
    """``f^D(t) = -(f*)^N(-t)`` on ``T^k`` and ``f^N(t) = -(f*)^D(-t)`` on ``T_k``.

    At each point the residual ``|f^D(t) + (f*)^N(-t)|`` is reduced by the
    two derivatives' error estimates; ``max_residual`` is the largest such
    excess, so a pass means every point is within ``tol`` plus its own
    estimate.  Dense points whose estimate exceeds ``tol/10`` are skipped and
    counted in ``report.skipped``.
    """
    T = f.scale
    fs = dual(f)
    worst = 0.0
    checked = skipped = 0
    pairs = ((T.kappa_upper(), delta_derivative, nabla_derivative),
             (T.kappa_lower(), nabla_derivative, delta_derivative))
    for domain, here, there in pairs:
        for t in domain.sample_points(DEFAULT_DENSITY):
            d1 = here(f, t)
            d2 = there(fs, -t)
            allowance = d1.est_error + d2.est_error
            if "dense-limit" in (d1.method, d2.method) and allowance > tol / 10:
                skipped += 1
                continue
            checked += 1
            worst = max(worst, abs(d1.value + d2.value) - allowance)
    report = IdentityReport("derivative_duality", str(T), checked, worst, tol)
    report.skipped = skipped
    return report


def verify_integral_duality(f: TsFunction, a: float, b: float, tol: float,
                            dual: DualMap = dual_function) -> IdentityReport:
    """``int_a^b f Dt = int_{-b}^{-a} f* Ns``, plus the nabla/delta mirror.

    The mirror is checked when ``f`` is declared ld-continuous.
    """
    fs = dual(f)
    parts = []
    if f.regularity in _RD_CLASSES:
        parts.append(abs(delta_integral(f, a, b) - nabla_integral(fs, -b, -a)))
    if f.regularity in _LD_CLASSES:
        parts.append(abs(nabla_integral(f, a, b) - delta_integral(fs, -b, -a)))
    return IdentityReport("integral_duality", str(f.scale), len(parts), max(parts, default=0.0), tol)


def verify_sigma_formula(f: TsFunction, tol: float) -> IdentityReport:
    """``f(sigma(t)) = f(t) + mu(t) f^D(t)`` at every grid point of ``T^k``."""
    T = f.scale
    pts = T.kappa_upper().sample_points(DEFAULT_DENSITY)
    worst = 0.0
    for t in pts:
        worst = max(worst, abs(f(T.sigma(t)) - f(t) - T.mu(t) * delta_derivative(f, t).value))
    return IdentityReport("sigma_formula", str(T), len(pts), worst, tol)


def verify_rho_formula(f: TsFunction, tol: float) -> IdentityReport:
    """``f(rho(t)) = f(t) - nu(t) f^N(t)`` at every grid point of ``T_k``."""
    T = f.scale
    pts = T.kappa_lower().sample_points(DEFAULT_DENSITY)
    worst = 0.0
    for t in pts:
        worst = max(worst, abs(f(T.rho(t)) - f(t) + T.nu(t) * nabla_derivative(f, t).value))
    return IdentityReport("rho_formula", str(T), len(pts), worst, tol)


def verify_rho_formula_via_dual(f: TsFunction, tol: float,
                                dual: DualMap = dual_function) -> IdentityReport:
    """Term-by-term transport of the sigma formula on ``T*`` to the rho formula on ``T``.

    For ``t`` in ``T_k``: ``(f*)(sigma*(-t)) = f(rho(t))`` and
    ``mu*(-t) (f*)^D(-t) = -nu(t) f^N(t)``.
    """
    T = f.scale
    D = dual_scale(T)
    fs = dual(f)
    pts = T.kappa_lower().sample_points(DEFAULT_DENSITY)
    worst = 0.0
    for t in pts:
        shifted = abs(fs(D.sigma(-t)) - f(T.rho(t)))
        scaled = abs(D.mu(-t) * delta_derivative(fs, -t).value + T.nu(t) * nabla_derivative(f, t).value)
        worst = max(worst, shifted + scaled)
    return IdentityReport("rho_formula_via_duality", str(T), len(pts), worst, tol)


# ---------------------------------------------------------------------------
# matrix runner


def _named(items, prefix: str) -> list[tuple[str, object]]:
    if isinstance(items, Mapping):
        return list(items.items())
    return [(f"{prefix}{i}", x) for i, x in enumerate(items)]


FUNCTION_IDENTITIES = (
    "derivative_duality", "integral_duality", "sigma_formula", "rho_formula",
    "rho_formula_via_duality", "integration_by_parts_delta", "integration_by_parts_nabla",
)
SCALE_IDENTITIES = ("jump_duality", "kappa_duality", "graininess_duality", "classification_duality")


def run_duality_matrix(scales: Sequence[TimeScale] | Mapping[str, TimeScale],
                       functions: Sequence[TsFunction] | Mapping[str, TsFunction],
                       tol: float, *, dual: DualMap = dual_function,
                       identities: Sequence[str] | None = None,
                       tols: Mapping[str, float] | None = None) -> list[IdentityReport]:
    """Run every correspondence over all scales and functions.

    Scale-level identities run once per scale; function-level identities run
    once per function.  Integration by parts pairs each function with the
    next one declared on the same scale (or with itself when alone).  A cell
    that raises yields a failed report; the matrix never aborts.  Report
    order is fixed: scales in order, then functions in order.  ``tols`` maps
    identity names to tolerances that override ``tol``.
    """
    named_scales = _named(scales, "T")
    named_funcs = _named(functions, "f")
    known = {s for _, s in named_scales}
    for name, f in named_funcs:
        if f.scale not in known:
            raise ValueError(f"function {name} lives on a scale that is not in the matrix")
    wanted = set(identities) if identities is not None else None
    tols = dict(tols or {})

    def cell(identity, scale_id, thunk):
        if wanted is not None and identity not in wanted:
            return None
        try:
            report = thunk(tols.get(identity, tol))
        except (TimeScaleError, ArithmeticError, ValueError) as exc:
            return IdentityReport.failure(identity, scale_id, f"{type(exc).__name__}: {exc}")
        report.scale_id = scale_id
        return report

    reports = []
    for sname, T in named_scales:
        checks = [
            ("jump_duality", lambda _, T=T: verify_jump_duality(T)),
            ("graininess_duality", lambda _, T=T: verify_graininess_duality(T)),
            ("classification_duality", lambda _, T=T: verify_classification_duality(T)),
        ]
        if not T.is_single_point:
            checks.insert(1, ("kappa_duality", lambda _, T=T: verify_kappa_duality(T)))
        for identity, thunk in checks:
            r = cell(identity, sname, thunk)
            if r is not None:
                reports.append(r)

    for idx, (fname, f) in enumerate(named_funcs):
        partner = next((g for _, g in named_funcs[idx + 1:] + named_funcs[:idx] if g.scale == f.scale), f)
        T = f.scale
        sid = f"{fname}@{_scale_name(named_scales, T)}"
        a, b = T.min, T.max
        checks = [
            ("derivative_duality", lambda tl, f=f: verify_derivative_duality(f, tl, dual)),
            ("integral_duality", lambda tl, f=f: verify_integral_duality(f, a, b, tl, dual)),
            ("sigma_formula", lambda tl, f=f: verify_sigma_formula(f, tl)),
            ("rho_formula", lambda tl, f=f: verify_rho_formula(f, tl)),
            ("rho_formula_via_duality", lambda tl, f=f: verify_rho_formula_via_dual(f, tl, dual)),
            ("integration_by_parts_delta",
             lambda tl, f=f, g=partner: check_integration_by_parts_delta(f, g, a, b, tl)),
            ("integration_by_parts_nabla",
             lambda tl, f=f, g=partner: check_integration_by_parts_nabla(f, g, a, b, tl)),
        ]
        if T.is_single_point:
            checks = checks[1:2]
        for identity, thunk in checks:
            r = cell(identity, sid, thunk)
            if r is not None:
                reports.append(r)
    return reports


def _scale_name(named_scales, T) -> str:
    for name, S in named_scales:
        if S == T:
            return name
    return str(T)


def all_passed(reports: Sequence[IdentityReport]) -> bool:
    return all(r.passed for r in reports)

"""
Calculus of variations on time scales, delta and nabla settings.

A problem minimizes

    delta:  J(y) = int_a^b L(t, y(sigma(t)), y^D(t)) Dt
    nabla:  J(y) = int_a^b L(t, y(rho(t)),   y^N(t)) Nt

with ``y(a) = alpha`` and ``y(b) = beta``.  This module evaluates the
functional, the Euler-Lagrange residual and the Weierstrass excess along a
candidate, maps problems to their duals, and minimizes purely discrete
problems by Newton's method to supply minimizers for those checks.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.linalg import solve_banded

from .calculus import TsFunction, dense_limit, integrate
from .duality import dual_function, dual_scale
from .errors import (
    ConvexityPreconditionFailed,
    NonConvergence,
    NotInDomainKappa,
    SingularHessian,
)
from .expr import Expr, compile_expr, diff, parse, substitute_negate
from .numerics import DIFF_H0_MAX, one_sided_derivative
from .report import IdentityReport
from .timescale import DEFAULT_DENSITY, TimeScale

log = logging.getLogger(__name__)

LAGRANGIAN_VARS = ("t", "x", "v")
SETTINGS = ("delta", "nabla")
_EPS = 2.220446049250313e-16

Q_GRID_SIZE = 41
Q_GRID_MARGIN = 2.0
GAMMA_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)
R_GRID_SIZE = 9
X_GRID_SIZE = 5


@dataclass(frozen=True)
class Lagrangian:
    """``L(t, x, v)`` with symbolic partials ``Lx`` and ``Lv``."""

    expr: Expr
    Lx: Expr = field(init=False, compare=False)
    Lv: Expr = field(init=False, compare=False)

    def __post_init__(self):
        extra = self.expr.free_vars() - set(LAGRANGIAN_VARS)
        if extra:
            raise ValueError(f"Lagrangian may only use t, x, v (found {sorted(extra)})")
        Lx, Lv = diff(self.expr, "x"), diff(self.expr, "v")
        object.__setattr__(self, "Lx", Lx)
        object.__setattr__(self, "Lv", Lv)
        compiled = {
            "_L": self.expr, "_Lx": Lx, "_Lv": Lv,
            "_Lxx": diff(Lx, "x"), "_Lxv": diff(Lx, "v"), "_Lvv": diff(Lv, "v"),
        }
        for name, e in compiled.items():
            object.__setattr__(self, name, compile_expr(e, LAGRANGIAN_VARS))

    @classmethod
    def parse(cls, source: str) -> "Lagrangian":
        return cls(parse(source, LAGRANGIAN_VARS))

    def __call__(self, t, x, v):
        return self._L(t, x, v)

    def dx(self, t, x, v):
        return self._Lx(t, x, v)

    def dv(self, t, x, v):
        return self._Lv(t, x, v)

    def dual(self) -> "Lagrangian":
        """``L*(s, x, v) = L(-s, x, -v)``."""
        return Lagrangian(substitute_negate(substitute_negate(self.expr, "t"), "v"))

    def __str__(self):
        return str(self.expr)


@dataclass(frozen=True)
class VariationalProblem:
    lagrangian: Lagrangian
    scale: TimeScale
    a: float
    b: float
    alpha: float
    beta: float
    setting: str = "delta"
    window: TimeScale = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if self.setting not in SETTINGS:
            raise ValueError(f"setting must be one of {SETTINGS}")
        for name in ("a", "b", "alpha", "beta"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.scale.contains(self.a) and self.scale.contains(self.b)):
            raise ValueError("a and b must be points of the time scale")
        if not self.a < self.b:
            raise ValueError("need a < b")
        object.__setattr__(self, "window", self.scale.restrict(self.a, self.b))

    @property
    def el_domain(self) -> TimeScale:
        """``[a,b]^kappa`` (delta) or ``[a,b]_kappa`` (nabla)."""
        W = self.window
        return W.kappa_upper() if self.setting == "delta" else W.kappa_lower()


@dataclass(frozen=True)
class Candidate:
    y: TsFunction
    kinks: tuple[float, ...] = ()
    info: dict[str, Any] = field(default_factory=dict, compare=False)


def make_candidate(p: VariationalProblem, y: TsFunction, kinks: Sequence[float] = (),
                   tol: float = 1e-12) -> Candidate:
    """Wrap ``y`` after checking the boundary conditions of ``p``."""
    if abs(y(p.a) - p.alpha) > tol or abs(y(p.b) - p.beta) > tol:
        raise ValueError(f"candidate violates y(a)={p.alpha}, y(b)={p.beta}: "
                         f"got {y(p.a)}, {y(p.b)}")
    return Candidate(y, tuple(float(k) for k in kinks))


def dual_candidate(c: Candidate) -> Candidate:
    return Candidate(dual_function(c.y), tuple(-k + 0.0 for k in reversed(c.kinks)))


def dual_problem(p: VariationalProblem) -> VariationalProblem:
    """Dual Lagrangian on the dual scale over ``[-b, -a]``, setting flipped.

    Boundary values travel with their endpoints: the new left endpoint
    ``-b`` carries ``beta`` and the new right endpoint ``-a`` carries ``alpha``.
    """
    return VariationalProblem(
        p.lagrangian.dual(), dual_scale(p.scale), -p.b + 0.0, -p.a + 0.0,
        p.beta, p.alpha, "nabla" if p.setting == "delta" else "delta",
    )


# ---------------------------------------------------------------------------
# evaluation along a candidate


def _state(p: VariationalProblem, y: TsFunction, t: float) -> tuple[float, float]:
    """``(y^sigma(t), y^D(t))`` or ``(y^rho(t), y^N(t))`` on the problem window."""
    W = p.window
    if p.setting == "delta":
        s = W.sigma(t)
        if s > t:
            return y(s), (y(s) - y(t)) / (s - t)
    else:
        s = W.rho(t)
        if s < t:
            return y(s), (y(t) - y(s)) / (t - s)
    return y(t), y.slope(t)


def functional_value(p: VariationalProblem, c: Candidate) -> float:
    L, y = p.lagrangian, c.y
    return integrate(p.window, p.a, p.b, p.setting,
                     dense=lambda s: L(s, y(s), y.slope(s)),
                     point=lambda s: L(s, *_state(p, y, s)))


def el_residual_estimate(p: VariationalProblem, c: Candidate, t: float) -> tuple[float, float]:
    """Euler-Lagrange residual at ``t`` and its numerical error estimate."""
    W, L, y = p.window, p.lagrangian, c.y
    forward = p.setting == "delta"
    in_domain = W.in_kappa_upper if forward else W.in_kappa_lower
    if not in_domain(t):
        raise NotInDomainKappa(f"{t!r} is outside the Euler-Lagrange domain of the problem")
    x, r = _state(p, y, t)
    nxt = W.sigma(t) if forward else W.rho(t)
    if nxt != t:
        # the outer difference quotient needs the state at the neighbour too
        if not in_domain(nxt):
            raise NotInDomainKappa(f"outer derivative at {t!r} needs the state at {nxt!r}")
        g_here = L.dv(t, x, r)
        g_there = L.dv(nxt, *_state(p, y, nxt))
        outer = (g_there - g_here) / (nxt - t)
        est = _EPS * ((abs(g_here) + abs(g_there)) / abs(nxt - t) + abs(outer))
    else:
        res = dense_limit(lambda u: L.dv(u, y(u), y.slope(u)), W, t, 1 if forward else -1)
        outer, est = res.value, res.est_error
    return outer - L.dx(t, x, r), est


def el_residual_delta(p: VariationalProblem, c: Candidate, t: float) -> float:
    """``(L_v(t, y^sigma, y^D))^D - L_x(t, y^sigma, y^D)`` at ``t``."""
    if p.setting != "delta":
        raise ValueError("el_residual_delta needs a delta-setting problem")
    return el_residual_estimate(p, c, t)[0]


def el_residual_nabla(p: VariationalProblem, c: Candidate, t: float) -> float:
    """``(L_v(t, y^rho, y^N))^N - L_x(t, y^rho, y^N)`` at ``t``."""
    if p.setting != "nabla":
        raise ValueError("el_residual_nabla needs a nabla-setting problem")
    return el_residual_estimate(p, c, t)[0]


def el_points(p: VariationalProblem, n_per_segment: int = DEFAULT_DENSITY) -> list[float]:
    """Grid points where the residual is defined.

    These are the points of the Euler-Lagrange domain whose scattered
    neighbour (if any) also lies in that domain.
    """
    W = p.window
    dom = p.el_domain
    step = W.sigma if p.setting == "delta" else W.rho
    return [t for t in dom.sample_points(n_per_segment) if step(t) == t or dom.contains(step(t))]


def el_domain_description(p: VariationalProblem) -> dict[str, Any]:
    """Which domain the residual is checked on; see :func:`check_euler_lagrange`."""
    W = p.window
    dom = p.el_domain
    pts = el_points(p, 1)
    return {
        "setting": p.setting,
        "convention": "[a,b]^kappa" if p.setting == "delta" else "[a,b]_kappa",
        "kappa_domain": dom.to_literal(),
        "checked_from": min(pts) if pts else None,
        "checked_to": max(pts) if pts else None,
        "window": W.to_literal(),
    }


def check_euler_lagrange(p: VariationalProblem, c: Candidate, tol: float,
                         n_per_segment: int = DEFAULT_DENSITY) -> IdentityReport:
    """Residual check on :func:`el_points`; dense points get their error estimate on top of ``tol``."""
    pts = el_points(p, n_per_segment)
    worst = 0.0
    for t in pts:
        r, est = el_residual_estimate(p, c, t)
        worst = max(worst, abs(r) - est)
    name = f"euler_lagrange_{p.setting}"
    return IdentityReport(name, str(p.window), len(pts), worst, tol)


# ---------------------------------------------------------------------------
# Weierstrass condition


def weierstrass_excess(L: Lagrangian, t: float, x: float, r: float, q: float) -> float:
    """``E = L(t,x,q) - L(t,x,r) - (q - r) L_v(t,x,r)``."""
    return L(t, x, q) - L(t, x, r) - (q - r) * L.dv(t, x, r)


def _slopes_at(p: VariationalProblem, c: Candidate, t: float) -> list[float]:
    """Candidate slope(s) at ``t``: both one-sided values at a declared dense kink."""
    W, y = p.window, c.y
    step = W.sigma(t) if p.setting == "delta" else W.rho(t)
    if t in c.kinks and step == t:
        lo, hi = W.segments[W.segment_index(t)]
        out = []
        for direction, room in ((-1, t - lo), (1, hi - t)):
            if room > 0:
                h0 = min(DIFF_H0_MAX, room / 4.0)
                out.append(one_sided_derivative(y, t, direction, h0)[0])
        return out
    return [_state(p, y, t)[1]]


def _precondition(p: VariationalProblem, samples, span: tuple[float, float], tol: float):
    """Sampled weighted convexity of ``v -> L(t, x, v)`` at scattered points."""
    W, L = p.window, p.lagrangian
    grain = W.mu if p.setting == "delta" else W.nu
    xs = [x for _, x, _ in samples]
    x_grid = np.unique(np.linspace(min(xs), max(xs), X_GRID_SIZE))
    r_grid = np.linspace(span[0], span[1], R_GRID_SIZE)
    for t in sorted({t for t, _, _ in samples}):
        w = grain(t)
        if w == 0:
            continue
        for x in x_grid:
            for r1, r2 in itertools.product(r_grid, r_grid):
                for g in GAMMA_GRID:
                    lhs = w * L(t, x, g * r1 + (1 - g) * r2)
                    rhs = w * g * L(t, x, r1) + w * (1 - g) * L(t, x, r2)
                    if lhs > rhs + tol * (1.0 + abs(rhs)):
                        raise ConvexityPreconditionFailed(
                            {"t": t, "x": float(x), "gamma": g, "r1": float(r1), "r2": float(r2),
                             "lhs": lhs, "rhs": rhs})


def default_q_grid(slopes: Sequence[float]) -> list[float]:
    lo, hi = min(slopes) - Q_GRID_MARGIN, max(slopes) + Q_GRID_MARGIN
    return [float(q) for q in np.linspace(lo, hi, Q_GRID_SIZE)]


def _check_weierstrass(p: VariationalProblem, c: Candidate, q_grid, tol: float,
                       n_per_segment: int, check_precondition: bool) -> IdentityReport:
    y = c.y
    samples = []  # (t, x, r)
    for t in p.el_domain.sample_points(n_per_segment):
        for r in _slopes_at(p, c, t):
            x = _state(p, y, t)[0] if t not in c.kinks else y(t)
            samples.append((t, x, r))
    slopes = [r for _, _, r in samples]
    grid = list(q_grid) if q_grid is not None else default_q_grid(slopes)
    span = (min(slopes) - Q_GRID_MARGIN, max(slopes) + Q_GRID_MARGIN)
    if check_precondition:
        _precondition(p, samples, span, 1e-12)
    L = p.lagrangian
    worst = math.inf
    witness = None
    for t, x, r in samples:
        for q in grid:
            e = weierstrass_excess(L, t, x, r, q)
            if e < worst:
                worst, witness = e, {"t": t, "x": x, "r": r, "q": q, "excess": e}
    report = IdentityReport(f"weierstrass_{p.setting}", str(p.window), len(samples) * len(grid),
                            max(0.0, -worst), tol)
    report.witness = witness
    return report


def check_weierstrass_delta(p: VariationalProblem, c: Candidate, q_grid=None, tol: float = 1e-12,
                            n_per_segment: int = DEFAULT_DENSITY,
                            check_precondition: bool = True) -> IdentityReport:
    """``E(t, y^sigma, y^D, q) >= -tol`` over ``[a,b]^kappa`` and ``q_grid``.

    The mu-weighted convexity condition is sampled first and a violation
    raises :class:`ConvexityPreconditionFailed`.  ``report.witness`` holds the
    point of smallest excess.
    """
    if p.setting != "delta":
        raise ValueError("check_weierstrass_delta needs a delta-setting problem")
    return _check_weierstrass(p, c, q_grid, tol, n_per_segment, check_precondition)


def check_weierstrass_nabla(p: VariationalProblem, c: Candidate, q_grid=None, tol: float = 1e-12,
                            n_per_segment: int = DEFAULT_DENSITY,
                            check_precondition: bool = True) -> IdentityReport:
    """Nabla mirror of :func:`check_weierstrass_delta` on ``[a,b]_kappa`` with nu weights."""
    if p.setting != "nabla":
        raise ValueError("check_weierstrass_nabla needs a nabla-setting problem")
    return _check_weierstrass(p, c, q_grid, tol, n_per_segment, check_precondition)


# ---------------------------------------------------------------------------
# discrete minimizer


def _discrete_terms(p: VariationalProblem, pts: Sequence[float]):
    """Per-term ``(time, weight, x_index, lo_index, hi_index)`` of the finite sum."""
    n = len(pts) - 1
    if p.setting == "delta":
        return [(pts[i], pts[i + 1] - pts[i], i + 1, i, i + 1) for i in range(n)]
    return [(pts[i], pts[i] - pts[i - 1], i - 1, i - 1, i) for i in range(1, n + 1)]


def discrete_objective(p: VariationalProblem, y: Sequence[float]) -> float:
    """The exact finite sum the discrete problem minimizes, ``y`` on all window points."""
    pts = p.window.points()
    L = p.lagrangian
    return math.fsum(w * L(tau, y[ix], (y[hi] - y[lo]) / w)
                     for tau, w, ix, lo, hi in _discrete_terms(p, pts))


def _grad_hess(p: VariationalProblem, terms, y: np.ndarray):
    L = p.lagrangian
    n = len(y)
    g = np.zeros(n)
    diag = np.zeros(n)
    off = np.zeros(n)  # off[k] couples k and k+1
    for tau, w, ix, lo, hi in terms:
        x, v = y[ix], (y[hi] - y[lo]) / w
        Lx, Lv = L._Lx(tau, x, v), L._Lv(tau, x, v)
        Lxx, Lxv, Lvv = L._Lxx(tau, x, v), L._Lxv(tau, x, v), L._Lvv(tau, x, v)
        g[ix] += w * Lx
        g[hi] += Lv
        g[lo] -= Lv
        other = lo if ix == hi else hi
        sgn = 1.0 if ix == hi else -1.0  # dv/dy[ix] * w
        diag[ix] += w * Lxx + 2.0 * sgn * Lxv + Lvv / w
        diag[other] += Lvv / w
        cross = -sgn * Lxv - Lvv / w
        off[min(ix, other)] += cross
    return g, diag, off


def minimize_discrete(p: VariationalProblem, max_iter: int = 200, gtol: float = 1e-11) -> Candidate:
    """Minimize the finite-sum functional over the interior values by damped Newton.

    Starts from the straight line between the boundary values.  Convergence
    is declared when every interior gradient entry divided by the graininess
    of its Euler-Lagrange term is at most ``gtol``, or when a full Newton step
    no longer moves any value above round-off.
    """
    W = p.window
    if not W.is_discrete:
        raise ValueError("minimize_discrete needs a purely discrete window [a, b]")
    pts = W.points()
    n = len(pts) - 1
    if n < 1:
        raise ValueError("need at least two points")
    y = np.array([p.alpha + (p.beta - p.alpha) * (t - p.a) / (p.b - p.a) for t in pts])
    y[0], y[-1] = p.alpha, p.beta
    terms = _discrete_terms(p, pts)
    # graininess of the Euler-Lagrange equation carried by each interior gradient entry
    if p.setting == "delta":
        weight = np.array([pts[k] - pts[k - 1] for k in range(1, n)])
    else:
        weight = np.array([pts[k + 1] - pts[k] for k in range(1, n)])

    def done(it, gnorm):
        info = {"iterations": it, "scaled_gradient": gnorm,
                "functional_value": discrete_objective(p, y)}
        y_fn = TsFunction.from_table(zip(pts, y.tolist()), W)
        return Candidate(y_fn, (), info)

    if n == 1:
        return done(0, 0.0)

    J = discrete_objective(p, y)
    gnorm = math.inf
    for it in range(max_iter + 1):
        g, diag, off = _grad_hess(p, terms, y)
        gi = g[1:n]
        gnorm = float(np.max(np.abs(gi) / weight))
        if gnorm <= gtol:
            return done(it, gnorm)
        if it == max_iter:
            break
        ab = np.zeros((3, n - 1))
        ab[0, 1:] = off[1:n - 1]
        ab[1, :] = diag[1:n]
        ab[2, :-1] = off[1:n - 1]
        try:
            with np.errstate(divide="ignore", invalid="ignore"):
                d = solve_banded((1, 1), ab, -gi)
        except np.linalg.LinAlgError as exc:
            raise SingularHessian(str(exc)) from None
        if not np.all(np.isfinite(d)):
            raise SingularHessian("Newton system produced non-finite step")
        slope = float(gi @ d)
        if slope >= 0:
            d, slope = -gi, -float(gi @ gi)
        step = 1.0
        while True:
            trial = y.copy()
            trial[1:n] += step * d
            J_trial = discrete_objective(p, trial)
            if J_trial <= J + 1e-4 * step * slope or step < 1e-12:
                break
            step *= 0.5
        moved = np.max(np.abs(trial - y) / (1.0 + np.abs(y)))
        y, J = trial, J_trial
        if moved <= 4 * _EPS:
            g, _, _ = _grad_hess(p, terms, y)
            gnorm = float(np.max(np.abs(g[1:n]) / weight))
            log.debug("Newton stalled at round-off after %d steps, scaled gradient %.3e", it + 1, gnorm)
            if gnorm <= 1e3 * gtol:
                return done(it + 1, gnorm)
            break
    raise NonConvergence(max_iter, gnorm)

"""
Variational problems on time scales
===================================

Minimize a functional J[y] = integral of L(t, y^sigma, y^Delta) over a
discrete time scale, then check the minimizer against the Euler-Lagrange
equation, the Weierstrass condition and its own dual problem.
"""

import numpy as np

from timescales import canonicalize
from timescales.calculus import TsFunction
from timescales.variational import (
    Lagrangian,
    VariationalProblem,
    check_euler_lagrange,
    check_weierstrass_delta,
    check_weierstrass_nabla,
    dual_candidate,
    dual_problem,
    el_domain_description,
    functional_value,
    make_candidate,
    minimize_discrete,
)

# a spring with uneven time steps
T = canonicalize([0, 0.2, 0.7, 1.0, 1.6, 2.0, 2.3, 3.0])
L = Lagrangian.parse("v^2/2 + x^2/2")
p = VariationalProblem(L, T, 0, 3, 1.0, 0.0, "delta")

y = minimize_discrete(p)
print("Newton iterations:", y.info["iterations"])
for t, v in y.y.table:
    print(f"  y({t:.1f}) = {v:+.10f}")
print("J[y] =", functional_value(p, y))

# the Euler-Lagrange residual vanishes on the admissible points
el = check_euler_lagrange(p, y, 1e-10)
print("EL residual:", el.max_residual, "on", el_domain_description(p)["kappa_domain"])

# any perturbation with fixed ends costs more
rng = np.random.default_rng(0)
for _ in range(3):
    bump = [0.0] + list(0.05 * rng.standard_normal(len(T.points()) - 2)) + [0.0]
    z = [(t, v + b) for (t, v), b in zip(y.y.table, bump)]
    zc = make_candidate(p, TsFunction.from_table(z, T))
    print(f"  perturbed J = {functional_value(p, zc):.10f}")

# the dual problem lives on -T in the nabla setting and has the same value
dp, dy = dual_problem(p), dual_candidate(y)
print("dual Lagrangian:", dp.lagrangian.expr, " setting:", dp.setting)
print("dual J =", functional_value(dp, dy))
print("dual EL residual:", check_euler_lagrange(dp, dy, 1e-10).max_residual)

# Weierstrass: the excess stays nonnegative for a Lagrangian convex in v
print("Weierstrass delta:", check_weierstrass_delta(p, y).passed,
      " nabla on the dual:", check_weierstrass_nabla(dp, dy).passed)

# on a continuum the same machinery checks the classical problem
U = canonicalize([[0, 1]])
q = VariationalProblem(Lagrangian.parse("v^2/2 + x"), U, 0, 1, 0, 1, "delta")
c = make_candidate(q, TsFunction.from_source("t^2/2 + t/2", U))
print("classical EL residual:", check_euler_lagrange(q, c, 1e-6).max_residual)

# a double well breaks convexity, and the excess finds a witness
w = VariationalProblem(Lagrangian.parse("(v^2 - 1)^2"), U, 0, 1, 0, 0, "delta")
r = check_weierstrass_delta(w, make_candidate(w, TsFunction.from_source("0", U)), q_grid=[-1.0, 0.5, 1.0])
print("double well passes Weierstrass:", r.passed, " witness:", r.witness)

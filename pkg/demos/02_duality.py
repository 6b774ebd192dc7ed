"""
Reflecting a time scale
=======================

Negating every point turns a time scale into its dual.  Forward jumps become
backward jumps, so every delta statement has a nabla twin.  This script
checks a handful of those twins numerically.
"""

from timescales import canonicalize
from timescales.calculus import TsFunction, delta_derivative, delta_integral, nabla_derivative, nabla_integral
from timescales.duality import all_passed, dual_function, dual_scale, run_duality_matrix

T = canonicalize([[-2, -1], -0.5, [0, 1], 1.5])
S = dual_scale(T)
print("T  =", T)
print("T* =", S)

# sigma on T is minus rho on T*
for t in T.sample_points(3):
    print(f"sigma_T({t:+.3f}) = {T.sigma(t):+.3f}   -rho_T*({-t + 0.0:+.3f}) = {-S.rho(-t) + 0.0:+.3f}")

# f*(s) = f(-s); a delta derivative of f is minus a nabla derivative of f*
f = TsFunction.from_source("t*exp(t)", T)
fs = dual_function(f)
print("f* =", fs.expr)
for t in (-1.5, -0.5, 0.25, 1):
    print(f"f^Delta({t:+}) = {delta_derivative(f, t).value:+.12f}   "
          f"-(f*)^Nabla({-t:+}) = {-nabla_derivative(fs, -t).value:+.12f}")

# the delta integral over [a, b] equals the nabla integral of f* over [-b, -a]
print("delta integral:", delta_integral(f, T.min, T.max))
print("nabla integral of the dual:", nabla_integral(fs, -T.max, -T.min))

# the whole identity matrix in one call
funcs = [TsFunction.from_source(s, T) for s in ("t^2", "t^3", "sin(t)")]
reports = run_duality_matrix([T], funcs, 1e-8)
for r in reports:
    print(f"{r.identity_name:<28} {r.scale_id[:22]:<22} residual={r.max_residual:.2e} passed={r.passed}")
print("all passed:", all_passed(reports))

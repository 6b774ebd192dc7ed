"""
Time scales and their two calculi
=================================

A time scale is any closed subset of the real line.  Here they are finite
unions of closed segments, so one object covers intervals, lattices and
everything in between.
"""

from timescales import canonicalize, cantor_scale
from timescales.calculus import TsFunction, delta_derivative, delta_integral, nabla_derivative, nabla_integral

# a segment, a gap, and two isolated points
T = canonicalize([[0, 1], 2, [3, 4], 4.5])
print("scale:", T)

# forward jump, backward jump and graininess at a few points
for t in (0.5, 1, 2, 4, 4.5):
    print(f"t={t:<4} sigma={T.sigma(t):<4} rho={T.rho(t):<4} mu={T.mu(t):<4} nu={T.nu(t):<4} {T.classify(t)}")

# the top point is left-scattered, so the delta calculus drops it
print("T^kappa:", T.kappa_upper())
print("T_kappa:", T.kappa_lower())

# the delta derivative is a difference quotient where the scale jumps
# and an ordinary derivative where it is dense
f = TsFunction.from_source("t^2", T)
for t in (0.5, 1, 2):
    d = delta_derivative(f, t)
    print(f"f^Delta({t}) = {d.value:.12g}  [{d.method}]")
print("f^Nabla(2) =", nabla_derivative(f, 2).value)

# integrals pick up mu*f at every jump in the delta case, nu*f in the nabla case
print("int_0^4.5 t^2 Delta t =", delta_integral(f, 0, 4.5))
print("int_0^4.5 t^2 Nabla t =", nabla_integral(f, 0, 4.5))

# a Cantor-like scale: many gaps, each contributing a jump term
C = cantor_scale(3)
g = TsFunction.from_source("1", C)
print("cantor level 3 has", len(C.segments), "segments; int 1 Delta t =", delta_integral(g, 0, 1))

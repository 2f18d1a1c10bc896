"""
Autarkies of the LP relaxation
==============================

On two labels the roof dual already gives a strong autarky. A frustrated
triangle shows the LP can be loose: the relaxed optimum is half-integral
and strictly below the integer one.
"""


import numpy as np

from partopt import EnergyFunction, GeneratorSpec, generate, solve_lp
from partopt import roof_dual_autarky, verify_weak_lp_autarky, verify_strong_lp_autarky

f = generate(GeneratorSpec(7, 2, 0.6, 10, "two-label", 6))
a = roof_dual_autarky(f)
print("roof dual fixes", a.fixed_nodes())
print("weak LP autarky:", verify_weak_lp_autarky(f, a).holds, " strong:", verify_strong_lp_autarky(f, a))

# frustrated triangle: every edge wants its endpoints to differ
anti = np.array([[1, 0], [0, 1]])
tri = EnergyFunction.from_tables([[0, 0]] * 3, [(0, 1), (1, 2), (0, 2)], [anti] * 3)
sol = solve_lp(tri)
print("LP value", sol.value, "integer optimum", min(tri(x) for x in np.ndindex(2, 2, 2)))
print("unary marginals", [[str(v) for v in row] for row in sol.mu.node])

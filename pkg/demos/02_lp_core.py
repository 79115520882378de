"""The bounded-variable simplex on its own: primal values, duals, reduced costs.

Run: python demos/02_lp_core.py
"""

import math

from fomip import Atom, LpProblem, normalize_lincons, reduced_cost, solve_lp
from fomip.lp import dual_objective

x, y = Atom("x"), Atom("y")

# min -3x - 2y  s.t.  x + y <= 1.5,  0 <= x - y <= 1,  x, y in [0, 1]
p = LpProblem(
    atoms=[x, y],
    objective={x: -3.0, y: -2.0},
    bounds={x: (0.0, 1.0), y: (0.0, 1.0)},
    constraints=[
        normalize_lincons(-math.inf, [(1, x), (1, y)], 1.5),
        normalize_lincons(0.0, [(1, x), (-1, y)], 1.0),  # a range row
    ],
)
sol = solve_lp(p)
print("status:   ", sol.status.value)
print("objective:", sol.objective_value)
print("primal:   ", {str(a): v for a, v in sol.primal.items()})
print("duals:    ", sol.duals)
print("reduced:  ", {str(a): v for a, v in sol.reduced_costs.items()})

# strong duality: the dual objective at these duals equals the primal optimum
print("dual objective:", dual_objective(p, sol))

# reduced cost of a column that is not in the LP at all (column generation)
z_column = [(0, 1.0)]  # would appear in row 0 with coefficient 1
print("rc of a new column with cost -1:", reduced_cost(sol, -1.0, z_column))

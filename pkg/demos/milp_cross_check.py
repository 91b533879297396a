"""Export an instance as a mixed-integer program and close the loop.

Three independent ways to look at the same optimum:

  1. the label search (the production solver),
  2. exact substitution of its solution into the integer model,
  3. scipy's branch-and-bound solving that model from scratch.

The script also writes the LP file, which any external MILP solver can
consume; row names are stable (batt_le_u_v, fuel_le_u_v, startup_u_v,
gen_le_x_u_v, deg_*) so a solution pulled back in stays attributable.
"""

import pathlib

from hybridpath import GenSpec, generate, solve
from hybridpath.verify import (assignment_from_solution, build_milp,
                               check_substitution, format_assignment,
                               import_milp_solution, milp_objective,
                               solve_milp)

OUT = pathlib.Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

instance = generate(GenSpec(n_nodes=14, k_neighbors=3, seed=3, b_frac=0.8))
result = solve(instance)
print(f"label search : cost {result.solution.cost!r} "
      f"path {result.solution.path}")

model = build_milp(instance)
print(f"model        : {len(model.rows)} rows, "
      f"{len(model.binaries)} binaries")

lp_path = OUT / "cross_check.lp"
lp_path.write_text(model.render())
print(f"LP file      : {lp_path} ({lp_path.stat().st_size} bytes)")

# substitute the solver's answer into every row -- zero violations
assignment = assignment_from_solution(instance, result.solution)
violations = check_substitution(model, assignment)
print(f"substitution : {len(violations)} violated rows")
assert not violations

# have scipy's HiGHS backend solve the model independently
status, backend = solve_milp(model)
print(f"backend      : {status}, objective "
      f"{milp_objective(model, backend)!r}")
assert abs(milp_objective(model, backend) - result.solution.cost) <= 1e-9

# and pull the backend's variable values back into a checked Solution
imported = import_milp_solution(instance, format_assignment(backend))
print(f"import       : cost {imported.cost!r} path {imported.path}")
assert imported.cost == result.solution.cost
print("all three views agree")

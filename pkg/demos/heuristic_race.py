"""Compare the three admissible guides on one generated instance.

All three return the same optimal cost; what differs is how many labels
the search has to treat before it can prove optimality.  The energy-bound
table ("sup") knows about battery drain and usually dominates the plain
straight-line distance ("sld"), which in turn beats searching blind.

    python3 demos/heuristic_race.py [n_nodes] [seed]
"""

import sys
import time

from hybridpath import GenSpec, SolverConfig, generate, make_table, solve

n_nodes = int(sys.argv[1]) if len(sys.argv) > 1 else 200
seed = int(sys.argv[2]) if len(sys.argv) > 2 else 7

instance = generate(GenSpec(n_nodes=n_nodes, seed=seed))
meta = instance.meta
print(f"instance: {n_nodes} nodes, {len(instance.edges)} directed edges, "
      f"{meta['noise_fraction']:.0%} noise-restricted, seed {seed}")
print(f"resources: battery {instance.b0}, fuel {instance.q0} "
      f"(quantized at {instance.quantization})")
print()

header = f"{'heuristic':<10} {'selection':<10} {'cost':>12} " \
         f"{'treated':>9} {'created':>9} {'table s':>8} {'solve s':>8}"
print(header)
print("-" * len(header))

costs = set()
for heuristic in ("sup", "sld", "zero"):
    t0 = time.perf_counter()
    table = make_table(instance, heuristic)
    table_time = time.perf_counter() - t0
    for selection in ("label", "node"):
        result = solve(instance,
                       SolverConfig(selection=selection, heuristic=heuristic),
                       table=table)
        stats = result.stats
        costs.add(result.solution.cost)
        print(f"{heuristic:<10} {selection:<10} "
              f"{result.solution.cost:>12.6f} {stats.labels_treated:>9} "
              f"{stats.labels_created:>9} {table_time:>8.3f} "
              f"{stats.wall_time:>8.3f}")

print()
assert len(costs) == 1, "optimal cost must not depend on the guide"
print(f"all six runs prove the same optimum: {costs.pop():.6f}")

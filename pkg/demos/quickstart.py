"""Build a tiny instance by hand, solve it, and poke at the result.

The scenario: a five-waypoint hop where the straight route crosses a
noise-restricted corridor with a battery drain the craft cannot afford,
so the optimum detours and runs the generator on the climb.  Run with

    python3 demos/quickstart.py
"""

import pathlib
import tempfile

from hybridpath import (EdgeParams, Instance, SolverConfig, check_solution,
                        load, replay, save, solve)

instance = Instance(
    nodes=((0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (1.0, 1.0), (3.0, 0.0)),
    edges=(
        EdgeParams(0, 1, 1.2, 2, 3),
        EdgeParams(1, 2, 1.1, 2, 3),
        EdgeParams(2, 4, 1.3, 7, 0, gen_allowed=False),  # the quiet zone
        EdgeParams(0, 3, 1.6, 3, 2),
        EdgeParams(3, 2, 1.0, 1, 2),
        EdgeParams(3, 4, 2.6, 4, 5),
        EdgeParams(1, 3, 1.4, 1, 1),
    ),
    start=0, goal=4,
    b0=6, bmin=0, bmax=6,   # battery: starts full at 6 units
    q0=7,                   # fuel units on board
    v=1,                    # extra drain to spin the generator up
    quantization=1.0,
)

result = solve(instance, SolverConfig(selection="label", heuristic="sup"))
solution = result.solution

print(f"status      : {result.status}")
print(f"path        : {' -> '.join(map(str, solution.path))}")
print(f"cost        : {solution.cost}")
print(f"generator   : {['on' if g else 'off' for g in solution.gen]}")
print(f"battery     : {solution.battery}")
print(f"fuel        : {solution.fuel}")

# replay() recomputes the traces from scratch; check_solution() uses it to
# referee any solution, ours included.
battery, fuel, violation = replay(instance, solution.path, solution.gen)
assert violation is None
assert tuple(battery) == solution.battery and tuple(fuel) == solution.fuel
assert check_solution(instance, solution) is None
print("replay      : traces confirmed")

# Instances round-trip through JSON (the file stores edges in canonical
# order, so compare as sets).
with tempfile.TemporaryDirectory() as tmp:
    path = pathlib.Path(tmp) / "five_waypoints.json"
    save(instance, path)
    again = load(path)
    assert set(again.edges) == set(instance.edges)
    assert (again.b0, again.q0, again.v) == (6, 7, 1)
    print(f"saved       : {path.name} ({path.stat().st_size} bytes), "
          "reloaded identical")

# Why not the straight route?  Edge 2->4 drains 7 against a 6-unit
# battery, and its noise restriction forbids recharging on the way.
relaxed = solve(instance, SolverConfig(heuristic="zero"))
print(f"sanity      : zero-heuristic search agrees at {relaxed.solution.cost}")

"""The memory/query tradeoff at desk scale.

Drives both baseline solvers against the same hard instance and prints the
measured (bits between iterations, oracle queries) pair for each: the
ellipsoid sits in the quadratic-memory/few-queries corner, the subgradient in
the linear-memory/many-queries corner.

    python3 demos/04_solver_tradeoff.py
"""

import math

from oracle_arena import (
    DetOracle,
    deterministic_params,
    ellipsoid_solver,
    run_feasibility,
    stream,
    subgradient_solver,
)

params = deterministic_params(d=30, P=2, k=3, alpha=1.0, mode="lab",
                              overrides={"l": 2, "delta": [2e-3, 2e-2]})
print(f"instance: d=30, accuracy eps = {params.eps:g}\n")

results = {}
for name, alg, t_max in [
    ("ellipsoid", ellipsoid_solver(30), 80_000),
    ("subgradient", subgradient_solver(30, lambda t: 2.0 / math.sqrt(t)),
     1_600_000),
]:
    oracle = DetOracle(params, seed=41, record_events=False)
    trace = run_feasibility(oracle, alg, t_max, stream(41, name))
    results[name] = trace
    print(f"{name:12s} success={trace.success}  queries={trace.queries:>8d}  "
          f"memory={trace.max_memory_bits:>6d} bits")

e, s = results["ellipsoid"], results["subgradient"]
print(f"\nquery ratio subgradient/ellipsoid: {s.queries / e.queries:.0f}x")
print(f"memory ratio ellipsoid/subgradient: {e.max_memory_bits / s.max_memory_bits:.0f}x")
print("\nresponse depth histograms (depth 0 is the half-space cut):")
for name, trace in results.items():
    print(f"  {name:12s} {trace.depth_hist}")

"""Walk through one adaptive hard instance.

Shows the exploratory-query lifecycle: probes appended per exploratory query,
period resets once a depth saturates, the fallback membership oracle, and the
certified inscribed ball.

    python3 demos/02_adaptive_oracle.py
"""

import numpy as np

from oracle_arena import DetOracle, deterministic_params, is_success, stream
from oracle_arena.subspaces import residual

params = deterministic_params(d=80, P=2, k=3, alpha=1.0, mode="lab",
                              overrides={"l": 2})
oracle = DetOracle(params, seed=5)
print(f"instance: d={params.d}, P={params.P}, block dim {params.d_tilde}, "
      f"k={params.k}, probe dim {params.l}")
print(f"tolerances delta = {[f'{v:.2e}' for v in params.delta]}\n")

# Scripted exploratory queries: in the half-space, orthogonal to every hidden
# block, mutually robustly independent.
e = np.zeros(params.d)
e[0] = 1.0
blocks = np.hstack([E.basis for E in oracle.E])
f = residual(blocks, e)
u = f / np.linalg.norm(f)
a = 0.55 / np.linalg.norm(f)
b = np.sqrt(0.99 - a * a)
rng = stream(5, "demo-script")
blocked = np.column_stack([blocks, e, u])
for step in range(params.k + 1):
    w = residual(blocked, rng.standard_normal(params.d))
    w /= np.linalg.norm(w)
    blocked = np.column_stack([blocked, w])
    response = oracle.respond(-a * u + b * w)
    ev = oracle.events[-1]
    print(f"t={ev['t']}: exploratory at depths {ev['exploratory_depths']}, "
          f"resets {ev['resets']}, counts n = "
          f"{[oracle.n(p) for p in range(1, params.P + 1)]}")

print("\nthe (k+1)-th robustly-independent query resets every depth: a new "
      "period begins with fresh probing subspaces.")

# The feasible set is nonempty: the inscribed ball's points all pass
# membership and draw Success from the oracle.
center, radius = oracle.inscribed_ball()
pts = oracle.sample_feasible(5, stream(5, "demo-ball"))
print(f"\ninscribed ball: radius {radius:.2e}, center norm "
      f"{np.linalg.norm(center):.6f}")
print("responses at sampled feasible points:",
      [repr(oracle.respond(p)) for p in pts[:3]])

# Any cut separates the query from the whole inscribed ball.
bad = np.zeros(params.d)
bad[0] = 0.3
cut = oracle.respond(bad)
ok = oracle.certify_separation(bad, cut.g, 500, stream(5, "demo-cert"))
print(f"\ncut at an infeasible query certified against 500 ball points: {ok}")
assert not is_success(cut)

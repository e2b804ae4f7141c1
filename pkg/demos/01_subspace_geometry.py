"""Tour of the subspace substrate.

Haar-uniform sampling, projections, residuals, and the orthonormal extraction
from robustly-independent vectors.  Run directly:

    python3 demos/01_subspace_geometry.py
"""

import numpy as np

from oracle_arena import (
    proj_norm,
    residual_norm,
    sample_subspace_within,
    sample_uniform_subspace,
    stream,
    top_singular_vectors,
)
from oracle_arena.subspaces import gram_schmidt_residuals

rng = stream(2024, "demo-1")

# A uniform 50-dimensional subspace of R^200.  The squared projection of a
# fixed unit vector concentrates around 50/200 = 1/4.
d, r = 200, 50
x = np.zeros(d)
x[0] = 1.0
samples = np.array([proj_norm(sample_uniform_subspace(d, r, rng), x) ** 2
                    for _ in range(2000)])
print(f"projection mass onto a random {r}-dim subspace of R^{d}:")
print(f"  mean {samples.mean():.4f}   (exact: {r/d})")
print(f"  std  {samples.std():.4f}")

# Nested sampling: an l-dim subspace drawn inside a parent sees the expected
# l/dim(parent) share of any parent vector.
parent = sample_uniform_subspace(d, r, rng)
child = sample_subspace_within(parent, 10, rng)
v = parent.basis @ rng.standard_normal(r)
v /= np.linalg.norm(v)
print(f"\nnested subspace: share of a parent vector seen by a 10-dim child: "
      f"{child.proj_norm(v)**2:.4f} (expect ~{10/r})")

# Robust independence and extraction: unit vectors whose sequential residuals
# stay above delta admit ceil(r/s) orthonormal vectors with controlled
# sup-norm inflation (sqrt(r)/delta)^(s/(s-1)).
Y = rng.standard_normal((30, 8))
Y /= np.linalg.norm(Y, axis=0)
delta = gram_schmidt_residuals(Y).min()
s = 2
Z = top_singular_vectors(Y, int(np.ceil(8 / s)))
factor = (np.sqrt(8) / delta) ** (s / (s - 1))
a = rng.standard_normal(30)
print(f"\nextraction from 8 robustly-independent vectors (delta={delta:.3f}):")
print(f"  ||Z^T a||_inf = {np.max(np.abs(Z.T @ a)):.4f}")
print(f"  bound         = {factor * np.max(np.abs(Y.T @ a)):.4f}")

# Residuals against a growing list shrink monotonically.
vecs = [rng.standard_normal(12) for _ in range(6)]
probe = rng.standard_normal(12)
print("\nresidual norms of a fixed vector vs a growing spanning list:")
print("  " + ", ".join(f"{residual_norm(vecs[:i], probe):.3f}" for i in range(7)))

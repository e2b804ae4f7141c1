"""oracle-arena: a simulation lab for memory-constrained convex feasibility.

Subpackages by concern:

* :mod:`oracle_arena.subspaces` -- Haar subspace sampling, projections,
  residuals, orthonormal extraction;
* :mod:`oracle_arena.params` -- parameter ladders (strict and lab modes);
* :mod:`oracle_arena.oracle_det`, :mod:`oracle_arena.oracle_rand` -- the
  adaptive and oblivious hard-instance separation oracles;
* :mod:`oracle_arena.games` / :mod:`oracle_arena.players` -- the analysis
  games and reference players;
* :mod:`oracle_arena.solvers` -- memory-metered baseline solvers and driver;
* :mod:`oracle_arena.rmt` -- random-matrix and concentration experiments;
* :mod:`oracle_arena.cli` -- the reproducible experiment harness.
"""

__version__ = "0.1.0"

from .oracle_det import SUCCESS, Cut, DetOracle, is_success, new_det_instance
from .oracle_rand import RandOracle, index_set, new_rand_instance
from .params import (
    AssumptionViolation,
    DetParams,
    RandParams,
    deterministic_params,
    randomized_params,
    validate,
)
from .solvers import (
    HalfspaceOracle,
    RunTrace,
    ellipsoid_solver,
    measure_memory,
    run_feasibility,
    subgradient_solver,
)
from .streams import child_seed, stream
from .subspaces import (
    Subspace,
    proj_norm,
    project,
    residual_norm,
    sample_subspace_within,
    sample_uniform_subspace,
    top_singular_vectors,
)

__all__ = [
    "SUCCESS", "Cut", "DetOracle", "RandOracle", "Subspace", "HalfspaceOracle",
    "RunTrace", "AssumptionViolation", "DetParams", "RandParams",
    "deterministic_params", "randomized_params", "validate", "is_success",
    "new_det_instance", "new_rand_instance", "index_set", "ellipsoid_solver",
    "subgradient_solver", "run_feasibility", "measure_memory", "stream",
    "child_seed", "project", "proj_norm", "residual_norm",
    "sample_uniform_subspace", "sample_subspace_within", "top_singular_vectors",
]

"""Play every analysis game once with its reference players.

    python3 demos/03_games_tour.py
"""

from oracle_arena import deterministic_params, randomized_params, stream
from oracle_arena.games import (
    run_depth_p_feasibility_game,
    run_kernel_discovery,
    run_orthogonal_subspace_game,
    run_probing_game,
    run_randomized_feasibility_game,
)
from oracle_arena.players import (
    ComplementKernelPlayer,
    EncodeComplementOSGPlayer,
    FullInfoDepthCheater,
    FullInfoRandFeasCheater,
    GreedyOrthogonalProbingPlayer,
    RandomOSGPlayer,
)

# Probing game: hide a unit combination of your queries from growing probes.
# At the hard threshold rho ~ (1/12) sqrt(l/(d k)) even greedy
# orthogonalization loses essentially always.
t = run_probing_game(GreedyOrthogonalProbingPlayer(400, stream(1, "p")),
                     d=400, l=9, k=8, rho=0.00442, rng=stream(1, "g"))
print(f"probing game, greedy player at hard rho: win={t.verdict}, "
      f"worst prefix alignment {max(t.diagnostics['min_projections']):.4f}")

# Orthogonal subspace game: with enough message bits to ship a basis of the
# complement, the encode-and-replay player wins every time.
player = EncodeComplementOSGPlayer(d=60, d_tilde=20, k=6)
t = run_orthogonal_subspace_game(player, 60, 20, player.bits_needed, 6, 0,
                                 beta=1e-8, gamma=0.9, rng=stream(2, "g"))
print(f"OSG, encode player with {player.bits_needed} bits: win={t.verdict}")

t = run_orthogonal_subspace_game(RandomOSGPlayer(60, 6, stream(3, "p")),
                                 60, 20, 0, 6, 0, beta=0.05, gamma=0.5,
                                 rng=stream(3, "g"))
print(f"OSG, zero-bit random player at tight beta: win={t.verdict}")

# Kernel discovery: with m <= d_tilde/2 samples, pointing away from the hidden
# subspace is hopeless; with a spanning sample set it is easy.
t = run_kernel_discovery(ComplementKernelPlayer(400, stream(4, "p")),
                         400, 100, m=50, rng=stream(4, "g"))
print(f"kernel discovery, m=50 of dim 100: win={t.verdict} "
      f"(proj {t.diagnostics['proj_norm']:.3f} vs threshold "
      f"{t.diagnostics['threshold']:.3f})")
t = run_kernel_discovery(ComplementKernelPlayer(400, stream(5, "p")),
                         400, 100, m=300, rng=stream(5, "g"))
print(f"kernel discovery, spanning m=300: win={t.verdict}")

# Depth-p feasibility game on the adaptive oracle: the labeled full-information
# cheater scripts k exploratory queries and wins.
params = deterministic_params(d=80, P=2, k=3, alpha=1.0, mode="lab",
                              overrides={"l": 2})
t = run_depth_p_feasibility_game(FullInfoDepthCheater(params, stream(6, "p")),
                                 params, p=2, T_max=12, rng=stream(6, "g"))
print(f"depth-2 feasibility game, full-info cheater: win={t.verdict} "
      f"({t.diagnostics['outcome']})")

# Feasibility game against the oblivious oracle.
rparams = randomized_params(d=400, P=2, k=3, mode="lab", overrides={"l": 5})
t = run_randomized_feasibility_game(
    FullInfoRandFeasCheater(rparams, stream(7, "p")), rparams, J_P=2,
    rng=stream(7, "g"))
print(f"oblivious feasibility game, full-info cheater: win={t.verdict} "
      f"({t.diagnostics['depth_P_exploratory']} exploratory queries in one "
      f"period of {rparams.T[-1]})")

"""Runnable analysis games with exact win-condition checkers.

Each ``run_*`` function plays one seeded game against a pluggable strategy and
returns a replayable :class:`GameTranscript`.  Verdicts are computed by pure
checker functions over the transcript's measured diagnostics, so a stored
transcript can be re-judged under perturbed thresholds.

Information restrictions ("based on Message and the samples only") are
enforced by interface: phase-2 strategy methods receive nothing else, and the
harness counts serialized message bits itself -- a message over budget is an
immediate loss with a diagnostic, never an exception.
"""

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .oracle_det import DetOracle, is_success
from .oracle_rand import RandOracle
from .solvers import measure_memory
from .streams import child_seed, stream
from .subspaces import (
    gram_schmidt_residuals,
    orthonormalize,
    sample_subspace_within,
    sample_uniform_subspace,
)

UNIT_TOL = 1e-9


@dataclass
class GameTranscript:
    """Seeded, replayable record of one game run."""

    game: str
    config: dict
    steps: list
    verdict: bool
    diagnostics: dict = field(default_factory=dict)

    def to_json(self):
        def default(o):
            if isinstance(o, np.ndarray):
                return o.tolist()
            if isinstance(o, (np.integer,)):
                return int(o)
            if isinstance(o, (np.floating,)):
                return float(o)
            if isinstance(o, set):
                return sorted(o)
            raise TypeError(f"unserializable {type(o)}")
        return json.dumps(asdict(self), default=default)


def message_bits(message):
    if not isinstance(message, (bytes, bytearray)):
        raise TypeError("strategies must serialize messages to bytes")
    return measure_memory(message)


def _unit_samples_in(E, m, rng):
    """m i.i.d. uniform points of the unit sphere intersected with E."""
    if m == 0:
        return np.zeros((0, E.ambient_dim))
    coeff = rng.standard_normal((m, E.dim))
    vs = coeff @ E.basis.T
    vs /= np.linalg.norm(vs, axis=1, keepdims=True)
    return vs


# ---------------------------------------------------------------------------
# Game: probing
# ---------------------------------------------------------------------------

def min_alignment(queries, subspaces):
    """min over unit z in span(queries) of ||Proj_{span(subspaces)}(z)||.

    Computed exactly as the smallest singular value of the probing-span
    projection restricted to an orthonormal basis of the query span; zero or
    dependent queries are dropped (rank-deficient convention).  Returns +inf
    when the query span is trivial (no unit z exists).
    """
    BY = orthonormalize(np.column_stack([np.asarray(y, float) for y in queries]))
    if BY.shape[1] == 0:
        return float("inf")
    BW = orthonormalize(np.hstack([V.basis for V in subspaces]))
    M = BW.T @ BY
    if M.shape[1] > M.shape[0]:
        return 0.0
    return float(np.linalg.svd(M, compute_uv=False)[-1])


def probing_verdict(min_projections, rho):
    """Win iff at every prefix some unit combination hides below rho."""
    return all(v <= rho for v in min_projections)


def run_probing_game(strategy, d, l, k, rho, rng):
    """Probing game: k rounds of query-then-reveal against fresh subspaces."""
    subspaces = [sample_uniform_subspace(d, l, rng) for _ in range(k)]
    queries = []
    steps = []
    for i in range(1, k + 1):
        y = np.asarray(strategy.query(i, subspaces[:i - 1]), dtype=float)
        if y.shape != (d,):
            raise ValueError(f"round-{i} query has shape {y.shape}, expected ({d},)")
        queries.append(y)
        steps.append({"round": i, "query_norm": float(np.linalg.norm(y))})
    mins = [min_alignment(queries[:i], subspaces[:i]) for i in range(1, k + 1)]
    verdict = probing_verdict(mins, rho)
    return GameTranscript(
        game="probing",
        config={"d": d, "l": l, "k": k, "rho": rho},
        steps=steps,
        verdict=verdict,
        diagnostics={"min_projections": mins},
    )


def min_alignment_bruteforce(queries, subspaces, points, rng):
    """Monte-Carlo upper bound on :func:`min_alignment` over a random net."""
    BY = orthonormalize(np.column_stack([np.asarray(y, float) for y in queries]))
    if BY.shape[1] == 0:
        return float("inf")
    BW = orthonormalize(np.hstack([V.basis for V in subspaces]))
    coeff = rng.standard_normal((points, BY.shape[1]))
    coeff /= np.linalg.norm(coeff, axis=1, keepdims=True)
    Z = coeff @ BY.T
    return float(np.min(np.linalg.norm(Z @ BW, axis=1)))


# ---------------------------------------------------------------------------
# Games: orthogonal subspace (full, simplified, adapted)
# ---------------------------------------------------------------------------

def osg_verdict(diag, beta, gamma):
    """Win iff unit outputs, projections onto E below beta, residuals above gamma."""
    if diag.get("message_over_budget"):
        return False
    return (
        max(diag["unit_errors"]) <= UNIT_TOL
        and max(diag["proj_norms"]) <= beta
        and min(diag["residuals"]) >= gamma
    )


def _judge_outputs(E, ys, k):
    ys = np.asarray(ys, dtype=float)
    if ys.shape != (k, E.ambient_dim):
        raise ValueError(f"strategy must return {k} vectors of dimension {E.ambient_dim}")
    unit_errors = np.abs(np.linalg.norm(ys, axis=1) - 1.0)
    proj_norms = E.proj_norm(ys)
    residuals = gram_schmidt_residuals(ys.T)
    return {
        "unit_errors": [float(v) for v in unit_errors],
        "proj_norms": [float(v) for v in proj_norms],
        "residuals": [float(v) for v in residuals],
    }


def run_orthogonal_subspace_game(strategy, d, d_tilde, M_bits, k, m, beta, gamma, rng):
    """Two-phase subspace-hiding game with an M-bit message between phases."""
    E = sample_uniform_subspace(d, d_tilde, rng)
    vs = _unit_samples_in(E, m, rng)
    message = strategy.encode(E, vs)
    bits = message_bits(message)
    config = {"d": d, "d_tilde": d_tilde, "M_bits": M_bits, "k": k, "m": m,
              "beta": beta, "gamma": gamma}
    if bits > M_bits:
        diag = {"message_bits": bits, "message_over_budget": True}
        return GameTranscript("osg", config, [], False, diag)
    ys = strategy.produce(message, vs)
    diag = _judge_outputs(E, ys, k)
    diag["message_bits"] = bits
    verdict = osg_verdict(diag, beta, gamma)
    return GameTranscript("osg", config, [{"phase": 1, "bits": bits}], verdict, diag)


def run_simplified_osg(strategy, d, d_tilde, M_bits, k, beta, gamma, rng):
    """Same harness with the sample phase deleted (m = 0)."""
    transcript = run_orthogonal_subspace_game(
        strategy, d, d_tilde, M_bits, k, 0, beta, gamma, rng)
    transcript.game = "osg-simple"
    return transcript


def run_adapted_osg(strategy, d, d_tilde, M_bits, k, m, beta, gamma, J, rng):
    """Adapted variant: J sample batches, player picks which one replays."""
    E = sample_uniform_subspace(d, d_tilde, rng)
    batches = [_unit_samples_in(E, m, rng) for _ in range(J)]
    message, j_hat = strategy.choose(E, batches)
    config = {"d": d, "d_tilde": d_tilde, "M_bits": M_bits, "k": k, "m": m,
              "beta": beta, "gamma": gamma, "J": J}
    if not 1 <= int(j_hat) <= J:
        raise ValueError(f"chosen index {j_hat} outside [1, {J}]")
    bits = message_bits(message)
    if bits > M_bits:
        diag = {"message_bits": bits, "message_over_budget": True, "j_hat": int(j_hat)}
        return GameTranscript("adapted-osg", config, [], False, diag)
    ys = strategy.produce(message, batches[int(j_hat) - 1])
    diag = _judge_outputs(E, ys, k)
    diag["message_bits"] = bits
    diag["j_hat"] = int(j_hat)
    verdict = osg_verdict(diag, beta, gamma)
    return GameTranscript("adapted-osg", config, [{"j_hat": int(j_hat)}], verdict, diag)


# ---------------------------------------------------------------------------
# Game: kernel discovery
# ---------------------------------------------------------------------------

def kernel_verdict(diag, threshold):
    return diag["unit_error"] <= UNIT_TOL and diag["proj_norm"] < threshold


def run_kernel_discovery(strategy, d, d_tilde, m, rng):
    """One-shot game: after m in-subspace samples, point away from the subspace."""
    E = sample_uniform_subspace(d, d_tilde, rng)
    vs = _unit_samples_in(E, m, rng)
    y = np.asarray(strategy.respond(vs), dtype=float)
    threshold = float(np.sqrt(d_tilde / (20.0 * d)))
    diag = {
        "unit_error": float(abs(np.linalg.norm(y) - 1.0)),
        "proj_norm": float(E.proj_norm(y)),
        "threshold": threshold,
    }
    verdict = kernel_verdict(diag, threshold)
    return GameTranscript(
        game="kernel",
        config={"d": d, "d_tilde": d_tilde, "m": m},
        steps=[],
        verdict=verdict,
        diagnostics=diag,
    )


# ---------------------------------------------------------------------------
# Game: depth-p feasibility (adaptive oracle)
# ---------------------------------------------------------------------------

def run_depth_p_feasibility_game(strategy, params, p, T_max, rng):
    """Emulate one depth-p period of the adaptive oracle as a game.

    The player observes the block subspaces and pre-sampled deeper probing
    subspaces, injects a message plus deeper exploratory state, and supplies a
    memory-bounded algorithm; it wins when depth p collects k exploratory
    queries before T_max, unless a deeper period completes first.
    """
    if not 1 <= p <= params.P:
        raise ValueError(f"p must be in [1, {params.P}]")
    seed = child_seed(int(rng.integers(2**62)), "depth-game")
    oracle = DetOracle(params, seed, use_fallback=False)
    deeper = {q: tuple(sample_subspace_within(oracle.E[q - 1], params.l_at(q), rng)
                       for _ in range(params.k))
              for q in range(p + 1, params.P + 1)}

    message, injections = strategy.prepare(oracle.E, deeper)
    bits = message_bits(message)
    config = {"p": p, "T_max": T_max, "M_bits": strategy.m_bits,
              "d": params.d, "P": params.P, "k": params.k}
    if bits > strategy.m_bits:
        return GameTranscript("depth", config, [], False,
                              {"message_bits": bits, "message_over_budget": True})
    for q, ys in injections.items():
        if q not in deeper:
            raise ValueError(f"injected exploratory vectors at non-deeper depth {q}")
        if not 0 <= len(ys) <= params.k:
            raise ValueError(f"injected count at depth {q} outside [0, k]")
        for y in ys:
            if np.asarray(y).shape != (params.d,):
                raise ValueError(f"injected vector at depth {q} has wrong arity")
        oracle.explo[q - 1] = [np.asarray(y, dtype=float) for y in ys]
        oracle.probing[q - 1] = list(deeper[q][: len(ys)])
        oracle._probe_basis_cache[q - 1] = None
        oracle._explo_basis_cache[q - 1] = None

    alg = strategy.algorithm()
    memory = bytes(message) + bytes(max(0, (strategy.m_bits + 7) // 8 - len(message)))
    steps = []
    verdict = False
    outcome = "timeout"
    for t in range(1, T_max + 1):
        x = alg.query(memory, t, rng)
        response = oracle.respond(x)
        steps.append({"t": t, "n_p": oracle.n(p)})
        if any(trigger > p for trigger in oracle.last_resets):
            outcome = "deeper_period_completed"
            break
        if oracle.n(p) >= params.k:
            verdict = True
            outcome = "completed"
            break
        if not is_success(response):
            memory = alg.update(memory, t, x, response, rng)
            if measure_memory(memory) > strategy.m_bits:
                outcome = "memory_budget_violated"
                break
    return GameTranscript(
        game="depth",
        config=config,
        steps=steps,
        verdict=verdict,
        diagnostics={"outcome": outcome, "n_p": oracle.n(p),
                     "message_bits": bits, "oracle_seed": seed},
    )


# ---------------------------------------------------------------------------
# Game: feasibility against the oblivious oracle
# ---------------------------------------------------------------------------

def run_randomized_feasibility_game(strategy, params, J_P, rng):
    """One depth-P period of the oblivious oracle, with player-chosen schedule.

    The oracle pre-samples J_P independent tuple-sequences per depth; the
    player sees everything, commits a message and an index j_hat, and its
    algorithm then faces the j_hat schedule for T_P iterations.  Win: at least
    k depth-P exploratory queries.
    """
    if J_P < 1:
        raise ValueError("J_P >= 1 required")
    seed = child_seed(int(rng.integers(2**62)), "rand-feas-game")
    T_P = params.T[params.P - 1]
    probe_rng = stream(seed, "rand-feas-game", "sequences")
    base = RandOracle(params, seed)  # supplies the block subspaces
    sequences = {}
    for p in range(1, params.P + 1):
        periods = max(1, T_P // params.T[p - 1])
        for j in range(1, J_P + 1):
            sequences[(p, j)] = [
                tuple(sample_subspace_within(base.E[p - 1], params.l_at(p), probe_rng)
                      for _ in range(params.k))
                for _ in range(periods)
            ]
    message, j_hat = strategy.prepare(base.E, sequences)
    j_hat = int(j_hat)
    config = {"P": params.P, "J_P": J_P, "T_P": T_P, "M_bits": strategy.m_bits,
              "d": params.d, "k": params.k}
    if not 1 <= j_hat <= J_P:
        raise ValueError(f"chosen index {j_hat} outside [1, {J_P}]")
    bits = message_bits(message)
    if bits > strategy.m_bits:
        return GameTranscript("rand-feas", config, [], False,
                              {"message_bits": bits, "message_over_budget": True})
    override = {}
    for p in range(1, params.P + 1):
        for a, tup in enumerate(sequences[(p, j_hat)]):
            override[(p, a)] = tup
    oracle = RandOracle(params, seed, tuples_override=override, use_fallback=False)
    alg = strategy.algorithm()
    memory = bytes(message) + bytes(max(0, (strategy.m_bits + 7) // 8 - len(message)))
    for t in range(1, T_P + 1):
        x = alg.query(memory, t, rng)
        response = oracle.respond(x)
        if not is_success(response):
            memory = alg.update(memory, t, x, response, rng)
            if measure_memory(memory) > strategy.m_bits:
                return GameTranscript("rand-feas", config, [], False,
                                      {"outcome": "memory_budget_violated",
                                       "message_bits": bits})
    explored = oracle.counters["exploratory"][params.P - 1]
    verdict = explored >= params.k
    return GameTranscript(
        game="rand-feas",
        config=config,
        steps=[],
        verdict=verdict,
        diagnostics={"depth_P_exploratory": int(explored), "j_hat": j_hat,
                     "message_bits": bits, "oracle_seed": seed,
                     "leak_rate": oracle.leak_rate()},
    )

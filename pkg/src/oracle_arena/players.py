"""Reference players for the analysis games.

Three tiers, per the harness's needs:

* random players -- no-information baselines;
* resource-honest constructive players (greedy orthogonalizers, the
  encode-the-complement player) that respect the stated budgets;
* full-information "oracle cheaters", clearly labeled, that peek at hidden
  state to sanity-check the harnesses.  Never use these to measure hardness.
"""

import numpy as np

from .solvers import MemoryBoundedAlgorithm
from .subspaces import orthonormalize, residual


def _unit(v):
    return v / np.linalg.norm(v)


def _unit_residual(vectors, probe, rng, d):
    """Unit vector orthogonal to span(vectors), seeded by `probe` or random."""
    for _ in range(16):
        candidate = probe if probe is not None else rng.standard_normal(d)
        r = residual(vectors, candidate)
        if np.linalg.norm(r) > 1e-8:
            return _unit(r)
        probe = None
    raise RuntimeError("could not find a direction in the orthogonal complement")


# -- probing-game players ----------------------------------------------------


class RandomProbingPlayer:
    def __init__(self, d, rng):
        self.d = d
        self.rng = rng

    def query(self, i, revealed):
        return _unit(self.rng.standard_normal(self.d))


class GreedyOrthogonalProbingPlayer:
    """Submits unit queries orthogonal to every revealed probing subspace."""

    def __init__(self, d, rng):
        self.d = d
        self.rng = rng

    def query(self, i, revealed):
        if not revealed:
            return _unit(self.rng.standard_normal(self.d))
        stack = np.hstack([V.basis for V in revealed])
        return _unit_residual(stack, None, self.rng, self.d)


# -- orthogonal-subspace-game players -----------------------------------------


class RandomOSGPlayer:
    """Empty message; phase 2 outputs random orthonormal vectors."""

    def __init__(self, d, k, rng):
        self.d = d
        self.k = k
        self.rng = rng

    def encode(self, E, samples):
        return b""

    def choose(self, E, batches):
        return b"", 1

    def produce(self, message, samples):
        G = self.rng.standard_normal((self.d, self.k))
        return orthonormalize(G).T


class EncodeComplementOSGPlayer:
    """Stores an orthonormal basis of E-perp at 64-bit precision.

    Needs 64 * d * (d - d_tilde) message bits; with that budget it wins every
    trial, which sanity-checks the harness end to end.
    """

    def __init__(self, d, d_tilde, k):
        self.d = d
        self.d_tilde = d_tilde
        self.k = k

    @property
    def bits_needed(self):
        return 64 * self.d * (self.d - self.d_tilde)

    def encode(self, E, samples):
        full = np.eye(self.d)
        comp = orthonormalize(full - E.basis @ (E.basis.T @ full))
        comp = comp[:, : self.d - self.d_tilde]
        return np.ascontiguousarray(comp, dtype=np.float64).tobytes()

    def produce(self, message, samples):
        comp = np.frombuffer(message, dtype=np.float64).reshape(
            self.d, self.d - self.d_tilde)
        return comp[:, : self.k].T


# -- kernel-discovery players --------------------------------------------------


class ComplementKernelPlayer:
    """Outputs a unit vector orthogonal to the span of the received samples.

    With fewer than d_tilde samples this is the best effort available and
    still loses overwhelmingly; with a spanning sample set the span equals the
    hidden subspace and the player wins.
    """

    def __init__(self, d, rng):
        self.d = d
        self.rng = rng

    def respond(self, samples):
        if samples.shape[0] == 0:
            return _unit(self.rng.standard_normal(self.d))
        return _unit_residual(samples.T, None, self.rng, self.d)


class UniformSphereKernelPlayer:
    def __init__(self, d, rng):
        self.d = d
        self.rng = rng

    def respond(self, samples):
        return _unit(self.rng.standard_normal(self.d))


# -- memory-bounded algorithm shims for the feasibility games -------------------


class ScriptedAlgorithm(MemoryBoundedAlgorithm):
    """Plays a fixed query list, then repeats the last entry.  Ignores memory."""

    name = "scripted"

    def __init__(self, queries, m_bits=0):
        self.queries = [np.asarray(q, dtype=float) for q in queries]
        self.m_bits = m_bits

    def query(self, memory, t, rng):
        return self.queries[min(t - 1, len(self.queries) - 1)]

    def update(self, memory, t, x, response, rng):
        return memory


class RandomBallAlgorithm(MemoryBoundedAlgorithm):
    """Memoryless: each query is a fresh near-unit random direction."""

    name = "random-ball"

    def __init__(self, d, m_bits=0):
        self.d = d
        self.m_bits = m_bits

    def query(self, memory, t, rng):
        v = rng.standard_normal(self.d)
        return 0.999 * _unit(v)

    def update(self, memory, t, x, response, rng):
        return memory


def _half_space_exploratory_script(E_list, d, count, rng, depth_margin=0.55):
    """Queries in the half-space, exactly orthogonal to every block subspace,
    and mutually robustly independent (the constructive full-information play).
    """
    e = np.zeros(d)
    e[0] = 1.0
    stacked = np.hstack([E.basis for E in E_list])
    f = residual(stacked, e)
    f_norm = np.linalg.norm(f)
    if f_norm < depth_margin + 0.01:
        raise RuntimeError(f"half-space margin unavailable: ||f|| = {f_norm:.3f}")
    u = f / f_norm
    a = depth_margin / f_norm
    b = np.sqrt(0.99 - a * a)
    blocked = np.column_stack([stacked, e, u])
    ws = []
    for _ in range(count):
        w = _unit_residual(np.column_stack([blocked] + [w[:, None] for w in ws]),
                           None, rng, d)
        ws.append(w)
    return [-a * u + b * w for w in ws]


class FullInfoDepthCheater:
    """LABELED CHEATER: reads the hidden subspaces to script winning queries."""

    cheats = True

    def __init__(self, params, rng, m_bits=0):
        self.params = params
        self.rng = rng
        self.m_bits = m_bits
        self._script = None

    def prepare(self, E_list, deeper):
        script = _half_space_exploratory_script(
            E_list, self.params.d, self.params.k, self.rng)
        self._script = script
        return b"", {}

    def algorithm(self):
        return ScriptedAlgorithm(self._script, m_bits=self.m_bits)


class NullDepthPlayer:
    """Empty message, no injections, memoryless random queries."""

    def __init__(self, params, rng, m_bits=0):
        self.params = params
        self.rng = rng
        self.m_bits = m_bits

    def prepare(self, E_list, deeper):
        return b"", {}

    def algorithm(self):
        return RandomBallAlgorithm(self.params.d, m_bits=self.m_bits)


class FullInfoRandFeasCheater:
    """LABELED CHEATER for the oblivious-oracle game."""

    cheats = True

    def __init__(self, params, rng, m_bits=0):
        self.params = params
        self.rng = rng
        self.m_bits = m_bits
        self._script = None

    def prepare(self, E_list, sequences):
        self._script = _half_space_exploratory_script(
            E_list, self.params.d, self.params.k, self.rng)
        return b"", 1

    def algorithm(self):
        return ScriptedAlgorithm(self._script, m_bits=self.m_bits)


class RandomRandFeasPlayer:
    def __init__(self, params, rng, m_bits=0):
        self.params = params
        self.rng = rng
        self.m_bits = m_bits

    def prepare(self, E_list, sequences):
        return b"", 1

    def algorithm(self):
        return RandomBallAlgorithm(self.params.d, m_bits=self.m_bits)

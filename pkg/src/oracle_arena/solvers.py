"""Memory-constrained algorithms and the feasibility driver.

The model: an algorithm is a pair of functions (query, update) around a bit
string.  Between oracle calls only the bit string survives; within a call the
algorithm may use unlimited scratch.  The driver measures the serialized state
after every update and fails the run if it ever exceeds the declared budget.
Real numbers are encoded as 64-bit floats, so budgets count those encodings.

Two baselines span the memory/query tradeoff at desk scale:

* projected subgradient descent -- d + 4 floats of state, ~1/eps^2 queries;
* the central-cut ellipsoid method -- d + d(d+1)/2 + 4 floats of state,
  O(d^2 ln 1/eps) queries.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .oracle_det import SUCCESS, Cut, is_success


class BudgetViolation(RuntimeError):
    def __init__(self, iteration, measured, declared):
        super().__init__(
            f"memory budget violated at iteration {iteration}: "
            f"{measured} bits > declared {declared}")
        self.iteration = iteration


def measure_memory(state_bytes):
    """Bit count of a serialized memory state (canonical: 8 x byte length)."""
    if not isinstance(state_bytes, (bytes, bytearray)):
        raise TypeError("memory states are byte strings")
    return 8 * len(state_bytes)


class MemoryBoundedAlgorithm:
    """Interface: query/update around an M-bit buffer, starting from zeros."""

    name = "abstract"
    m_bits = 0

    def zero_memory(self):
        return bytes((self.m_bits + 7) // 8)

    def query(self, memory, t, rng):
        raise NotImplementedError

    def update(self, memory, t, x, response, rng):
        raise NotImplementedError


def _pack(*arrays):
    return b"".join(np.ascontiguousarray(a, dtype=np.float64).tobytes() for a in arrays)


class SubgradientSolver(MemoryBoundedAlgorithm):
    """Projected subgradient feasibility descent.

    State: the current iterate (d floats) plus an iteration counter and three
    reserved slots, 64(d+4) bits total.  On any cut g the iterate moves by
    -step(t) * g and is projected back into the unit ball.
    """

    def __init__(self, d, step_schedule):
        self.d = d
        if callable(step_schedule):
            self.step = step_schedule
        else:
            eta = float(step_schedule)
            if eta <= 0:
                raise ValueError("step size must be positive")
            self.step = lambda t: eta
        self.name = "subgradient"
        self.m_bits = 64 * (d + 4)

    def _unpack(self, memory):
        vals = np.frombuffer(memory, dtype=np.float64)
        return vals[:self.d].copy(), vals[self.d:].copy()

    def query(self, memory, t, rng):
        x, _ = self._unpack(memory)
        return x

    def update(self, memory, t, x, response, rng):
        xs, extra = self._unpack(memory)
        g = response.g
        xs = xs - self.step(t) * g
        nrm = np.linalg.norm(xs)
        if nrm > 1.0:
            xs /= nrm
        extra[0] = t
        return _pack(xs, extra)


class EllipsoidSolver(MemoryBoundedAlgorithm):
    """Central-cut ellipsoid method with exact determinant self-checks.

    State: center (d floats) + packed upper triangle of the shape matrix
    (d(d+1)/2 floats) + 4 scalars, 64(d + d(d+1)/2 + 4) bits.  The ellipsoid
    is {x : (x-c)^T B^{-1} (x-c) <= 1}, initialized to the unit ball.  When
    the center leaves the unit ball, the oracle's answer for the projected
    query is discarded and the ball constraint itself supplies the cut; either
    way the volume shrinks by the standard factor.
    """

    def __init__(self, d, initial_radius=1.0, self_check=True):
        if d < 2:
            raise ValueError("d >= 2 required")
        self.d = d
        self.r0 = float(initial_radius)
        self.self_check = self_check
        self.name = "ellipsoid"
        self.m_bits = 64 * (d + d * (d + 1) // 2 + 4)
        self._iu = np.triu_indices(d)
        self.volume_ratio_errors = []   # |measured - closed form| per update
        self.restarts = 0

    def _unpack(self, memory):
        vals = np.frombuffer(memory, dtype=np.float64)
        d = self.d
        c = vals[:d].copy()
        tri = vals[d:d + d * (d + 1) // 2]
        B = np.zeros((d, d))
        B[self._iu] = tri
        B = B + np.triu(B, 1).T
        extra = vals[d + d * (d + 1) // 2:].copy()
        if extra[1] == 0.0:  # first touch: shape matrix starts at r0^2 I
            B = np.eye(d) * self.r0 ** 2
            extra[1] = 1.0
        return c, B, extra

    def _pack_state(self, c, B, extra):
        return _pack(c, B[self._iu], extra)

    def query(self, memory, t, rng):
        c, _, _ = self._unpack(memory)
        nrm = np.linalg.norm(c)
        if nrm > 1.0:
            return c / nrm * (1.0 - 1e-12)
        return c

    def update(self, memory, t, x, response, rng):
        c, B, extra = self._unpack(memory)
        d = self.d
        if np.linalg.norm(c) > 1.0:
            g = c / np.linalg.norm(c)      # ball cut through the center
        else:
            g = response.g
        gBg = float(g @ B @ g)
        if not math.isfinite(gBg) or gBg <= 0.0:
            B = np.eye(d) * self.r0 ** 2   # regularization restart, logged
            self.restarts += 1
            extra[2] += 1.0
            gBg = float(g @ B @ g)
        if self.self_check:
            sign0, logdet0 = np.linalg.slogdet(B)
        b = (B @ g) / math.sqrt(gBg)
        c = c - b / (d + 1.0)
        B = (d * d / (d * d - 1.0)) * (B - (2.0 / (d + 1.0)) * np.outer(b, b))
        B = 0.5 * (B + B.T)
        if self.self_check:
            sign1, logdet1 = np.linalg.slogdet(B)
            measured = math.exp(0.5 * (logdet1 - logdet0))
            closed = ((d * d / (d * d - 1.0)) ** (d / 2.0)
                      * math.sqrt((d - 1.0) / (d + 1.0)))
            self.volume_ratio_errors.append(abs(measured - closed))
        extra[0] = t
        return self._pack_state(c, B, extra)


def subgradient_solver(d, step_schedule):
    return SubgradientSolver(d, step_schedule)


def ellipsoid_solver(d, initial_radius=1.0, self_check=True):
    return EllipsoidSolver(d, initial_radius=initial_radius, self_check=self_check)


@dataclass
class RunTrace:
    """Record of one feasibility run."""

    instance: dict
    algorithm: str
    m_bits: int
    queries: int
    success: bool
    wall_ms: float
    memory_bits_hist: dict         # measured bits -> iterations at that size
    depth_hist: dict               # response depth (or "success") -> count
    final_query: np.ndarray | None = None
    cuts: list = field(default_factory=list)   # (x, g) pairs when recorded

    @property
    def max_memory_bits(self):
        return max(self.memory_bits_hist) if self.memory_bits_hist else 0


def run_feasibility(oracle, alg, T_max, rng, record_cuts=False):
    """Drive the query/respond/update loop until Success or T_max queries.

    The serialized memory is measured after every update and must stay within
    the declared budget.  Success is cross-checked against the oracle's own
    membership test.
    """
    memory = alg.zero_memory()
    if measure_memory(memory) > alg.m_bits + 7:
        raise BudgetViolation(0, measure_memory(memory), alg.m_bits)
    mem_hist = {}
    depth_hist = {}
    success = False
    final_query = None
    cuts = []
    t0 = time.perf_counter()
    queries = 0
    for t in range(1, T_max + 1):
        x = alg.query(memory, t, rng)
        if np.linalg.norm(x) > 1.0 + 1e-12:
            raise ValueError(f"solver emitted an out-of-ball query at t={t}")
        response = oracle.respond(x)
        queries = t
        if is_success(response):
            success = True
            final_query = np.array(x)
            depth_hist["success"] = depth_hist.get("success", 0) + 1
            break
        depth_hist[response.depth] = depth_hist.get(response.depth, 0) + 1
        if record_cuts:
            cuts.append((np.array(x), np.array(response.g)))
        memory = alg.update(memory, t, x, response, rng)
        bits = measure_memory(memory)
        mem_hist[bits] = mem_hist.get(bits, 0) + 1
        if bits > alg.m_bits:
            raise BudgetViolation(t, bits, alg.m_bits)
    wall_ms = (time.perf_counter() - t0) * 1e3
    if success and hasattr(oracle, "membership"):
        if not oracle.membership(final_query):
            raise AssertionError("oracle returned Success on a non-member query")
    instance = {"seed": getattr(oracle, "seed", None),
                "kind": type(oracle).__name__}
    return RunTrace(instance=instance, algorithm=alg.name, m_bits=alg.m_bits,
                    queries=queries, success=success, wall_ms=wall_ms,
                    memory_bits_hist=mem_hist, depth_hist=depth_hist,
                    final_query=final_query, cuts=cuts)


class HalfspaceOracle:
    """Degenerate instance with no hidden subspaces: the half-space alone."""

    def __init__(self, d):
        self.d = d
        self.seed = None
        self._e = np.zeros(d)
        self._e[0] = 1.0

    def respond(self, x):
        x = np.asarray(x, dtype=float)
        if x[0] > -0.5:
            return Cut(self._e.copy(), 0, kind="e")
        return SUCCESS

    def membership(self, x):
        x = np.asarray(x, dtype=float)
        return bool(np.linalg.norm(x) <= 1.0 + 1e-12 and x[0] <= -0.5)

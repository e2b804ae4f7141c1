"""The oblivious, iteration-indexed hard-instance oracle.

Unlike the adaptive oracle, nothing here reacts to the algorithm's queries:
for each depth p the oracle holds a k-tuple of probing subspaces of E_p that
rolls on a fixed schedule, every T_p iterations.  Tuples are conceptually an
infinite pre-sampled family; they are generated lazily from a stream keyed by
(seed, depth, period index), which preserves obliviousness -- the response at
time t is a deterministic function of (seed, t, x) alone.

Each probe index i carries its own tolerance delta_i^{(p)} (strictly
increasing in i), and the response at a depth is the normalized projection
onto the probing subspace with the smallest violated index.  Exploratory
queries are instrumentation only: they never influence responses, but the
event log tracks whether the minimal violated index stays within one of the
number of exploratory queries seen this period (sequential-discovery checks).
"""

import json

import numpy as np

from .oracle_det import (
    SUCCESS,
    Cut,
    InscribedBallError,
    QUERY_NORM_SLACK,
    QueryNormError,
)
from .params import RandParams
from .streams import stream
from .subspaces import DimensionError, orthonormalize, sample_subspace_within, sample_uniform_subspace


def index_set(subspace_tuple, x, deltas):
    """Indices (1-based) whose probing subspace sees more of x than tolerated.

    ``deltas`` must be strictly increasing, matching the tuple's length.
    """
    if len(deltas) != len(subspace_tuple):
        raise DimensionError("one tolerance per probing subspace required")
    if any(deltas[i] >= deltas[i + 1] for i in range(len(deltas) - 1)):
        raise ValueError("per-index tolerances must be strictly increasing")
    x = np.asarray(x, dtype=float)
    return {i + 1 for i, (V, dlt) in enumerate(zip(subspace_tuple, deltas))
            if V.proj_norm(x) > dlt}


class RandOracle:
    """State of one oblivious hard instance (clock, lazy tuple cache, logs)."""

    def __init__(self, params: RandParams, seed, record_events=True, tuples_override=None,
                 use_fallback=True):
        if params.N < 1:
            raise ValueError("N >= 1 required for the resampling schedule (see validate())")
        self.params = params
        self.seed = int(seed)
        self.record_events = record_events
        self.use_fallback = use_fallback
        rng_E = stream(seed, "rand-oracle", "E")
        self.E = [sample_uniform_subspace(params.d, params.d_tilde, rng_E)
                  for _ in range(params.P)]
        self.t = 0
        self.events = []
        self.counters = {
            "responses": {"success": 0, "e_cut": 0, "probe_cut": 0, "espace_cut": 0},
            "exploratory": [0] * params.P,
            "leaks": 0,            # probe cuts with min index > r_p(t-) + 1
            "probe_cuts": 0,
            "proper_flags": [0] * params.P,
            "deep_queries": [0] * params.P,
        }
        self._tuples = {}                      # (p, a) -> tuple of k Subspaces
        self._tuple_hashes = {}                # (p, a) -> bytes digest at first use
        self._tuples_override = dict(tuples_override or {})
        self._explo = [[] for _ in range(params.P)]   # current-period lists
        self._explo_basis = [None] * params.P
        self._active_period = [-1] * params.P
        self._e = np.zeros(params.d)
        self._e[0] = 1.0
        self._ball_cache = None

    # -- schedule -------------------------------------------------------------

    def period_of(self, p, t):
        return t // self.params.T[p - 1]

    def tuple_at(self, p, a):
        """The immutable k-tuple active at depth p during period a."""
        key = (p, a)
        if key not in self._tuples:
            if key in self._tuples_override:
                tup = tuple(self._tuples_override[key])
            else:
                rng = stream(self.seed, "rand-oracle", "tuple", p, a)
                tup = tuple(
                    sample_subspace_within(self.E[p - 1], self.params.l_at(p), rng)
                    for _ in range(self.params.k))
            self._tuples[key] = tup
            self._tuple_hashes[key] = b"".join(
                np.ascontiguousarray(V.basis).tobytes() for V in tup)
        return self._tuples[key]

    def _roll_periods(self, t):
        for p in range(1, self.params.P + 1):
            a = self.period_of(p, t)
            if a != self._active_period[p - 1]:
                self._active_period[p - 1] = a
                self._explo[p - 1] = []
                self._explo_basis[p - 1] = None

    # -- classification ---------------------------------------------------------

    def r(self, p):
        """Exploratory queries recorded so far in the current depth-p period."""
        return len(self._explo[p - 1])

    def _explo_residual(self, p, x):
        if not self._explo[p - 1]:
            return float(np.linalg.norm(x))
        B = self._explo_basis[p - 1]
        if B is None:
            B = orthonormalize(np.column_stack(self._explo[p - 1]))
            self._explo_basis[p - 1] = B
        r = x - B @ (B.T @ x)
        r -= B @ (B.T @ r)
        return float(np.linalg.norm(r))

    def _is_exploratory(self, x, p, active_tuples):
        """Half-space, probe-pass at depths q < p, robust independence at gamma_p."""
        if x[0] > -0.5:
            return False
        for q in range(1, p):
            if index_set(active_tuples[q - 1], x, self.params.delta[q - 1]):
                return False
        return self._explo_residual(p, x) >= self.params.gamma[p - 1]

    # -- pure response (obliviousness) -----------------------------------------

    def response_at(self, t, x):
        """The response the oracle gives at clock t, with no bookkeeping.

        Pure in (seed, t, x); used both by :meth:`respond` and by replay
        checks.  Returns (response, kind, depth, min_index, probe_sets,
        espace_norms).
        """
        x = np.asarray(x, dtype=float)
        if np.linalg.norm(x) > 1.0 + QUERY_NORM_SLACK:
            raise QueryNormError(f"query norm {np.linalg.norm(x):.17g} exceeds 1")
        P = self.params.P
        active = [self.tuple_at(p, self.period_of(p, t)) for p in range(1, P + 1)]
        probe_sets = [index_set(active[p - 1], x, self.params.delta[p - 1])
                      for p in range(1, P + 1)]
        espace_norms = [float(self.E[p - 1].proj_norm(x)) for p in range(1, P + 1)]
        if x[0] > -0.5:
            return Cut(self._e.copy(), 0, kind="e"), "e_cut", 0, None, probe_sets, espace_norms
        for p in range(1, P + 1):
            if probe_sets[p - 1]:
                i = min(probe_sets[p - 1])
                V = active[p - 1][i - 1]
                g = V.project(x)
                cut = Cut(g / np.linalg.norm(g), p, kind="probe")
                return cut, "probe_cut", p, i, probe_sets, espace_norms
        if self.use_fallback:
            for p in range(1, P + 1):
                if espace_norms[p - 1] > self.params.delta[p - 1][0]:
                    g = self.E[p - 1].project(x)
                    cut = Cut(g / np.linalg.norm(g), p, kind="espace")
                    return cut, "espace_cut", p, None, probe_sets, espace_norms
        return SUCCESS, "success", None, None, probe_sets, espace_norms

    # -- the oracle step ---------------------------------------------------------

    def respond(self, x):
        """One oracle call: roll periods, classify, respond, advance the clock."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.params.d,):
            raise DimensionError(f"query must have shape ({self.params.d},)")
        t = self.t
        self.t += 1
        self._roll_periods(t)
        P = self.params.P
        active = [self.tuple_at(p, self.period_of(p, t)) for p in range(1, P + 1)]

        r_before = [self.r(p) for p in range(1, P + 1)]
        exploratory_depths = []
        for p in range(1, P + 1):
            if self._is_exploratory(x, p, active):
                exploratory_depths.append(p)
                self.counters["exploratory"][p - 1] += 1
                self._explo[p - 1].append(np.array(x, dtype=float))
                self._explo_basis[p - 1] = None

        response, kind, depth, min_index, probe_sets, espace_norms = self.response_at(t, x)
        self.counters["responses"][kind] += 1
        leak = False
        if kind == "probe_cut":
            self.counters["probe_cuts"] += 1
            if min_index > r_before[depth - 1] + 1:
                leak = True
                self.counters["leaks"] += 1
        if depth is not None and depth >= 1:
            for q in range(1, depth):
                self.counters["deep_queries"][q - 1] += 1
                if espace_norms[q - 1] > self.params.eta[q - 1]:
                    self.counters["proper_flags"][q - 1] += 1

        if self.record_events:
            self.events.append({
                "t": t,
                "depth": depth if depth is not None else "success",
                "response_kind": kind,
                "exploratory_depths": exploratory_depths,
                "resets": [],
                "period_index_per_depth": [self.period_of(p, t) for p in range(1, P + 1)],
                "min_violated_index": min_index,
                "r_p": [self.r(p) for p in range(1, P + 1)],
                "leak": leak,
                "proj_norms": {
                    "violated_indices": [sorted(s) for s in probe_sets],
                    "espace": espace_norms,
                },
            })
        return response

    # -- feasible-set side ---------------------------------------------------------

    def membership(self, x):
        return bool(self.membership_many(np.asarray(x, dtype=float)[None, :])[0])

    def membership_many(self, X):
        X = np.asarray(X, dtype=float)
        ok = np.linalg.norm(X, axis=1) <= 1.0 + QUERY_NORM_SLACK
        ok &= X[:, 0] <= -0.5
        for p in range(1, self.params.P + 1):
            ok &= self.E[p - 1].proj_norm(X) <= self.params.delta[p - 1][0]
        return ok

    def inscribed_ball(self):
        if getattr(self, "_ball_cache", None) is not None:
            return self._ball_cache
        stacked = np.hstack([E.basis for E in self.E])
        B = orthonormalize(stacked)
        f = self._e - B @ (B.T @ self._e)
        f -= B @ (B.T @ f)
        f_norm = float(np.linalg.norm(f))
        if f_norm <= 0.5 + 1.0 / 40.0:
            raise InscribedBallError(
                f"||f|| = {f_norm:.6f} <= 0.525; instance discarded")
        r = min(self.params.delta[0][0], 1.0 / 40.0)
        center = -(1.0 - r / 2.0) * f / f_norm
        self._ball_cache = (center, r / 2.0)
        return self._ball_cache

    def sample_feasible(self, n, rng):
        center, radius = self.inscribed_ball()
        d = self.params.d
        dirs = rng.standard_normal((n, d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        radii = radius * rng.random(n) ** (1.0 / d)
        pts = center + dirs * radii[:, None]
        ok = self.membership_many(pts)
        if not np.all(ok):
            raise InscribedBallError(
                f"{int(np.sum(~ok))}/{n} inscribed-ball samples failed membership")
        return pts

    def certify_separation(self, x, g, samples, rng):
        pts = self.sample_feasible(samples, rng)
        return bool(np.all(pts @ g < float(np.dot(g, x))))

    # -- instrumentation -------------------------------------------------------------

    def leak_rate(self):
        n = self.counters["probe_cuts"]
        return self.counters["leaks"] / n if n else 0.0

    def proper_flag_rates(self):
        """Per-depth rate of deeper-depth responses that leaked past eta_q."""
        rates = []
        for q in range(self.params.P):
            n = self.counters["deep_queries"][q]
            rates.append(self.counters["proper_flags"][q] / n if n else 0.0)
        return rates

    def tuple_hash(self, p, a):
        self.tuple_at(p, a)
        return self._tuple_hashes[(p, a)]

    def write_events(self, path):
        with open(path, "w") as fh:
            for ev in self.events:
                fh.write(json.dumps(ev) + "\n")


def new_rand_instance(params, seed, record_events=True, tuples_override=None):
    return RandOracle(params, seed, record_events=record_events,
                      tuples_override=tuples_override)

"""The adaptive hard-instance separation oracle.

The feasible set is the unit ball intersected with the half-space
``e^T x <= -1/2`` and, for each depth p, the slab ``||Proj_{E_p}(x)|| <=
delta_p`` for hidden random block subspaces E_1..E_P.  Instead of revealing
E_p directly, the oracle probes queries with low-dimensional subspaces
V_i^{(p)} of E_p that are appended adaptively: whenever a query is classified
*exploratory* at depth p (in the half-space, passing all probes at depths
q <= p, robustly independent of the depth-p exploratory queries collected so
far), a fresh probing subspace is sampled.  When a depth reaches k exploratory
queries, that depth and all shallower ones reset, which starts a new period.

Responses, in order of precedence: the fixed cut ``e`` when the query misses
the half-space; the normalized probe projection at the smallest violated
depth; the normalized E_p projection at the smallest violated depth (fallback
separation oracle for the feasible set itself); Success.

Bookkeeping happens before the response is computed, exactly in that order,
so a query that triggers a reset is answered by the post-reset oracle.
"""

import json
from dataclasses import dataclass

import numpy as np

from .params import DetParams
from .streams import stream
from .subspaces import (
    DimensionError,
    Subspace,
    orthonormalize,
    sample_subspace_within,
    sample_uniform_subspace,
)

QUERY_NORM_SLACK = 1e-12


class _Success:
    __slots__ = ()

    def __repr__(self):
        return "Success"


#: singleton returned for feasible queries.
SUCCESS = _Success()


@dataclass(frozen=True)
class Cut:
    """A separating response: unit normal ``g`` and the depth that produced it.

    ``depth`` is 0 for the half-space cut ``e`` and p in [1, P] otherwise.
    ``kind`` distinguishes probe cuts from fallback block-subspace cuts.
    """

    g: np.ndarray
    depth: int
    kind: str = "probe"


def is_success(response):
    return response is SUCCESS


class QueryNormError(ValueError):
    """Query outside the unit ball (beyond tolerance)."""


class InscribedBallError(RuntimeError):
    """The low-probability event where the inscribed-ball construction fails."""


class DetOracle:
    """Full mutable state of one adaptive hard instance.

    Construct with :func:`new_det_instance`.  One oracle is owned by a single
    run; determinism: identical (seed, query sequence) yields an identical
    transcript, including every sampled probing subspace.
    """

    def __init__(self, params: DetParams, seed, record_events=True, use_fallback=True):
        self.params = params
        self.seed = int(seed)
        self.record_events = record_events
        # the depth-game variant answers from the probing oracle alone
        self.use_fallback = use_fallback
        rng_E = stream(seed, "det-oracle", "E")
        self.E = [sample_uniform_subspace(params.d, params.d_tilde, rng_E)
                  for _ in range(params.P)]
        self._rng_probe = stream(seed, "det-oracle", "probes")
        P = params.P
        self.probing = [[] for _ in range(P)]      # probing[p-1]: list of Subspace
        self.explo = [[] for _ in range(P)]        # explo[p-1]: list of queries
        self.period_index = [0] * P
        self.t = 0
        self.events = []
        self.counters = {
            "responses": {"success": 0, "e_cut": 0, "probe_cut": 0, "espace_cut": 0},
            "resets": [0] * P,
            "exploratory": [0] * P,
            "proper_flags": [0] * P,   # depth-p' responses (p' > q) with ||Proj_{E_q}x|| > eta_q
            "deep_queries": [0] * P,   # responses at depth > q, per q (flag-rate denominators)
        }
        self._e = np.zeros(params.d)
        self._e[0] = 1.0
        self._probe_basis_cache = [None] * P
        self._explo_basis_cache = [None] * P
        self._ball_cache = None

    # -- internal caches ----------------------------------------------------

    def _probe_basis(self, p):
        """Orthonormal basis of span(V_i^{(p)}, i <= n_p); None when empty."""
        c = self._probe_basis_cache[p - 1]
        if c is None and self.probing[p - 1]:
            stacked = np.hstack([V.basis for V in self.probing[p - 1]])
            c = orthonormalize(stacked)
            self._probe_basis_cache[p - 1] = c
        return c

    def _explo_basis(self, p):
        c = self._explo_basis_cache[p - 1]
        if c is None and self.explo[p - 1]:
            c = orthonormalize(np.column_stack(self.explo[p - 1]))
            self._explo_basis_cache[p - 1] = c
        return c

    def _probe_norm(self, p, x):
        B = self._probe_basis(p)
        if B is None or B.shape[1] == 0:
            return 0.0
        return float(np.linalg.norm(B.T @ x))

    def _explo_residual(self, p, x):
        B = self._explo_basis(p)
        if B is None or B.shape[1] == 0:
            return float(np.linalg.norm(x))
        r = x - B @ (B.T @ x)
        r -= B @ (B.T @ r)
        return float(np.linalg.norm(r))

    # -- classification and state updates -----------------------------------

    def n(self, p):
        """Number of current depth-p exploratory queries."""
        return len(self.explo[p - 1])

    def is_exploratory(self, x, p):
        """Depth-p exploratory test against the *current* lists.

        Conditions: (i) e^T x <= -1/2; (ii) probe-pass at every depth q <= p;
        (iii) robust independence from the stored depth-p exploratory queries.
        """
        x = np.asarray(x, dtype=float)
        if x[0] > -0.5:
            return False
        for q in range(1, p + 1):
            if self._probe_norm(q, x) > self.params.delta[q - 1]:
                return False
        return self._explo_residual(p, x) >= self.params.delta[p - 1]

    def _append_probe(self, p, x):
        l_p = self.params.l_at(p)
        self.explo[p - 1].append(np.array(x, dtype=float))
        self.probing[p - 1].append(
            sample_subspace_within(self.E[p - 1], l_p, self._rng_probe))
        self._probe_basis_cache[p - 1] = None
        self._explo_basis_cache[p - 1] = None

    def _reset_through(self, p, x):
        """Reset depths q <= p to a single fresh exploratory query/probe pair."""
        for q in range(1, p + 1):
            self.explo[q - 1] = []
            self.probing[q - 1] = []
            self._probe_basis_cache[q - 1] = None
            self._explo_basis_cache[q - 1] = None
            self._append_probe(q, x)
            self.period_index[q - 1] += 1
            self.counters["resets"][q - 1] += 1

    # -- the oracle step -----------------------------------------------------

    def respond(self, x):
        """One oracle call: exploratory bookkeeping, then the response."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.params.d,):
            raise DimensionError(f"query must have shape ({self.params.d},)")
        if np.linalg.norm(x) > 1.0 + QUERY_NORM_SLACK:
            raise QueryNormError(f"query norm {np.linalg.norm(x):.17g} exceeds 1")
        P = self.params.P
        t = self.t
        self.t += 1

        # classify against the arrival state at every depth, then apply the
        # appends/resets in ascending order (resets dominate earlier appends)
        exploratory_depths = [p for p in range(1, P + 1) if self.is_exploratory(x, p)]
        resets = []
        for p in exploratory_depths:
            self.counters["exploratory"][p - 1] += 1
            if self.n(p) < self.params.k:
                self._append_probe(p, x)
            else:
                resets.append(p)
                self._reset_through(p, x)

        probe_norms = [self._probe_norm(p, x) for p in range(1, P + 1)]
        espace_norms = [float(self.E[p - 1].proj_norm(x)) for p in range(1, P + 1)]

        response = SUCCESS
        kind = "success"
        depth = None
        if x[0] > -0.5:
            response = Cut(self._e.copy(), 0, kind="e")
            kind, depth = "e_cut", 0
        else:
            for p in range(1, P + 1):
                if probe_norms[p - 1] > self.params.delta[p - 1]:
                    B = self._probe_basis(p)
                    g = B @ (B.T @ x)
                    response = Cut(g / np.linalg.norm(g), p, kind="probe")
                    kind, depth = "probe_cut", p
                    break
            else:
                if self.use_fallback:
                    for p in range(1, P + 1):
                        if espace_norms[p - 1] > self.params.delta[p - 1]:
                            g = self.E[p - 1].project(x)
                            response = Cut(g / np.linalg.norm(g), p, kind="espace")
                            kind, depth = "espace_cut", p
                            break

        self.counters["responses"][kind] += 1
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
                "resets": resets,
                "trigger_depth": resets[-1] if resets else None,
                "proj_norms": {"probe": probe_norms, "espace": espace_norms},
            })
        self.last_resets = resets
        return response

    # -- feasible-set side ----------------------------------------------------

    def membership(self, x):
        return bool(self.membership_many(np.asarray(x, dtype=float)[None, :])[0])

    def membership_many(self, X):
        """Vectorized membership: unit ball, half-space, and all block slabs."""
        X = np.asarray(X, dtype=float)
        ok = np.linalg.norm(X, axis=1) <= 1.0 + QUERY_NORM_SLACK
        ok &= X[:, 0] <= -0.5
        for p in range(1, self.params.P + 1):
            ok &= self.E[p - 1].proj_norm(X) <= self.params.delta[p - 1]
        return ok

    def _perp_component_of_e(self):
        stacked = np.hstack([E.basis for E in self.E])
        B = orthonormalize(stacked)
        f = self._e - B @ (B.T @ self._e)
        f -= B @ (B.T @ f)
        return f

    def inscribed_ball(self):
        """Center and radius of the certified feasible ball.

        The component f of e orthogonal to every block subspace must clear
        ||f|| > 1/2 + 1/40 (fails with exponentially small probability); the
        ball of radius min(delta_1, 1/40)/2 around -(1 - r/2) f/||f|| then lies
        inside the feasible set.
        """
        if self._ball_cache is not None:
            return self._ball_cache
        f = self._perp_component_of_e()
        f_norm = float(np.linalg.norm(f))
        if f_norm <= 0.5 + 1.0 / 40.0:
            raise InscribedBallError(
                f"||f|| = {f_norm:.6f} <= 0.525; instance discarded")
        r = min(self.params.delta[0], 1.0 / 40.0)
        center = -(1.0 - r / 2.0) * f / f_norm
        self._ball_cache = (center, r / 2.0)
        return self._ball_cache

    def sample_feasible(self, n, rng):
        """n points uniform in the inscribed ball; all verified members."""
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
        """True iff g separates x from `samples` points of the inscribed ball."""
        pts = self.sample_feasible(samples, rng)
        return bool(np.all(pts @ g < float(np.dot(g, x))))

    # -- instrumentation -------------------------------------------------------

    def proper_flag_rates(self):
        """Per-depth rate of deeper-depth responses that leaked past eta_q."""
        rates = []
        for q in range(self.params.P):
            n = self.counters["deep_queries"][q]
            rates.append(self.counters["proper_flags"][q] / n if n else 0.0)
        return rates

    def write_events(self, path):
        with open(path, "w") as fh:
            for ev in self.events:
                fh.write(json.dumps(ev) + "\n")


def new_det_instance(params, seed, record_events=True):
    """Fresh instance: block subspaces sampled, all counts zero, empty logs."""
    return DetOracle(params, seed, record_events=record_events)

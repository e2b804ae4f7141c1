"""Random-matrix and concentration laboratory.

Centerpiece: rectangular n x Cn ensembles whose upper triangle (columns
j >= C*i in row i, 0-based) is i.i.d. standard Gaussian while the lower
triangle is either zero or *adaptive* -- filled row by row by a callback that
only ever sees the permitted prefix of the matrix, making the independence
structure a harness guarantee rather than a convention.

The smallest singular value of such matrices stays above (1/6) sqrt(C/n^alpha)
except with probability 3 e^{-C/16} (for C >= C_alpha ln n); the lab measures
that tail, sweeps the band factor C, and exercises the samplewise coupling
that dominates any adaptive lower triangle by a rotated zero-lower-triangle
matrix.

Also here: Monte-Carlo suites for the scalar concentration facts the
constructions lean on (chi-square norms, projections of random unit vectors,
random-subspace isometry, extreme singular values of Gaussian rectangles).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .subspaces import sample_uniform_subspace


class StructuralViolationError(RuntimeError):
    """Adaptive callback broke the ensemble's shape contract."""


@dataclass(frozen=True)
class TriangularEnsembleSpec:
    """n x (C n) ensemble with Gaussian upper triangle and zero/adaptive lower."""

    n: int
    C: int
    alpha: float = 1.0
    adaptive: object = None   # callback(row_index, permitted_view) -> row prefix

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n >= 1 required")
        if self.C < 2:
            raise ValueError("C >= 2 required")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha in (0, 1] required")

    @property
    def m(self):
        return self.C * self.n

    @property
    def threshold(self):
        return (1.0 / 6.0) * math.sqrt(self.C / self.n ** self.alpha)

    @property
    def tail_bound(self):
        return 3.0 * math.exp(-self.C / 16.0)


def sample_triangular(spec, rng):
    """Draw one matrix from the ensemble.

    The adaptive callback for row i receives a read-only copy of the rows
    above it restricted to the first C*i columns (everything the lower
    triangle of row i may lawfully depend on) and must return exactly C*i
    entries.
    """
    n, C, m = spec.n, spec.C, spec.m
    M = np.zeros((n, m))
    for i in range(n):
        M[i, C * i:] = rng.standard_normal(m - C * i)
    if spec.adaptive is not None:
        for i in range(1, n):
            view = M[:i, : C * i].copy()
            view.flags.writeable = False
            row = np.asarray(spec.adaptive(i, view), dtype=float)
            if row.shape != (C * i,):
                raise StructuralViolationError(
                    f"row {i} callback returned shape {row.shape}, expected ({C * i},)")
            if not np.all(np.isfinite(row)):
                raise StructuralViolationError(f"row {i} callback returned non-finite entries")
            M[i, : C * i] = row
    return M


def smallest_singular_value(M):
    """Exact dense smallest singular value (n <= m orientation enforced)."""
    M = np.asarray(M, dtype=float)
    if M.shape[0] > M.shape[1]:
        raise ValueError("expected a wide matrix (n <= m)")
    return float(np.linalg.svd(M, compute_uv=False)[-1])


def coupled_zeroed_matrix(M, C):
    """The paired zero-lower-triangle matrix dominated by ``M``.

    Builds, block-row by block-row, the rotated coupling under which
    ``sigma_1(M) >= sigma_1(M0)`` holds samplewise for *any* lower triangle:
    at each step the freshly appended adaptive row is zeroed, and the
    orthogonal map aligning the singular systems of the stacked prefix
    with/without that row is pushed onto the remaining Gaussian block.
    """
    M = np.asarray(M, dtype=float)
    n, m = M.shape
    if m != C * n:
        raise ValueError("matrix width must equal C * n")
    T = M[:1, :C].copy()
    R = np.eye(1)
    for i in range(2, n + 1):
        q = C * (i - 1)
        N = M[:i, :q]
        N_tilde = np.vstack([M[:i - 1, :q], np.zeros((1, q))])
        P = np.linalg.svd(N, full_matrices=True)[0]
        P_tilde = np.linalg.svd(N_tilde, full_matrices=True)[0]
        U = P_tilde @ P.T
        R_hat = np.zeros((i, i))
        R_hat[:i - 1, :i - 1] = R
        R_hat[i - 1, i - 1] = 1.0
        R = R_hat @ U
        A = M[:i, q:q + C]
        T = np.block([
            [T, (R @ A)[:i - 1]],
            [np.zeros((1, q)), (R @ A)[i - 1:i]],
        ])
    return T


@dataclass
class TailReport:
    spec: TriangularEnsembleSpec
    trials: int
    threshold: float
    fraction_below: float
    tail_bound: float
    bound_vacuous: bool
    min_sigma: float
    median_sigma: float
    sigmas: np.ndarray = field(repr=False)


def tail_experiment(spec, trials, rng):
    """Fraction of draws with sigma_1 below the threshold, vs the tail bound."""
    if trials < 1:
        raise ValueError("trials >= 1 required")
    sigmas = np.array([smallest_singular_value(sample_triangular(spec, rng))
                       for _ in range(trials)])
    frac = float(np.mean(sigmas < spec.threshold))
    bound = spec.tail_bound
    return TailReport(
        spec=spec, trials=trials, threshold=spec.threshold,
        fraction_below=frac, tail_bound=bound, bound_vacuous=bound >= 1.0,
        min_sigma=float(sigmas.min()), median_sigma=float(np.median(sigmas)),
        sigmas=sigmas,
    )


def band_sweep(n, C_values, alpha, trials, rng):
    """Tail reports across band factors; min sigma_1 should grow with C."""
    return [tail_experiment(TriangularEnsembleSpec(n=n, C=C, alpha=alpha), trials, rng)
            for C in C_values]


def write_sweep_csv(reports, path, seed):
    """Per-draw sweep rows: n, C, alpha, trial, sigma_min, threshold, below_flag, seed."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "C", "alpha", "trial", "sigma_min", "threshold",
                         "below_flag", "seed"])
        for report in reports:
            spec = report.spec
            for trial, sigma in enumerate(report.sigmas):
                writer.writerow([spec.n, spec.C, spec.alpha, trial,
                                 f"{sigma:.17g}", f"{report.threshold:.17g}",
                                 int(sigma < report.threshold), seed])


# ---------------------------------------------------------------------------
# scalar concentration suites
# ---------------------------------------------------------------------------

def _binomial_guard(bound, trials):
    """Assertable ceiling: bound + 3 binomial standard errors (capped at 1)."""
    b = min(bound, 1.0)
    se = math.sqrt(b * (1.0 - b) / trials) if 0.0 < b < 1.0 else math.sqrt(0.25 / trials)
    return min(1.0, b + 3.0 * se)


def projection_tail_suite(d, r, t_grid, trials, rng):
    """Squared projection of a uniform unit vector onto a fixed rank-r projector.

    Mean r/d; upper tail e^{-(r/8) min(t, t^2)}, lower tail e^{-r t^2 / 4}.
    """
    X = rng.standard_normal((trials, d))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    sq = np.sum(X[:, :r] ** 2, axis=1)   # rotation invariance: project on e_1..e_r
    rows = []
    base = r / d
    for t in t_grid:
        up_emp = float(np.mean(sq >= base * (1.0 + t)))
        up_bound = math.exp(-(r / 8.0) * min(t, t * t))
        lo_emp = float(np.mean(sq <= base * (1.0 - t)))
        lo_bound = math.exp(-r * t * t / 4.0)
        rows.append({
            "t": float(t),
            "upper_empirical": up_emp, "upper_bound": up_bound,
            "upper_ok": up_emp <= _binomial_guard(up_bound, trials),
            "upper_vacuous": up_bound >= 1.0,
            "lower_empirical": lo_emp, "lower_bound": lo_bound,
            "lower_ok": lo_emp <= _binomial_guard(lo_bound, trials),
            "lower_vacuous": lo_bound >= 1.0,
        })
    return {"kind": "projection-tails", "d": d, "r": r, "trials": trials,
            "mean_sq": float(np.mean(sq)), "exact_mean": base, "rows": rows}


def subspace_isometry_suite(d, r, s, t_grid, trials, rng, net_constant=1.0):
    """Two-sided isometry of sqrt(d/r) * Proj over a random s-dim subspace.

    Failure probability bound exp(s ln(c d/(r t)) - r t^2 / 32); the net
    constant c is unspecified upstream, so c=1 by default and vacuity is
    flagged rather than silently passed.
    """
    rows = []
    for t in t_grid:
        fails = 0
        for _ in range(trials):
            E = sample_uniform_subspace(d, s, rng)
            sv = np.linalg.svd(E.basis[:r, :], compute_uv=False)
            scaled_max = math.sqrt(d / r) * float(sv[0])
            scaled_min = math.sqrt(d / r) * float(sv[-1])
            if scaled_max > 1.0 + t or scaled_min < 1.0 - t:
                fails += 1
        bound = math.exp(s * math.log(net_constant * d / (r * t)) - r * t * t / 32.0)
        rows.append({
            "t": float(t), "empirical": fails / trials, "bound": bound,
            "ok": fails / trials <= _binomial_guard(bound, trials),
            "vacuous": bound >= 1.0,
        })
    return {"kind": "subspace-isometry", "d": d, "r": r, "s": s,
            "trials": trials, "rows": rows}


def gaussian_norm_suite(n, trials, rng):
    """Chi-square norm tails at the two plug-in points.

    P(||y|| >= 2 sqrt(n)) <= e^{-n/2} and P(||y|| <= sqrt(n)/2) <= e^{-n/8}.
    """
    norms = np.linalg.norm(rng.standard_normal((trials, n)), axis=1)
    up_emp = float(np.mean(norms >= 2.0 * math.sqrt(n)))
    lo_emp = float(np.mean(norms <= math.sqrt(n) / 2.0))
    up_bound = math.exp(-n / 2.0)
    lo_bound = math.exp(-n / 8.0)
    return {"kind": "gaussian-norm", "n": n, "trials": trials,
            "upper_empirical": up_emp, "upper_bound": up_bound,
            "upper_ok": up_emp <= _binomial_guard(up_bound, trials),
            "lower_empirical": lo_emp, "lower_bound": lo_bound,
            "lower_ok": lo_emp <= _binomial_guard(lo_bound, trials)}


def rectangular_extremes_suite(n, m, t_grid, trials, rng):
    """Extreme singular values of n x m Gaussian(0, 1/n) matrices (m <= n).

    P(s_min <= 1 - sqrt(beta) - t) and P(s_max >= 1 + sqrt(beta) + t) are both
    at most e^{-n t^2 / 2}.
    """
    if m > n:
        raise ValueError("m <= n required")
    beta = m / n
    smin = np.empty(trials)
    smax = np.empty(trials)
    for i in range(trials):
        sv = np.linalg.svd(rng.standard_normal((n, m)) / math.sqrt(n),
                           compute_uv=False)
        smax[i], smin[i] = float(sv[0]), float(sv[-1])
    rows = []
    for t in t_grid:
        bound = math.exp(-n * t * t / 2.0)
        lo_emp = float(np.mean(smin <= 1.0 - math.sqrt(beta) - t))
        hi_emp = float(np.mean(smax >= 1.0 + math.sqrt(beta) + t))
        rows.append({
            "t": float(t), "bound": bound,
            "smin_empirical": lo_emp,
            "smin_ok": lo_emp <= _binomial_guard(bound, trials),
            "smax_empirical": hi_emp,
            "smax_ok": hi_emp <= _binomial_guard(bound, trials),
            "vacuous": bound >= 1.0,
        })
    return {"kind": "rectangular-extremes", "n": n, "m": m, "trials": trials,
            "rows": rows}


def concentration_suite(d, r, s, t_grid, trials, rng):
    """All four Monte-Carlo concentration checks in one report."""
    report = {
        "projection": projection_tail_suite(d, r, t_grid, trials, rng),
        "isometry": subspace_isometry_suite(d, r, s, t_grid,
                                            max(1, trials // 100), rng),
        "gaussian_norm": gaussian_norm_suite(min(d, 50), trials, rng),
        "rectangular": rectangular_extremes_suite(d, r, t_grid,
                                                  max(1, trials // 20), rng),
    }
    flat_ok = []
    for suite in report.values():
        for row in suite.get("rows", []):
            for key in ("upper_ok", "lower_ok", "ok", "smin_ok", "smax_ok"):
                if key in row:
                    flat_ok.append(row[key])
        for key in ("upper_ok", "lower_ok"):
            if key in suite:
                flat_ok.append(suite[key])
    report["all_ok"] = all(flat_ok)
    return report

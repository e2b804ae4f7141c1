"""Parameter ladders for the two hard-instance constructions.

``deterministic_params`` and ``randomized_params`` evaluate every derived
quantity of the adaptive and oblivious constructions respectively: the block
dimension d~, the probing dimension l, the per-depth leakage tolerances eta_p,
the ladder ratios mu / mu_P, the orthogonality tolerances delta (a scalar per
depth in the adaptive family, one per probe index in the oblivious family),
and the scheduling constants T_p, N, N_P, J_P of the oblivious family.

Two modes:

* ``strict`` enforces the construction's assumptions and raises
  :class:`AssumptionViolation` naming the first broken inequality;
* ``lab`` computes the same formulas but admits explicit overrides (probing
  dimensions, tolerance ladders) so that desk-scale instances exist, and
  downgrades violated assumptions to warnings retrievable via :func:`validate`.

Both constructors are pure: identical inputs give bit-identical outputs.
"""

import json
import math
from dataclasses import asdict, dataclass, replace

DET_OVERRIDE_KEYS = ("l", "l_P", "delta")
RAND_OVERRIDE_KEYS = ("l", "l_P")


class AssumptionViolation(ValueError):
    """Strict-mode parameter set violating a stated assumption."""

    def __init__(self, violations):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class ParameterOverflow(ValueError):
    """A derived quantity underflowed to zero or is non-finite."""


def _c_alpha(C2, alpha):
    return (C2 / alpha) ** (math.log(2.0) / alpha)


@dataclass(frozen=True)
class DetParams:
    """Derived parameter set of the adaptive (deterministic-algorithm) construction."""

    d: int
    P: int
    k: int
    alpha: float
    l_P: int
    C2: float
    mode: str
    d_tilde: int
    l: int
    C_alpha: float
    mu: float
    mu_P: float
    eta: tuple          # eta[p-1] for p = 1..P
    delta: tuple        # delta[p-1] for p = 1..P
    eps: float          # = delta[0] / 2

    def l_at(self, p):
        """Probing dimension at depth p (l for p < P, l_P at the last depth)."""
        return self.l_P if p == self.P else self.l

    def to_json(self):
        doc = asdict(self)
        doc["eta"] = list(self.eta)
        doc["delta"] = list(self.delta)
        doc["family"] = "deterministic"
        return json.dumps(doc)

    @staticmethod
    def from_json(text):
        doc = json.loads(text)
        doc.pop("family", None)
        doc["eta"] = tuple(doc["eta"])
        doc["delta"] = tuple(doc["delta"])
        return DetParams(**doc)


@dataclass(frozen=True)
class RandParams:
    """Derived parameter set of the oblivious (randomized-algorithm) construction."""

    d: int
    P: int
    k: int
    l_P: int
    C_rand: float
    mode: str
    d_tilde: int
    l: int
    mu: float
    mu_P: float
    eta: tuple          # eta[p-1] for p = 1..P
    delta: tuple        # delta[p-1][i-1] for p = 1..P, i = 1..k (increasing in i)
    gamma: tuple        # gamma[p-1] = delta[p-1][0] / (4k)
    T: tuple            # T[p-1] = floor(k/2) * N^(p-1)
    N: int
    N_P: int
    J_P: int
    eps: float          # = delta[0][0] / 2

    def l_at(self, p):
        return self.l_P if p == self.P else self.l

    def to_json(self):
        doc = asdict(self)
        doc["eta"] = list(self.eta)
        doc["delta"] = [list(row) for row in self.delta]
        doc["gamma"] = list(self.gamma)
        doc["T"] = list(self.T)
        doc["family"] = "randomized"
        return json.dumps(doc)

    @staticmethod
    def from_json(text):
        doc = json.loads(text)
        doc.pop("family", None)
        doc["eta"] = tuple(doc["eta"])
        doc["delta"] = tuple(tuple(row) for row in doc["delta"])
        doc["gamma"] = tuple(doc["gamma"])
        doc["T"] = tuple(doc["T"])
        return RandParams(**doc)


def params_from_json(text):
    family = json.loads(text).get("family")
    if family == "randomized":
        return RandParams.from_json(text)
    return DetParams.from_json(text)


def _check_finite_positive(name, value):
    if not math.isfinite(value) or value <= 0.0:
        raise ParameterOverflow(f"{name} = {value!r} underflowed or is not finite")


def deterministic_params(d, P, k, alpha=1.0, l_P=None, constants=None, mode="strict",
                         overrides=None):
    """Evaluate the adaptive construction's parameter formulas.

    ``overrides`` (lab mode only) may replace ``l``, ``l_P``, or the full
    ``delta`` ladder; when ``delta`` is overridden, the eta ladder is
    recomputed through the inverse of the delta formula so that the eta/delta
    ratio stays coherent for instrumentation.
    """
    if mode not in ("strict", "lab"):
        raise ValueError(f"unknown mode {mode!r}")
    if P < 2:
        raise AssumptionViolation([f"P >= 2 required, got P={P}"])
    if k < 1:
        raise AssumptionViolation([f"k >= 1 required, got k={k}"])
    if not 0.0 < alpha <= 1.0:
        raise AssumptionViolation([f"alpha in (0, 1] required, got alpha={alpha}"])
    constants = dict(constants or {})
    C2 = float(constants.get("C2", 8.0))
    overrides = dict(overrides or {})
    if overrides and mode == "strict":
        raise AssumptionViolation(["overrides are a lab-mode feature"])
    unknown = set(overrides) - set(DET_OVERRIDE_KEYS)
    if unknown:
        raise ValueError(f"unknown override keys {sorted(unknown)}")

    d_tilde = d // (2 * P)
    if d_tilde < 1:
        raise AssumptionViolation([f"d={d} too small for P={P} (d_tilde = 0)"])
    C_alpha = _c_alpha(C2, alpha)
    l_formula = math.ceil(max(16.0 * math.log(32.0 * d * d * P), C_alpha * math.log(k) if k > 1 else 0.0))
    l = int(overrides.get("l", l_formula))
    if l_P is None:
        l_P = int(overrides.get("l_P", l))
    l_P = int(l_P)
    if mode == "lab":   # strict mode lets validate() name the range violations
        l = max(1, min(l, d_tilde))
        l_P = max(1, min(l_P, d_tilde))

    eta_P = 0.1 * math.sqrt(d_tilde / d)
    mu_P = 600.0 * math.sqrt(d * k ** (1.0 + alpha) / l_P)
    mu = 600.0 * math.sqrt(d * k ** (1.0 + alpha) / l)
    eta = []
    delta = []
    try:
        for p in range(1, P + 1):
            if p == P:
                eta.append(eta_P)
            else:
                eta.append((eta_P / mu_P) / mu ** (P - p - 1))
        for p in range(1, P + 1):
            l_p = l_P if p == P else l
            delta.append((eta[p - 1] / 36.0) * math.sqrt(l_p / (d_tilde * k ** alpha)))
    except OverflowError as err:
        raise ParameterOverflow(f"tolerance ladder left the float range: {err}") from err

    if "delta" in overrides:
        delta = [float(v) for v in overrides["delta"]]
        if len(delta) != P:
            raise ValueError(f"delta override must have P={P} entries")
        eta = []
        for p in range(1, P + 1):
            l_p = l_P if p == P else l
            eta.append(36.0 * delta[p - 1] / math.sqrt(l_p / (d_tilde * k ** alpha)))

    for name, vals in (("eta", eta), ("delta", delta)):
        for p, v in enumerate(vals, start=1):
            _check_finite_positive(f"{name}_{p}", v)

    params = DetParams(
        d=int(d), P=int(P), k=int(k), alpha=float(alpha), l_P=l_P, C2=C2, mode=mode,
        d_tilde=d_tilde, l=l, C_alpha=C_alpha, mu=mu, mu_P=mu_P,
        eta=tuple(eta), delta=tuple(delta), eps=delta[0] / 2.0,
    )
    if mode == "strict":
        violations = validate(params, mode="strict")
        if violations:
            raise AssumptionViolation(violations)
    return params


def randomized_params(d, P, k, l_P=None, constants=None, mode="strict", overrides=None):
    """Evaluate the oblivious construction's parameter formulas."""
    if mode not in ("strict", "lab"):
        raise ValueError(f"unknown mode {mode!r}")
    if P < 2:
        raise AssumptionViolation([f"P >= 2 required, got P={P}"])
    if k < 3:
        raise AssumptionViolation([f"k >= 3 required, got k={k}"])
    constants = dict(constants or {})
    C_rand = float(constants.get("C", constants.get("C_rand", 1.0)))
    overrides = dict(overrides or {})
    if overrides and mode == "strict":
        raise AssumptionViolation(["overrides are a lab-mode feature"])
    unknown = set(overrides) - set(RAND_OVERRIDE_KEYS)
    if unknown:
        raise ValueError(f"unknown override keys {sorted(unknown)}")

    d_tilde = d // (2 * P)
    if d_tilde < 1:
        raise AssumptionViolation([f"d={d} too small for P={P} (d_tilde = 0)"])
    l_formula = math.ceil(C_rand * k ** 3 * math.log(d))
    l = int(overrides.get("l", l_formula))
    if l_P is None:
        l_P = int(overrides.get("l_P", l))
    l_P = int(l_P)
    if mode == "lab":
        l = max(1, min(l, d_tilde))
        l_P = max(1, min(l_P, d_tilde))

    eta_P = 0.1 * math.sqrt(d_tilde / d)
    mu_P = 1200.0 * k * math.sqrt(k * d / l_P)
    mu = 1200.0 * k * math.sqrt(k * d / l)
    eta = []
    delta = []
    try:
        for p in range(1, P + 1):
            if p == P:
                eta.append(eta_P)
            else:
                eta.append((eta_P / mu_P) / mu ** (P - p - 1))
        shrink = 1.0 - 2.0 / k
        for p in range(1, P + 1):
            l_p = l_P if p == P else l
            row = [(eta[p - 1] * shrink ** (k - i) / 2.0) * math.sqrt(l_p / d_tilde)
                   for i in range(1, k + 1)]
            delta.append(tuple(row))
    except OverflowError as err:
        raise ParameterOverflow(f"tolerance ladder left the float range: {err}") from err
    gamma = tuple(row[0] / (4.0 * k) for row in delta)

    N = d_tilde // (2 * l * k)
    N_P = d_tilde // (2 * l_P * k)
    T = tuple((k // 2) * N ** (p - 1) for p in range(1, P + 1))
    J_P = N

    for p in range(1, P + 1):
        _check_finite_positive(f"eta_{p}", eta[p - 1])
        for i in range(1, k + 1):
            _check_finite_positive(f"delta_{i}^({p})", delta[p - 1][i - 1])

    params = RandParams(
        d=int(d), P=int(P), k=int(k), l_P=l_P, C_rand=C_rand, mode=mode,
        d_tilde=d_tilde, l=l, mu=mu, mu_P=mu_P,
        eta=tuple(eta), delta=tuple(delta), gamma=gamma,
        T=T, N=int(N), N_P=int(N_P), J_P=int(J_P),
        eps=delta[0][0] / 2.0,
    )
    if mode == "strict":
        violations = validate(params, mode="strict")
        if violations:
            raise AssumptionViolation(violations)
    return params


def validate(params, mode=None, M_bits=None, c_constants=None):
    """Return every violated construction assumption (with its source clause).

    Empty list means the set is valid.  In lab mode callers treat the entries
    as warnings; strict-mode constructors raise on them.  ``M_bits`` and
    ``c_constants`` optionally enable the memory-dependent range check on k
    (c-constants are not pinned by the construction; they default to 1).
    """
    mode = mode or params.mode
    out = []
    d, P, k, dt = params.d, params.P, params.k, params.d_tilde
    if d < 40 * P:
        out.append(f"d >= 40P violated: d={d}, P={P}")
    if k > dt:
        out.append(f"k in [d_tilde] violated: k={k}, d_tilde={dt}")
    if not 1 <= params.l <= dt:
        out.append(f"l in [d_tilde] violated: l={params.l}, d_tilde={dt}")
    if not 1 <= params.l_P <= dt:
        out.append(f"l_P in [d_tilde] violated: l_P={params.l_P}, d_tilde={dt}")
    if 4 * params.l * k > dt:
        out.append(f"4 l k <= d_tilde violated: 4*{params.l}*{k} = {4 * params.l * k} > {dt}")
    if 4 * params.l_P * k > dt:
        out.append(f"4 l_P k <= d_tilde violated: 4*{params.l_P}*{k} = {4 * params.l_P * k} > {dt}")
    if params.l_P < params.l:
        out.append(f"l_P >= l violated: l_P={params.l_P}, l={params.l}")

    if isinstance(params, DetParams):
        floor_l = max(16.0 * math.log(32.0 * d * d * P),
                      params.C_alpha * math.log(k) if k > 1 else 0.0)
        if params.l < floor_l - 1e-9:
            out.append(
                f"l >= 16 ln(32 d^2 P) v C_alpha ln k violated: l={params.l} < {floor_l:.2f}")
        deltas = params.delta
        if any(deltas[i] >= deltas[i + 1] for i in range(P - 1)):
            out.append("delta_p must be strictly increasing in p")
        if abs(params.eps - deltas[0] / 2.0) > 0.0:
            out.append("eps != delta_1 / 2")
        if M_bits is not None:
            c2 = float((c_constants or {}).get("c2", 1.0))
            lhs = c2 * (M_bits + d * P * math.log(d)) / d * P ** 3 * math.log(d)
            if lhs > k:
                out.append(
                    f"c2 (M + dP ln d)/d * P^3 ln d <= k violated: {lhs:.3g} > k={k}")
    else:
        floor_l = params.C_rand * k ** 3 * math.log(d)
        if params.l < math.ceil(floor_l) - 1e-9:
            out.append(f"l >= ceil(C k^3 ln d) violated: l={params.l} < {floor_l:.2f}")
        if params.N < 1:
            out.append(f"N = floor(d_tilde / (2 l k)) >= 1 violated: N={params.N}")
        for p in range(P):
            row = params.delta[p]
            if any(row[i] >= row[i + 1] for i in range(k - 1)):
                out.append(f"delta_i^({p + 1}) must be strictly increasing in i")
            if abs(params.gamma[p] - row[0] / (4.0 * k)) > 1e-18 * row[0]:
                out.append(f"gamma_{p + 1} != delta_1^({p + 1}) / (4k)")
        if M_bits is not None:
            c5 = float((c_constants or {}).get("c5", 1.0))
            lhs = c5 * (M_bits + P * math.log(d)) / d * P ** 3 * math.log(d)
            if lhs > k:
                out.append(
                    f"c5 (M + P ln d)/d * P^3 ln d <= k violated: {lhs:.3g} > k={k}")
    return out


def with_mode(params, mode):
    """Copy of ``params`` with a different mode flag (no recomputation)."""
    return replace(params, mode=mode)

import json

import numpy as np
import pytest

from oracle_arena.oracle_det import (
    Cut,
    InscribedBallError,
    QueryNormError,
    is_success,
    new_det_instance,
)
from oracle_arena.params import deterministic_params
from oracle_arena.streams import stream
from oracle_arena.subspaces import residual


def lab_params(d=80, P=2, k=3, l=2, **kw):
    return deterministic_params(d=d, P=P, k=k, alpha=1.0, mode="lab",
                                overrides={"l": l}, **kw)


def exploratory_script(oracle, count, margin=0.55):
    """Queries in the half-space, orthogonal to every block subspace."""
    d = oracle.params.d
    e = np.zeros(d)
    e[0] = 1.0
    stacked = np.hstack([E.basis for E in oracle.E])
    f = residual(stacked, e)
    u = f / np.linalg.norm(f)
    a = margin / np.linalg.norm(f)
    b = np.sqrt(0.99 - a * a)
    rng = stream(99, "script")
    blocked = np.column_stack([stacked, e, u])
    out = []
    for _ in range(count):
        w = residual(blocked, rng.standard_normal(d))
        w /= np.linalg.norm(w)
        blocked = np.column_stack([blocked, w])
        out.append(-a * u + b * w)
    return out


def test_fresh_instance_state():
    params = lab_params()
    oracle = new_det_instance(params, seed=0)
    assert all(oracle.n(p) == 0 for p in range(1, params.P + 1))
    assert all(E.dim == params.d_tilde for E in oracle.E)
    stacked = np.hstack([E.basis for E in oracle.E])
    assert np.linalg.matrix_rank(stacked) == params.P * params.d_tilde


def test_first_query_exploratory_at_every_depth():
    params = lab_params()
    oracle = new_det_instance(params, seed=1)
    x = np.zeros(params.d)
    x[0] = -1.0
    oracle.respond(x)
    assert all(oracle.n(p) == 1 for p in range(1, params.P + 1))
    assert all(len(lst) == 1 for lst in oracle.probing)


def test_exploratory_conditions():
    params = lab_params()
    oracle = new_det_instance(params, seed=2)
    x = np.zeros(params.d)
    x[0] = -1.0
    assert all(oracle.is_exploratory(x, p) for p in range(1, params.P + 1))
    flat = np.zeros(params.d)
    flat[1] = 0.9   # e^T x = 0
    assert not any(oracle.is_exploratory(flat, p) for p in range(1, params.P + 1))
    oracle.respond(x)
    # replaying the same vector: residual is 0 < delta_p at every depth
    assert not any(oracle.is_exploratory(x, p) for p in range(1, params.P + 1))


def test_e_cut_outside_halfspace():
    params = lab_params()
    oracle = new_det_instance(params, seed=3)
    x = np.zeros(params.d)
    x[0] = 1.0
    response = oracle.respond(x)
    assert isinstance(response, Cut) and response.depth == 0
    assert np.allclose(response.g, oracle._e)


def test_success_on_inscribed_ball_and_membership():
    params = lab_params()
    oracle = new_det_instance(params, seed=4)
    pts = oracle.sample_feasible(50, stream(4, "feas"))
    assert oracle.membership_many(pts).all()
    for x in pts[:5]:
        assert is_success(oracle.respond(x))
        assert oracle.membership(x)


def test_membership_examples():
    params = lab_params()
    oracle = new_det_instance(params, seed=5)
    assert not oracle.membership(np.zeros(params.d))


def test_query_norm_rejected():
    params = lab_params()
    oracle = new_det_instance(params, seed=6)
    x = np.zeros(params.d)
    x[0] = -1.1
    with pytest.raises(QueryNormError):
        oracle.respond(x)


def test_reset_semantics():
    params = lab_params(k=2)
    oracle = new_det_instance(params, seed=7)
    script = exploratory_script(oracle, params.k + 1)
    for x in script[:params.k]:
        oracle.respond(x)
    assert all(oracle.n(p) == params.k for p in range(1, params.P + 1))
    oracle.respond(script[params.k])   # triggers resets at every depth
    event = oracle.events[-1]
    assert event["resets"]
    deepest = max(event["resets"])
    for q in range(1, deepest + 1):
        assert oracle.n(q) == 1
        assert len(oracle.probing[q - 1]) == 1
    assert oracle.counters["resets"][0] >= 1


def test_depth_monotonicity_of_cuts():
    # a cut at depth p implies probe-pass at all shallower depths
    params = lab_params()
    oracle = new_det_instance(params, seed=8)
    rng = stream(8, "queries")
    for _ in range(200):
        x = rng.standard_normal(params.d)
        x *= 0.98 / np.linalg.norm(x)
        x[0] = -abs(x[0]) - 0.01
        if np.linalg.norm(x) > 1:
            x /= np.linalg.norm(x) * 1.001
        response = oracle.respond(x)
        event = oracle.events[-1]
        if isinstance(response, Cut) and response.kind == "probe":
            for q in range(1, response.depth):
                assert event["proj_norms"]["probe"][q - 1] <= params.delta[q - 1]


def test_success_implies_fallback_passed():
    params = lab_params()
    oracle = new_det_instance(params, seed=9)
    pts = oracle.sample_feasible(20, stream(9, "s"))
    for x in pts:
        assert is_success(oracle.respond(x))
        norms = oracle.events[-1]["proj_norms"]["espace"]
        assert all(norms[p - 1] <= params.delta[p - 1]
                   for p in range(1, params.P + 1))


def test_certify_separation():
    params = lab_params()
    oracle = new_det_instance(params, seed=10)
    rng = stream(10, "cert")
    x = np.zeros(params.d)
    x[0] = 0.4
    cut = oracle.respond(x)
    assert oracle.certify_separation(x, cut.g, 200, rng)
    assert not oracle.certify_separation(x, -cut.g, 200, rng)


def test_unit_cut_norms():
    params = lab_params()
    oracle = new_det_instance(params, seed=11)
    rng = stream(11, "q")
    for _ in range(100):
        x = rng.standard_normal(params.d)
        x *= 0.9 / np.linalg.norm(x)
        response = oracle.respond(x)
        if isinstance(response, Cut):
            assert abs(np.linalg.norm(response.g) - 1.0) <= 1e-10


def test_determinism_bit_for_bit():
    params = lab_params()
    rng = stream(12, "shared-queries")
    queries = [0.9 * q / np.linalg.norm(q)
               for q in rng.standard_normal((60, params.d))]
    logs = []
    for _ in range(2):
        oracle = new_det_instance(params, seed=12)
        for x in queries:
            oracle.respond(x)
        logs.append(json.dumps(oracle.events, default=lambda o: repr(o)))
    assert logs[0] == logs[1]


def test_event_log_round_trip(tmp_path):
    params = lab_params()
    oracle = new_det_instance(params, seed=13)
    x = np.zeros(params.d)
    x[0] = -0.8
    oracle.respond(x)
    path = tmp_path / "events.jsonl"
    oracle.write_events(path)
    lines = [json.loads(line) for line in path.read_text().splitlines()]
    assert lines[0]["t"] == 0
    assert set(lines[0]) >= {"t", "depth", "response_kind", "exploratory_depths",
                             "resets", "proj_norms"}


def test_inscribed_ball_failure_reported():
    params = lab_params()
    oracle = new_det_instance(params, seed=14)
    # force the failure branch by shrinking the stored component
    oracle._perp_component_of_e = lambda: np.full(params.d, 1e-3)
    with pytest.raises(InscribedBallError):
        oracle.inscribed_ball()

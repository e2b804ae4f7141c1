import numpy as np
import pytest

from oracle_arena.oracle_det import Cut, QueryNormError, is_success
from oracle_arena.oracle_rand import RandOracle, index_set, new_rand_instance
from oracle_arena.params import randomized_params
from oracle_arena.streams import stream
from oracle_arena.subspaces import sample_uniform_subspace


def lab_params(d=240, P=2, k=3, l=10, **kw):
    return randomized_params(d=d, P=P, k=k, mode="lab", overrides={"l": l}, **kw)


def test_index_set_examples():
    rng = stream(0, "idx")
    d = 30
    tup = [sample_uniform_subspace(d, 3, rng) for _ in range(3)]
    deltas = [0.01, 0.03, 0.09]
    # orthogonal to every subspace -> empty set
    x = np.zeros(d)
    stacked = np.hstack([V.basis for V in tup])
    q, _ = np.linalg.qr(stacked)
    probe = rng.standard_normal(d)
    probe -= q @ (q.T @ probe)
    probe /= np.linalg.norm(probe)
    assert index_set(tup, probe, deltas) == set()
    # a vector inside V_2 only (and orthogonal to the others' span)
    inside = tup[1].basis[:, 0]
    got = index_set(tup, inside, deltas)
    assert 2 in got
    assert index_set(tup, 1e-4 * inside, deltas) == set()


def test_index_set_requires_increasing_deltas():
    rng = stream(1, "idx2")
    tup = [sample_uniform_subspace(10, 2, rng) for _ in range(2)]
    with pytest.raises(ValueError):
        index_set(tup, np.zeros(10), [0.5, 0.1])


def test_e_cut_any_time():
    params = lab_params()
    oracle = new_rand_instance(params, seed=1)
    x = np.zeros(params.d)
    x[0] = 1.0
    for _ in range(3):
        response = oracle.respond(x)
        assert isinstance(response, Cut) and response.depth == 0


def test_schedule_roll_clears_exploratory():
    params = lab_params()
    oracle = new_rand_instance(params, seed=2)
    T1 = params.T[0]
    x = np.zeros(params.d)
    x[0] = -0.9
    for _ in range(T1):
        oracle.respond(x)
    assert oracle.period_of(1, oracle.t) == 1
    oracle.respond(0.99 * x)
    event = oracle.events[-1]
    assert event["period_index_per_depth"][0] == 1
    # the roll cleared depth-1 exploratory state before this query was classified
    assert event["r_p"][0] <= 1


def test_tuple_immutability_and_within_period_consistency():
    params = lab_params()
    oracle = new_rand_instance(params, seed=3)
    h1 = oracle.tuple_hash(1, 0)
    t1 = oracle.tuple_at(1, 0)
    x = np.zeros(params.d)
    x[0] = -0.7
    for _ in range(params.T[0]):
        oracle.respond(x)
    assert oracle.tuple_at(1, 0) is t1
    assert oracle.tuple_hash(1, 0) == h1


def test_obliviousness_by_replay():
    params = lab_params()
    oracle = new_rand_instance(params, seed=4)
    rng = stream(4, "queries")
    queries = []
    responses = []
    for _ in range(3 * params.T[0]):
        x = rng.standard_normal(params.d)
        x *= 0.95 / np.linalg.norm(x)
        x[0] = -abs(x[0])
        queries.append(x)
        responses.append(oracle.respond(x))
    replay = new_rand_instance(params, seed=4)
    order = list(range(len(queries)))
    rng.shuffle(order)
    for t in order:
        got, kind, depth, _, _, _ = replay.response_at(t, queries[t])
        want = responses[t]
        if is_success(want):
            assert is_success(got)
        else:
            assert got.depth == want.depth and got.kind == want.kind
            assert np.allclose(got.g, want.g, atol=1e-12)


def test_probes_contained_in_blocks():
    params = lab_params()
    oracle = new_rand_instance(params, seed=5)
    for p in range(1, params.P + 1):
        for V in oracle.tuple_at(p, 0):
            for v in V.basis.T:
                assert np.linalg.norm(oracle.E[p - 1].project(v) - v) <= 1e-10


def test_membership_and_success_consistency():
    params = lab_params()
    oracle = new_rand_instance(params, seed=6)
    assert not oracle.membership(np.zeros(params.d))
    pts = oracle.sample_feasible(50, stream(6, "pts"))
    assert oracle.membership_many(pts).all()
    for x in pts[:5]:
        assert is_success(oracle.respond(x))


def test_gamma_ratio_exact():
    params = lab_params()
    for p in range(params.P):
        assert params.gamma[p] == pytest.approx(params.delta[p][0] / (4 * params.k),
                                                rel=1e-15)


def test_min_violated_index_and_leak_accounting():
    params = lab_params()
    oracle = new_rand_instance(params, seed=7)
    rng = stream(7, "drive")
    x = np.zeros(params.d)
    x[0] = -0.8
    for _ in range(4 * params.T[0]):
        jitter = rng.standard_normal(params.d) * 0.02
        q = x + jitter
        q *= min(1.0, 0.999 / np.linalg.norm(q))
        oracle.respond(q)
    assert 0.0 <= oracle.leak_rate() <= 1.0
    probe_events = [ev for ev in oracle.events if ev["response_kind"] == "probe_cut"]
    assert all(ev["min_violated_index"] >= 1 for ev in probe_events)


def test_query_norm_rejected():
    params = lab_params()
    oracle = new_rand_instance(params, seed=8)
    with pytest.raises(QueryNormError):
        oracle.respond(np.ones(params.d))


def test_index_set_histogram_for_in_block_queries():
    # random directions inside a block violate some probe; the first violated
    # index skews small (the tolerances grow with the index).  Recorded only.
    params = lab_params()
    oracle = new_rand_instance(params, seed=9)
    rng = stream(9, "hist")
    tup = oracle.tuple_at(1, 0)
    hist = {i: 0 for i in range(1, params.k + 1)}
    for _ in range(200):
        coeff = rng.standard_normal(params.d_tilde)
        x = oracle.E[0].basis @ (coeff / np.linalg.norm(coeff))
        hit = index_set(tup, x, params.delta[0])
        assert hit   # tolerances are far below a unit in-block vector
        hist[min(hit)] += 1
    assert sum(hist.values()) == 200
    assert hist[1] == max(hist.values())


def test_requires_positive_schedule():
    params = randomized_params(d=240, P=2, k=3, mode="lab", overrides={"l": 40})
    assert params.N == 0
    with pytest.raises(ValueError):
        RandOracle(params, seed=0)

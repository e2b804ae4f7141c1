import numpy as np
import pytest

from oracle_arena.rmt import (
    StructuralViolationError,
    TriangularEnsembleSpec,
    band_sweep,
    concentration_suite,
    coupled_zeroed_matrix,
    gaussian_norm_suite,
    projection_tail_suite,
    rectangular_extremes_suite,
    sample_triangular,
    smallest_singular_value,
    tail_experiment,
    write_sweep_csv,
)
from oracle_arena.streams import stream


def test_single_row_is_chi():
    # n=1: one row of C iid Gaussians, E sigma_1^2 = C
    rng = stream(0, "row")
    spec = TriangularEnsembleSpec(n=1, C=8)
    vals = np.array([smallest_singular_value(sample_triangular(spec, rng)) ** 2
                     for _ in range(10_000)])
    assert abs(vals.mean() - 8.0) / 8.0 <= 0.03


def test_zero_pattern():
    rng = stream(1, "pattern")
    spec = TriangularEnsembleSpec(n=2, C=2)
    M = sample_triangular(spec, rng)
    assert M.shape == (2, 4)
    assert M[1, 0] == 0.0 and M[1, 1] == 0.0
    assert np.all(M[0, :] != 0.0) and np.all(M[1, 2:] != 0.0)


def test_smallest_singular_value_edge_cases():
    M = np.hstack([np.eye(4), np.zeros((4, 4))])
    assert smallest_singular_value(M) == pytest.approx(1.0, abs=1e-12)
    dup = np.vstack([M[0], M[0], M[2], M[3]])
    assert smallest_singular_value(dup) <= 1e-10


def test_threshold_arithmetic():
    spec = TriangularEnsembleSpec(n=50, C=64, alpha=1.0)
    assert spec.threshold == pytest.approx((1.0 / 6.0) * np.sqrt(64.0 / 50.0))
    assert spec.threshold == pytest.approx(0.18856, abs=5e-6)
    assert spec.tail_bound == pytest.approx(3.0 * np.exp(-4.0))


def test_adaptive_callback_contract():
    rng = stream(2, "adaptive")

    def constant_rows(i, view):
        assert view.shape == (i, 3 * i)
        assert not view.flags.writeable
        return np.full(3 * i, 1e6)

    spec = TriangularEnsembleSpec(n=4, C=3, adaptive=constant_rows)
    M = sample_triangular(spec, rng)
    assert np.all(M[3, :9] == 1e6)

    def bad_shape(i, view):
        return np.zeros(1)

    with pytest.raises(StructuralViolationError):
        sample_triangular(TriangularEnsembleSpec(n=3, C=3, adaptive=bad_shape), rng)


@pytest.mark.parametrize("adversary", ["constant", "copy-row", "align"])
def test_coupled_domination_samplewise(adversary):
    rng = stream(3, adversary)

    def callback(i, view):
        if adversary == "constant":
            return np.full(view.shape[1], 1e6)
        if adversary == "copy-row":
            return view[0]
        return 10.0 * view[i - 1] if i >= 1 else np.zeros(view.shape[1])

    C = 3
    for n in (2, 4, 7, 10):
        spec = TriangularEnsembleSpec(n=n, C=C, adaptive=callback)
        for _ in range(10):
            M = sample_triangular(spec, rng)
            M0 = coupled_zeroed_matrix(M, C)
            # the pairing zeroes the lower triangle...
            for i in range(n):
                assert np.all(M0[i, : C * i] == 0.0)
            # ...and is dominated samplewise
            assert (smallest_singular_value(M)
                    >= smallest_singular_value(M0) - 1e-9)


def test_coupled_matrix_preserves_gaussianity_marginally():
    # with a zero lower triangle the coupling must reproduce the draw exactly
    rng = stream(4, "identity")
    spec = TriangularEnsembleSpec(n=5, C=2)
    M = sample_triangular(spec, rng)
    M0 = coupled_zeroed_matrix(M, 2)
    assert smallest_singular_value(M0) == pytest.approx(
        smallest_singular_value(M), rel=1e-10)


def test_tail_experiment_report_fields():
    rng = stream(5, "tail")
    spec = TriangularEnsembleSpec(n=10, C=16)
    report = tail_experiment(spec, 50, rng)
    assert 0.0 <= report.fraction_below <= 1.0
    assert report.bound_vacuous == (report.tail_bound >= 1.0)
    assert report.min_sigma <= report.median_sigma


def test_band_sweep_and_csv(tmp_path):
    rng = stream(6, "sweep")
    reports = band_sweep(12, [4, 8], 1.0, 20, rng)
    path = tmp_path / "sweep.csv"
    write_sweep_csv(reports, path, seed=6)
    lines = path.read_text().splitlines()
    assert lines[0] == "n,C,alpha,trial,sigma_min,threshold,below_flag,seed"
    assert len(lines) == 1 + 2 * 20


def test_projection_suite_mean_and_tails():
    rng = stream(7, "proj")
    report = projection_tail_suite(200, 50, [0.5], 10_000, rng)
    assert abs(report["mean_sq"] - 0.25) <= 0.005
    row = report["rows"][0]
    assert row["upper_bound"] == pytest.approx(np.exp(-50 * 0.25 / 8.0))
    assert row["upper_ok"] and row["lower_ok"]


def test_gaussian_norm_suite_tails():
    rng = stream(8, "gauss")
    report = gaussian_norm_suite(20, 100_000, rng)
    assert report["upper_empirical"] == 0.0
    assert report["upper_ok"] and report["lower_ok"]


def test_rectangular_suite():
    rng = stream(9, "rect")
    report = rectangular_extremes_suite(60, 20, [0.5, 1.0], 200, rng)
    for row in report["rows"]:
        assert row["smin_ok"] and row["smax_ok"]


def test_concentration_suite_aggregate():
    rng = stream(10, "conc")
    report = concentration_suite(100, 25, 4, [0.5, 1.0], 2000, rng)
    assert report["all_ok"]

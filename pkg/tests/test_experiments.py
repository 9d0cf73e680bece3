import numpy as np
import pytest

from rntk_lab.experiments import (
    eigen_table,
    gen_data,
    kernel_sweep,
    parse_data_csv,
    regress,
    sample_sphere,
    width_gap_sweep,
)
from rntk_lab.special import sphere_volume


def csv_body(text: str) -> list[str]:
    return [ln for ln in text.splitlines() if not ln.startswith("#")]


class TestSphereSampling:
    def test_unit_norm(self):
        pts = sample_sphere(np.random.default_rng(0), 500, 5)
        np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)

    def test_covariance_matches_isotropy(self):
        pts = sample_sphere(np.random.default_rng(1), 100_000, 3)
        cov = pts.T @ pts / len(pts)
        np.testing.assert_allclose(cov, np.eye(3) / 3.0, atol=0.01)


class TestKernelSweep:
    def test_deterministic_bytes(self):
        a = kernel_sweep([1.0], [10, 20], replications=2, seed=5, plot=False)
        b = kernel_sweep([1.0], [10, 20], replications=2, seed=5, plot=False)
        assert a.csv == b.csv

    def test_plot_does_not_touch_csv(self):
        a = kernel_sweep([1.0], [10], replications=3, seed=2, plot=False)
        b = kernel_sweep([1.0], [10], replications=3, seed=2, plot=True)
        assert a.csv == b.csv
        assert b.svg is not None and b.svg.startswith("<svg")

    def test_header_carries_seed_and_config(self):
        res = kernel_sweep([1.0, 2.0], [10], replications=2, seed=9, plot=False)
        header = res.csv.splitlines()[0]
        assert header.startswith("#") and "seed=9" in header and "alphas=1,2" in header

    def test_standard_error_definition(self):
        res = kernel_sweep([1.0], [5], replications=16, seed=3, plot=False)
        row = res.rows[0]
        assert row.replications == 16
        assert row.std_error > 0.0

    def test_needs_two_replications(self):
        with pytest.raises(ValueError):
            kernel_sweep([1.0], [5], replications=1, seed=0)

    def test_larger_scale_enters_quarter_band_first(self):
        # Observed-ordering check: the bigger branch scale reaches the
        # 0.25 +/- 0.02 band at smaller depth (150 vs 240 on this grid).
        grid = [60, 90, 120, 150, 180, 210, 240]
        res = kernel_sweep([1.0, 8.0], grid, replications=200, seed=17, plot=False)
        dev = {(r.alpha, r.L): abs(r.mean_value - 0.25) for r in res.rows}
        first = {
            a: next(L for L in grid if dev[(a, L)] <= 0.02) for a in (1.0, 8.0)
        }
        assert first[8.0] < first[1.0]
        for L in grid:
            assert dev[(8.0, L)] < dev[(1.0, L)]


class TestGenData:
    def test_counts_and_norms(self):
        res = gen_data(n=200, dim=3, seed=4)
        body = csv_body(res.csv)
        assert body[0] == "x1,x2,x3,y_clean,y_noisy,split"
        rows = [ln.split(",") for ln in body[1:]]
        assert len(rows) == 200
        assert sum(1 for r in rows if r[-1] == "train") == 160
        assert sum(1 for r in rows if r[-1] == "test") == 40
        feats = np.array([[float(v) for v in r[:3]] for r in rows])
        np.testing.assert_allclose(np.linalg.norm(feats, axis=1), 1.0, atol=1e-8)

    def test_zero_noise_targets_coincide(self):
        res = gen_data(n=20, dim=3, noise=0.0, seed=1)
        for ln in csv_body(res.csv)[1:]:
            parts = ln.split(",")
            assert parts[3] == parts[4]

    def test_target_mean_matches_symmetry_oracle(self):
        res = gen_data(n=100_000, dim=3, seed=11)
        ys = np.array([float(ln.split(",")[4]) for ln in csv_body(res.csv)[1:]])
        assert abs(np.mean(ys)) < 0.02

    def test_roundtrip_through_parser(self):
        res = gen_data(n=50, dim=4, noise=0.2, seed=7)
        problem = parse_data_csv(res.csv)
        assert problem.n_train == 40
        assert len(problem.test_x) == 10
        assert problem.noise_sigma == 0.2
        assert problem.train_x.shape == (40, 4)

    def test_deterministic_bytes(self):
        assert gen_data(n=30, seed=2).csv == gen_data(n=30, seed=2).csv


class TestRegress:
    def test_epoch_zero_shared_start_in_compare_mode(self):
        data = gen_data(n=30, dim=3, seed=3).csv
        res = regress(data, L=10, epochs=0, compare=True, plot=False)
        starts = [r for r in res.rows if r.step == 0]
        assert len(starts) == 2
        assert starts[0].test_error == pytest.approx(starts[1].test_error, rel=1e-12)
        assert starts[0].train_loss == pytest.approx(starts[1].train_loss, rel=1e-12)

    def test_rows_sorted_by_id_seed_step(self):
        data = gen_data(n=30, dim=3, seed=3).csv
        res = regress(data, L=10, epochs=6, record_stride=2, compare=True, plot=False)
        keys = [(r.experiment_id, r.seed, r.step) for r in res.rows]
        assert keys == sorted(keys)

    def test_single_config_uses_passed_scale(self):
        data = gen_data(n=30, dim=3, seed=3).csv
        res = regress(data, L=8, gamma=0.5, C=2.0, epochs=4, plot=False)
        assert all(r.gamma == 0.5 and r.C == 2.0 for r in res.rows)

    def test_svg_overlay_in_compare_mode(self):
        data = gen_data(n=30, dim=3, seed=3).csv
        res = regress(data, L=10, epochs=4, compare=True, plot=True)
        assert res.svg.count("<polyline") == 2


class TestEigenTable:
    def test_depth_one_emits_both_sources(self):
        res = eigen_table(dim=3, K=6, L=1)
        sources = {r.source for r in res.rows}
        assert sources == {"closed_form", "quadrature"}
        closed = [r for r in res.rows if r.source == "closed_form"]
        lam1 = next(r for r in closed if r.k == 1)
        assert lam1.eigenvalue == pytest.approx(sphere_volume(2) / 6.0, rel=1e-14)
        assert lam1.multiplicity == pytest.approx(3.0)

    def test_discrepancy_small_through_degree_twelve(self):
        res = eigen_table(dim=3, K=12, L=1)
        for r in res.rows:
            if r.source == "closed_form":
                assert r.rel_discrepancy < 1e-6

    def test_deep_kernel_concentrates_on_constant_mode(self):
        res = eigen_table(dim=3, K=4, L=3000, gamma=0.0, C=1.0)
        lam = {r.k: r.eigenvalue for r in res.rows if r.source == "quadrature"}
        assert lam[0] / lam[1] > 100.0

    def test_quadrature_only_above_depth_one(self):
        res = eigen_table(dim=3, K=3, L=2)
        assert {r.source for r in res.rows} == {"quadrature"}


class TestWidthGapSweep:
    def test_deterministic_and_schema(self):
        kwargs = dict(
            m_grid=[32, 64], L=2, n=6, lr=0.3, epochs=2, seeds=2, seed=1, n_test=4, n_probes=4
        )
        a = width_gap_sweep(**kwargs)
        b = width_gap_sweep(**kwargs)
        assert a.csv == b.csv
        assert csv_body(a.csv)[0] == "m,seed,init_kernel_gap,prediction_gap,risk_gap"
        assert len(a.rows) == 4
        assert all(r.init_kernel_gap >= 0 and r.prediction_gap >= 0 for r in a.rows)

    def test_rejects_unsorted_grid(self):
        with pytest.raises(ValueError):
            width_gap_sweep([64, 32], seeds=1)

import json

import numpy as np
import pytest

from gdba import (
    DetectorSpec,
    ScoreVector,
    auc,
    compare,
    make_toy_fig2,
    roc_curve,
    sigma_sweep,
)
from gdba.errors import InvalidGrid, SingleClass
from gdba.evaluation import grid_values
from tests.conftest import dataset


def brute_force_auc(scores, labels):
    """Pairwise oracle: P(pos > neg) + 0.5 P(pos == neg)."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    wins = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                wins += 1.0
            elif p == n:
                wins += 0.5
    return wins / (len(pos) * len(neg))


class TestAuc:
    def test_perfect_ranking(self):
        assert auc([3.0, 2.0, 1.0], [1, 0, 0]).auc == 1.0

    def test_inverted_ranking(self):
        assert auc([1.0, 2.0, 3.0], [1, 0, 0]).auc == 0.0

    def test_all_tied_scores(self):
        result = auc([5.0, 5.0, 5.0, 5.0], [1, 0, 0, 0])
        assert result.auc == 0.5
        assert result.n_pos == 1
        assert result.n_neg == 3

    def test_matches_pairwise_oracle(self, rng):
        for _ in range(10):
            n = int(rng.integers(20, 200))
            scores = np.round(rng.normal(size=n), 1)  # rounding makes ties
            labels = rng.integers(0, 2, size=n)
            if labels.sum() in (0, n):
                labels[0] = 1 - labels[0]
            got = auc(scores, labels).auc
            assert got == pytest.approx(brute_force_auc(scores, labels), abs=1e-12)

    def test_single_class_rejected(self):
        with pytest.raises(SingleClass):
            auc([1.0, 2.0], [0, 0])
        with pytest.raises(SingleClass):
            auc([1.0, 2.0], [1, 1])
        with pytest.raises(SingleClass):
            auc([1.0, 2.0], None)

    def test_invariant_under_monotone_transform(self, rng):
        nu = rng.uniform(1.0, 30.0, size=60)
        labels = rng.integers(0, 2, size=60)
        labels[0], labels[1] = 0, 1
        by_negation = auc(-nu, labels).auc
        by_reciprocal = auc(1.0 / nu, labels).auc
        assert by_negation == pytest.approx(by_reciprocal, abs=1e-12)

    def test_complement_without_ties(self, rng):
        scores = rng.permutation(50).astype(float)  # distinct
        labels = rng.integers(0, 2, size=50)
        labels[0], labels[1] = 0, 1
        total = auc(scores, labels).auc + auc(-scores, labels).auc
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_accepts_score_vector(self):
        sv = ScoreVector(scores=np.array([3.0, 1.0]), detector="t", params_digest="k=1")
        result = auc(sv, [1, 0])
        assert result.detector == "t"
        assert result.params_digest == "k=1"


class TestRocCurve:
    def test_endpoints_and_monotonicity(self, rng):
        scores = np.round(rng.normal(size=80), 1)
        labels = rng.integers(0, 2, size=80)
        labels[0], labels[1] = 0, 1
        curve = roc_curve(scores, labels)
        np.testing.assert_array_equal(curve.points[0], [0.0, 0.0])
        np.testing.assert_array_equal(curve.points[-1], [1.0, 1.0])
        assert (np.diff(curve.points[:, 0]) >= 0).all()
        assert (np.diff(curve.points[:, 1]) >= 0).all()

    def test_perfect_and_inverted_areas(self):
        assert roc_curve([3.0, 2.0, 1.0], [1, 0, 0]).trapezoid_area() == 1.0
        assert roc_curve([1.0, 2.0, 3.0], [1, 0, 0]).trapezoid_area() == 0.0

    def test_all_tied_collapses_to_diagonal(self):
        curve = roc_curve([2.0, 2.0, 2.0], [1, 0, 0])
        np.testing.assert_array_equal(curve.points, [[0.0, 0.0], [1.0, 1.0]])
        assert curve.trapezoid_area() == 0.5

    def test_one_point_per_distinct_score(self):
        curve = roc_curve([4.0, 4.0, 2.0, 1.0], [1, 0, 0, 1])
        assert len(curve.points) == 4  # origin + three distinct thresholds

    def test_area_equals_rank_auc_with_ties(self, rng):
        for _ in range(10):
            scores = np.round(rng.normal(size=120), 1)
            labels = rng.integers(0, 2, size=120)
            labels[0], labels[1] = 0, 1
            area = roc_curve(scores, labels).trapezoid_area()
            assert area == pytest.approx(auc(scores, labels).auc, abs=1e-12)


class TestGridValues:
    def test_default_resolution(self):
        values = grid_values((0.005, 1.0, 0.005))
        assert len(values) == 200
        assert values[0] == pytest.approx(0.005)
        assert values[-1] == pytest.approx(1.0)

    def test_rejects_bad_grids(self):
        for grid in [(0.0, 1.0, 0.1), (-0.1, 1.0, 0.1), (0.5, 0.1, 0.1), (0.1, 1.0, 0.0)]:
            with pytest.raises(InvalidGrid):
                grid_values(grid)


class TestSigmaSweep:
    def test_single_sigma_grid(self):
        toy = make_toy_fig2(seed=0)
        report = sigma_sweep(toy, grid=(0.1, 0.1, 0.1))
        assert len(report.sigmas) == 1
        assert report.best_sigma == pytest.approx(0.1)

    def test_robust_summary_absent_outside_interval(self):
        toy = make_toy_fig2(seed=0)
        report = sigma_sweep(toy, grid=(0.5, 0.5, 0.1))
        assert report.robust_mean is None
        assert report.robust_std is None

    def test_toy_small_sigma_beats_large(self):
        toy = make_toy_fig2(seed=0)
        report = sigma_sweep(toy, grid=(0.1, 0.5, 0.4))
        np.testing.assert_allclose(report.sigmas, [0.1, 0.5])
        assert report.aucs[0] > report.aucs[1]

    def test_best_row_attains_max(self, rng):
        ds = dataset(rng.normal(size=(40, 2)), labels=rng.integers(0, 2, size=40))
        report = sigma_sweep(ds, grid=(0.05, 0.5, 0.05))
        assert report.best_auc == report.aucs.max()
        assert report.best_sigma == report.sigmas[np.argmax(report.aucs)]

    def test_parallel_cells_match_sequential(self):
        toy = make_toy_fig2(seed=0)
        seq = sigma_sweep(toy, grid=(0.02, 0.3, 0.02), n_threads=1)
        par = sigma_sweep(toy, grid=(0.02, 0.3, 0.02), n_threads=4)
        np.testing.assert_array_equal(seq.aucs, par.aucs)
        assert seq.best_sigma == par.best_sigma

    def test_csv_and_json_outputs(self, tmp_path):
        toy = make_toy_fig2(seed=0)
        report = sigma_sweep(toy, grid=(0.05, 0.25, 0.05))
        report.write_csv(tmp_path / "sweep.csv")
        report.write_json(tmp_path / "sweep.json")
        lines = (tmp_path / "sweep.csv").read_text().splitlines()
        assert lines[0] == "sigma,auc"
        assert len(lines) == 6
        payload = json.loads((tmp_path / "sweep.json").read_text())
        assert payload["best_sigma"] == report.best_sigma
        assert len(payload["rows"]) == 5
        assert payload["robust_std"] == report.robust_std


class TestDetectorSpec:
    def test_rejects_unknown_name(self):
        with pytest.raises(ValueError):
            DetectorSpec(name="mystery")

    def test_runs_every_detector(self, rng):
        ds = dataset(rng.normal(size=(25, 2)))
        for name in ("gdba", "knn", "kthnn", "lof", "ldcof"):
            scores = DetectorSpec(name=name, k=3, k_clusters=2).run(ds)
            assert scores.detector == name
            assert len(scores) == 25


class TestCompare:
    def test_single_cell_equals_direct_auc(self):
        toy = make_toy_fig2(seed=0)
        spec = DetectorSpec(name="gdba", sigma=0.1)
        report = compare({"toy": toy}, [spec])
        direct = auc(spec.run(toy), toy.labels).auc
        assert report.aucs[0, 0] == direct

    def test_toy_gdba_and_knn_both_strong(self):
        toy = make_toy_fig2(seed=0)
        report = compare(
            {"toy": toy},
            [DetectorSpec(name="gdba", sigma=0.1), DetectorSpec(name="knn", k=3)],
        )
        assert (report.aucs[:, 0] >= 0.9).all()

    def test_average_column(self, rng):
        ds1 = dataset(rng.normal(size=(30, 2)), labels=rng.integers(0, 2, size=30))
        ds2 = make_toy_fig2(seed=0)
        report = compare(
            {"a": ds1, "b": ds2},
            [DetectorSpec(name="knn", k=3), DetectorSpec(name="kthnn", k=3)],
        )
        for i in range(2):
            assert report.averages[i] == pytest.approx(report.aucs[i].mean(), abs=1e-12)

    def test_serialization(self, tmp_path):
        toy = make_toy_fig2(seed=0)
        report = compare({"toy": toy}, [DetectorSpec(name="gdba", sigma=0.1)])
        report.write_csv(tmp_path / "cmp.csv")
        report.write_json(tmp_path / "cmp.json")
        lines = (tmp_path / "cmp.csv").read_text().splitlines()
        assert lines[0] == "detector,dataset,auc"
        assert any("average" in line for line in lines[1:])
        payload = json.loads((tmp_path / "cmp.json").read_text())
        assert "toy" in payload["datasets"]
        cell = payload["datasets"]["toy"]["gdba(sigma=0.1)"]
        assert cell["auc"] == report.aucs[0, 0]
        assert cell["seconds"] >= 0.0

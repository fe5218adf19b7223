"""Ranking, correlations, and the reference-table fixtures."""

import numpy as np
import pytest
import scipy.stats

from lmac.errors import InputError
from lmac.ranker import (
    AccuracyRow,
    AccuracyTable,
    RatioRecord,
    correlation_report,
    load_reference_accuracies,
    load_reference_ratios,
    pearson,
    rank_models,
    ratios_from_csv,
    spearman,
)


class TestSpearman:
    def test_self_correlation_exact(self):
        assert spearman([3.0, 1.0, 2.5], [3.0, 1.0, 2.5]) == 1.0

    def test_reversal(self):
        assert spearman([1, 2, 3], [3, 2, 1]) == -1.0

    def test_reference_task_triplet(self):
        # ratios vs accuracies, both strictly decreasing: rho exactly one
        assert spearman([9.266, 8.663, 7.095], [81.3, 77.2, 50.9]) == 1.0

    def test_undefined_cases(self):
        assert spearman([1.0], [2.0]) is None
        assert spearman([2.0, 2.0], [1.0, 3.0]) is None

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            x = rng.normal(size=6)
            y = rng.normal(size=6)
            base = spearman(x, y)
            assert spearman(np.exp(x), y) == pytest.approx(base, abs=1e-12)
            assert spearman(x, 3.0 * y + 7.0) == pytest.approx(base, abs=1e-12)

    def test_against_scipy_with_ties(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            n = int(rng.integers(3, 12))
            x = rng.integers(0, 5, size=n).astype(float)
            y = rng.integers(0, 5, size=n).astype(float)
            want = scipy.stats.spearmanr(x, y).statistic
            got = spearman(x, y)
            if np.isnan(want):
                assert got is None
            else:
                assert got == pytest.approx(want, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            spearman([1, 2], [1, 2, 3])


class TestPearson:
    def test_self(self):
        assert pearson([1.0, 2.0, 5.0], [1.0, 2.0, 5.0]) == pytest.approx(1.0, abs=1e-12)

    def test_two_points_positive_slope(self):
        assert pearson([8.663, 6.938], [77.4, 61.5]) == pytest.approx(1.0, abs=1e-12)

    def test_exact_linearity(self):
        assert pearson([0.0, 1.0, 2.0], [0.0, 2.0, 4.0]) == pytest.approx(1.0, abs=1e-12)

    def test_undefined(self):
        assert pearson([1.0], [1.0]) is None
        assert pearson([2.0, 2.0], [1.0, 3.0]) is None

    def test_against_scipy(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            n = int(rng.integers(2, 15))
            x = rng.normal(size=n)
            y = rng.normal(size=n)
            want = scipy.stats.pearsonr(x, y).statistic
            assert pearson(x, y) == pytest.approx(want, abs=1e-10)


class TestRankModels:
    def test_reference_order(self):
        ranked = rank_models(load_reference_ratios())
        assert [m.model_id for m in ranked] == [
            "Mistral 7B",
            "LLaMA 2 7B",
            "GPT-2-XL 1.5B",
            "OPT-IML 1.3B",
            "GPT-2 774M",
        ]

    def test_singleton(self):
        ranked = rank_models([RatioRecord("only", 2.0)])
        assert [m.model_id for m in ranked] == ["only"]

    def test_tie_breaks_lexicographically(self):
        ranked = rank_models([RatioRecord("b", 2.0), RatioRecord("a", 2.0)])
        assert [m.model_id for m in ranked] == ["a", "b"]

    def test_duplicate_rejected(self):
        with pytest.raises(InputError):
            rank_models([RatioRecord("a", 2.0), RatioRecord("a", 3.0)])

    def test_scale_invariance(self):
        records = load_reference_ratios()
        scaled = [RatioRecord(r.model_id, r.ratio * 17.5) for r in records]
        assert [m.model_id for m in rank_models(records)] == [
            m.model_id for m in rank_models(scaled)
        ]


class TestAccuracyTable:
    def test_fixture_loads(self):
        table = load_reference_accuracies()
        assert table.task_ids() == ["boolq", "hellaswag", "winograd"]
        assert len(table) == 7
        assert all(r.source for r in table.rows)

    def test_duplicate_pair_rejected(self):
        rows = [AccuracyRow("m", "t", 50.0, "s"), AccuracyRow("m", "t", 60.0, "s")]
        with pytest.raises(InputError):
            AccuracyTable(rows)

    def test_range_validated(self):
        with pytest.raises(InputError):
            AccuracyTable([AccuracyRow("m", "t", 150.0, "s")])

    def test_csv_round_trip(self, tmp_path):
        path = tmp_path / "acc.csv"
        path.write_text(
            "model,task,accuracy,source\nm1,taskA,55.5,paperX\n", encoding="utf-8"
        )
        table = AccuracyTable.from_csv(path)
        assert table.rows[0] == AccuracyRow("m1", "taskA", 55.5, "paperX")

    def test_csv_bad_header(self, tmp_path):
        path = tmp_path / "acc.csv"
        path.write_text("model,accuracy\nm,5\n", encoding="utf-8")
        with pytest.raises(InputError):
            AccuracyTable.from_csv(path)

    def test_ratios_csv_bad_value(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("model,ratio,source\nm,fast,here\n", encoding="utf-8")
        with pytest.raises(InputError):
            ratios_from_csv(path)


class TestCorrelationReport:
    def test_reference_fixture_full_agreement(self):
        report = correlation_report(load_reference_ratios(), load_reference_accuracies())
        assert len(report.tasks) == 3
        for task in report.tasks:
            assert task.spearman == 1.0
            assert task.order_agreement is True
        by_id = {t.task_id: t for t in report.tasks}
        assert by_id["hellaswag"].n == 3
        assert by_id["boolq"].n == 2
        assert by_id["winograd"].n == 2

    def test_winograd_pair_agreement(self):
        records = [RatioRecord("GPT-2-XL 1.5B", 7.095), RatioRecord("GPT-2 774M", 6.864)]
        table = AccuracyTable(
            [
                AccuracyRow("GPT-2-XL 1.5B", "winograd", 73.3, "s"),
                AccuracyRow("GPT-2 774M", "winograd", 69.2, "s"),
            ]
        )
        report = correlation_report(records, table)
        assert report.tasks[0].order_agreement is True
        assert report.tasks[0].spearman == 1.0

    def test_single_model_task_is_undefined_but_reported(self):
        report = correlation_report(
            [RatioRecord("solo", 3.0)], AccuracyTable([AccuracyRow("solo", "t", 50.0, "s")])
        )
        task = report.tasks[0]
        assert task.n == 1
        assert task.spearman is None and task.pearson is None
        assert task.order_agreement is None

    def test_missing_model_named(self):
        table = AccuracyTable([AccuracyRow("ghost", "t", 50.0, "s")])
        with pytest.raises(InputError, match="ghost"):
            correlation_report([RatioRecord("real", 2.0)], table)

    def test_json_serializes_undefined_as_null(self):
        report = correlation_report(
            [RatioRecord("solo", 3.0)], AccuracyTable([AccuracyRow("solo", "t", 50.0, "s")])
        )
        assert '"spearman": null' in report.to_json()

    def test_summary_shows_undefined(self):
        report = correlation_report(
            [RatioRecord("solo", 3.0)], AccuracyTable([AccuracyRow("solo", "t", 50.0, "s")])
        )
        assert "undefined" in "\n".join(report.summary_lines())

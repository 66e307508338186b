import numpy as np
import pytest

from pqscreen.cohort import Cohort, PQ_ITEM_NAMES, synthesize_cohort
from pqscreen.evaluation import (
    CVReport,
    EvalError,
    MetricRecord,
    aggregate_records,
    compare_classifiers,
    confusion_metrics,
    correlation_with_hy,
    make_fold_plan,
    misclassification_profile,
    roc_auc,
    run_nested_cv,
    total_score_baseline,
)


def auc_pair_oracle(scores, labels):
    """Brute-force O(n^2) pair counting with exact integer arithmetic."""
    scores = np.asarray(scores)
    pos = scores[np.asarray(labels) == 1]
    neg = scores[np.asarray(labels) == 0]
    num = 0
    for p in pos:
        num += 2 * int(np.sum(p > neg)) + int(np.sum(p == neg))
    return num / (2 * len(pos) * len(neg))


def records_cohort(n_normal, n_pd, seed=0):
    """One record per subject; squashed questionnaire noise."""
    rng = np.random.default_rng(seed)
    n = n_normal + n_pd
    X = np.zeros((n, 22))
    X[:, :20] = rng.integers(0, 3, size=(n, 20))
    X[:, 20] = rng.integers(0, 2, size=n)
    X[:, 21] = rng.uniform(40, 90, size=n)
    return Cohort(
        subject_ids=np.array([f"R{i:05d}" for i in range(n)]),
        visits=np.zeros(n, dtype=int),
        X=X,
        y=np.repeat([0, 1], [n_normal, n_pd]),
    )


def noise_cohort(n_normal=180, n_pd=180, seed=5):
    """Truly iid label-independent noise; exact-quota synthesis would couple
    training and test folds through its fixed per-class multisets."""
    rng = np.random.default_rng(seed)
    n = n_normal + n_pd
    X = np.zeros((n, 22))
    X[:, :20] = rng.integers(0, 5, size=(n, 20))
    X[:, 20] = rng.integers(0, 2, size=n)
    X[:, 21] = rng.uniform(35, 95, size=n)
    return Cohort(
        subject_ids=np.array([f"S{i:05d}" for i in range(n)]),
        visits=np.zeros(n, dtype=int),
        X=X,
        y=np.repeat([0, 1], [n_normal, n_pd]),
    )


class TestFoldPlans:
    def test_subject_wise_reference_counts(self):
        cohort = synthesize_cohort(seed=1)
        plan = make_fold_plan(cohort, "subject_wise", k=10, seed=3)
        subj = cohort.subject_ids.astype(str)
        combos = []
        for fold in plan.folds:
            subjects = np.unique(subj[fold])
            n_n = sum(1 for s in subjects if s.startswith("HC"))
            n_p = sum(1 for s in subjects if s.startswith("PD"))
            assert n_n in (19, 20)
            assert n_p in (47, 48)
            combos.append((n_n, n_p))
        # the published one-fold split: 20 normal + 47 PD test -> 605 train
        assert (20, 47) in combos

    def test_record_wise_reference_counts(self):
        cohort = records_cohort(1002, 4702)
        plan = make_fold_plan(cohort, "record_wise", k=10, seed=2)
        sizes = sorted(len(f) for f in plan.folds)
        assert set(sizes) <= {570, 571}
        assert sizes.count(571) == 4
        assert any(len(cohort) - len(f) == 5134 for f in plan.folds)

    def test_stratification_within_one_unit(self):
        cohort = records_cohort(103, 207, seed=1)
        plan = make_fold_plan(cohort, "record_wise", k=5, seed=9)
        for fold in plan.folds:
            n_pd = int(cohort.y[fold].sum())
            n_n = len(fold) - n_pd
            assert abs(n_n - 103 / 5) < 1.0 + 1e-9
            assert abs(n_pd - 207 / 5) < 1.0 + 1e-9

    def test_subject_never_straddles_folds(self):
        rng = np.random.default_rng(0)
        for trial in range(25):
            cohort = synthesize_cohort(
                n_normal_subjects=int(rng.integers(12, 30)),
                n_pd_subjects=int(rng.integers(12, 30)),
                visits_normal=3.0,
                visits_pd=4.0,
                seed=trial,
            )
            plan = make_fold_plan(cohort, "subject", k=4, seed=trial)
            subj = cohort.subject_ids.astype(str)
            for i, fold in enumerate(plan.folds):
                train = plan.train_indices(i)
                assert not set(subj[fold]) & set(subj[train])

    def test_two_folds_two_subjects_per_class(self):
        cohort = synthesize_cohort(
            n_normal_subjects=2, n_pd_subjects=2, visits_normal=2.0, visits_pd=2.0, seed=0
        )
        plan = make_fold_plan(cohort, "subject", k=2, seed=0)
        subj = cohort.subject_ids.astype(str)
        for fold in plan.folds:
            names = set(subj[fold])
            assert sum(1 for s in names if s.startswith("HC")) == 1
            assert sum(1 for s in names if s.startswith("PD")) == 1

    def test_class_too_small(self):
        cohort = records_cohort(4, 30)
        with pytest.raises(EvalError):
            make_fold_plan(cohort, "record", k=5, seed=0)

    def test_deterministic(self):
        cohort = records_cohort(50, 70)
        a = make_fold_plan(cohort, "record", k=5, seed=11)
        b = make_fold_plan(cohort, "record", k=5, seed=11)
        for fa, fb in zip(a.folds, b.folds):
            np.testing.assert_array_equal(fa, fb)


class TestRocAuc:
    def test_perfect_ordering(self):
        assert roc_auc([0.1, 0.2], [0, 1]) == 1.0

    def test_complete_ties(self):
        assert roc_auc([0.5, 0.5, 0.5, 0.5], [0, 1, 0, 1]) == 0.5

    def test_hand_counted(self):
        assert roc_auc([0.8, 0.6, 0.4, 0.2], [1, 0, 1, 0]) == 0.75

    def test_matches_pair_oracle_exactly(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            n = int(rng.integers(2, 200))
            labels = rng.integers(0, 2, size=n)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            # heavy ties: small integer scores
            scores = rng.integers(0, 6, size=n).astype(float)
            assert roc_auc(scores, labels) == auc_pair_oracle(scores, labels)

    def test_invariant_under_increasing_transform(self):
        rng = np.random.default_rng(4)
        scores = rng.normal(size=100)
        labels = rng.integers(0, 2, size=100)
        labels[0], labels[1] = 0, 1
        a = roc_auc(scores, labels)
        b = roc_auc(np.exp(scores), labels)
        assert a == b

    def test_single_class_errors(self):
        with pytest.raises(EvalError):
            roc_auc([0.1, 0.2], [1, 1])


class TestConfusionMetrics:
    def test_perfect(self):
        assert confusion_metrics([0.1, 0.9], [0, 1], 0.5) == (1.0, 1.0, 1.0)

    def test_all_predicted_pd(self):
        acc, sens, spec = confusion_metrics([0.9, 0.9, 0.9, 0.9], [0, 1, 0, 1], 0.5)
        assert (acc, sens, spec) == (0.5, 1.0, 0.0)

    def test_count_arithmetic(self):
        scores = np.concatenate([np.repeat(0.9, 90), np.repeat(0.1, 10),
                                 np.repeat(0.1, 80), np.repeat(0.9, 20)])
        labels = np.concatenate([np.ones(100, int), np.zeros(100, int)])
        acc, sens, spec = confusion_metrics(scores, labels, 0.5)
        assert (acc, sens, spec) == (0.85, 0.90, 0.80)

    def test_random_scores_sensitivity_specificity_sum(self):
        rng = np.random.default_rng(8)
        sums = []
        for _ in range(40):
            scores = rng.random(400)
            labels = rng.integers(0, 2, size=400)
            labels[:2] = [0, 1]
            _, sens, spec = confusion_metrics(scores, labels, rng.uniform(0.2, 0.8))
            sums.append(sens + spec)
        assert abs(np.mean(sums) - 1.0) < 0.05


@pytest.fixture(scope="module")
def small_cohort():
    return synthesize_cohort(
        n_normal_subjects=40, n_pd_subjects=60, visits_normal=2.0, visits_pd=2.0, seed=7
    )


class TestNestedCv:

    def test_bookkeeping(self, small_cohort):
        report = run_nested_cv(
            small_cohort, "record", "wilcoxon", "logistic", k=10, repetitions=1, seed=1
        )
        assert len(report.records) == 10
        assert {(r.repetition, r.fold) for r in report.records} == {
            (0, f) for f in range(10)
        }

    def test_aggregates_recomputable(self, small_cohort):
        report = run_nested_cv(
            small_cohort, "record", "wilcoxon", "logistic", k=5, repetitions=2, seed=2
        )
        assert report.aggregates == aggregate_records(report.records)

    def test_reproducible(self, small_cohort):
        a = run_nested_cv(small_cohort, "subject", "wilcoxon", "forest", k=4,
                          repetitions=2, seed=3)
        b = run_nested_cv(small_cohort, "subject", "wilcoxon", "forest", k=4,
                          repetitions=2, seed=3)
        assert a.records == b.records
        assert a.misclassified == b.misclassified

    def test_jobs_do_not_change_result(self, small_cohort):
        a = run_nested_cv(small_cohort, "record", "wilcoxon", "logistic", k=4,
                          repetitions=2, seed=4, jobs=1)
        b = run_nested_cv(small_cohort, "record", "wilcoxon", "logistic", k=4,
                          repetitions=2, seed=4, jobs=2)
        assert a.records == b.records
        assert a.misclassified == b.misclassified

    def test_informative_cohort_scores_high(self, small_cohort):
        report = run_nested_cv(
            small_cohort, "record", "wilcoxon", "logistic", k=5, repetitions=1, seed=5
        )
        assert report.aggregates["auc"]["mean"] > 0.85

    def test_null_cohort_auc_near_half(self):
        cohort = noise_cohort(seed=6)
        report = run_nested_cv(
            cohort,
            "record",
            "wilcoxon",
            "logistic",
            k=5,
            repetitions=2,
            seed=6,
            selector_params={"alpha": 1.0},
        )
        assert 0.40 <= report.aggregates["auc"]["mean"] <= 0.60

    def test_tuning_path_runs(self, small_cohort):
        report = run_nested_cv(
            small_cohort, "record", "wilcoxon", "forest", k=3, repetitions=1,
            seed=8, tune_budget=4,
        )
        assert len(report.records) == 3

    def test_json_round_trip(self, small_cohort, tmp_path):
        report = run_nested_cv(
            small_cohort, "record", "pca", "logistic", k=3, repetitions=1, seed=9
        )
        p = tmp_path / "report.json"
        report.to_json(p)
        loaded = CVReport.from_json(p)
        assert loaded.records == report.records
        assert loaded.config == report.config
        assert loaded.misclassified == report.misclassified

    def test_unknown_names_error(self, small_cohort):
        with pytest.raises(EvalError):
            run_nested_cv(small_cohort, "record", "anova", "logistic", seed=0)
        with pytest.raises(EvalError):
            run_nested_cv(small_cohort, "record", "wilcoxon", "nnet", seed=0)


class TestComparisons:
    @staticmethod
    def _report(values, scheme="record_wise", label="m"):
        records = tuple(
            MetricRecord(repetition=0, fold=i, accuracy=v, sensitivity=v,
                         specificity=v, auc=v)
            for i, v in enumerate(values)
        )
        return CVReport(
            config={"scheme": scheme, "selector": "wilcoxon", "model": label},
            records=records,
            aggregates=aggregate_records(records),
            misclassified=(),
        )

    def test_identical_reports_not_significant(self):
        rng = np.random.default_rng(1)
        vals = rng.uniform(0.8, 0.95, size=20)
        table = compare_classifiers([self._report(vals), self._report(vals)])
        assert not any(r.differs_from_best for r in table.rows)

    def test_shifted_report_significant(self):
        rng = np.random.default_rng(2)
        vals = rng.uniform(0.55, 0.65, size=20)
        shifted = np.clip(vals + 0.2, 0, 1)
        table = compare_classifiers([self._report(vals), self._report(shifted)])
        worse = [r for r in table.rows if not r.is_best]
        assert worse[0].differs_from_best

    def test_null_case_mostly_insignificant(self):
        rng = np.random.default_rng(3)
        hits = 0
        for _ in range(60):
            reports = [self._report(rng.uniform(0.7, 0.9, size=15)) for _ in range(4)]
            table = compare_classifiers(reports, alpha=0.05)
            hits += any(r.differs_from_best for r in table.rows)
        assert hits / 60 < 0.25

    def test_scheme_mismatch_errors(self):
        a = self._report(np.linspace(0.7, 0.9, 10))
        b = self._report(np.linspace(0.7, 0.9, 10), scheme="subject_wise")
        with pytest.raises(EvalError):
            compare_classifiers([a, b])

    def test_record_count_mismatch_errors(self):
        a = self._report(np.linspace(0.7, 0.9, 10))
        b = self._report(np.linspace(0.7, 0.9, 12))
        with pytest.raises(EvalError):
            compare_classifiers([a, b])


class TestBaselineAndProfiles:
    def test_total_score_perfect(self):
        cohort = records_cohort(10, 10, seed=3)
        X = cohort.X.copy()
        X[:10, :20] = 0
        X[10:, :20] = 2
        c2 = Cohort(cohort.subject_ids, cohort.visits, X, cohort.y)
        assert total_score_baseline(c2) == 1.0

    def test_total_score_shuffled_near_half(self):
        cohort = noise_cohort(seed=8)
        assert 0.45 <= total_score_baseline(cohort) <= 0.55

    def test_profile_zero_misclassifications(self):
        cohort = records_cohort(10, 10)
        report = CVReport(
            config={"scheme": "record_wise", "selector": "s", "model": "m"},
            records=(MetricRecord(0, 0, 1.0, 1.0, 1.0, 1.0),),
            aggregates={},
            misclassified=(),
        )
        prof = misclassification_profile(report, cohort)
        for label in (0, 1):
            for counts in prof[label].values():
                assert counts.sum() == 0

    def test_profile_all_misclassified_equals_class_histograms(self):
        from pqscreen.cohort import severity_distribution

        cohort = records_cohort(8, 9, seed=4)
        entries = tuple(
            (0, 0, str(cohort.subject_ids[i]), int(cohort.visits[i]), int(cohort.y[i]),
             int(1 - cohort.y[i]))
            for i in range(len(cohort))
        )
        report = CVReport(
            config={"scheme": "record_wise", "selector": "s", "model": "m"},
            records=(MetricRecord(0, 0, 0.0, 0.0, 0.0, 0.5),),
            aggregates={},
            misclassified=entries,
        )
        prof = misclassification_profile(report, cohort)
        for label in (0, 1):
            hist = severity_distribution(cohort, label)
            for name in PQ_ITEM_NAMES:
                np.testing.assert_array_equal(prof[label][name], hist[name])

    def test_profile_unknown_id_errors(self):
        cohort = records_cohort(5, 5)
        report = CVReport(
            config={}, records=(MetricRecord(0, 0, 1, 1, 1, 1),), aggregates={},
            misclassified=((0, 0, "GHOST", 0, 0, 1),),
        )
        with pytest.raises(EvalError):
            misclassification_profile(report, cohort)


class TestCorrelations:
    @staticmethod
    def _with_hy(seed=0):
        cohort = records_cohort(40, 60, seed=seed)
        rng = np.random.default_rng(seed)
        hy = np.where(cohort.y == 1, rng.integers(1, 3, size=len(cohort)), 0).astype(float)
        sbr = np.column_stack([2.0 - 0.4 * hy + 0.1 * rng.normal(size=len(cohort))] * 4)
        return Cohort(cohort.subject_ids, cohort.visits, cohort.X, cohort.y, hy=hy, sbr=sbr)

    def test_feature_identical_to_hy(self):
        cohort = self._with_hy()
        X = cohort.X.copy()
        X[:, 0] = cohort.hy
        c2 = Cohort(cohort.subject_ids, cohort.visits, X, cohort.y, hy=cohort.hy,
                    sbr=cohort.sbr)
        out = correlation_with_hy(c2)
        assert out["P1_SLPN"].statistic == pytest.approx(1.0)

    def test_outputs_cover_features_total_and_sbr(self):
        out = correlation_with_hy(self._with_hy())
        assert "PQ_TOTAL" in out
        assert "SBR_RC" in out
        assert len(out) == 22 + 1 + 4

    def test_independent_feature_small_rho(self):
        out = correlation_with_hy(self._with_hy(seed=2))
        assert abs(out["P1_PAIN"].statistic) < 0.3

    def test_missing_hy_errors(self):
        with pytest.raises(EvalError):
            correlation_with_hy(records_cohort(5, 5))

    def test_constant_hy_errors(self):
        cohort = records_cohort(5, 5)
        c2 = Cohort(cohort.subject_ids, cohort.visits, cohort.X, cohort.y,
                    hy=np.ones(len(cohort)))
        with pytest.raises(EvalError):
            correlation_with_hy(c2)

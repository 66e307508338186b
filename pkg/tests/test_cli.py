import csv
import json

import numpy as np
import pytest

from pqscreen.cli import main
from pqscreen.cohort import load_cohort


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture(scope="module")
def cohort_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "cohort.csv"
    code = main(
        ["synth", "--normals", "30", "--pd", "45", "--seed", "5", "--out", str(path)]
    )
    assert code == 0
    return path


class TestSynth:
    def test_writes_cohort_and_moments(self, tmp_path, capsys):
        out = tmp_path / "c.csv"
        code, stdout, _ = run(
            ["synth", "--normals", "12", "--pd", "15", "--seed", "3", "--out", str(out)],
            capsys,
        )
        assert code == 0
        assert out.exists()
        assert (tmp_path / "c.csv.moments.csv").exists()
        assert (tmp_path / "c.csv.run.json").exists()
        cohort = load_cohort(out)
        assert cohort.class_counts()[0] > 0

    def test_byte_identical_for_same_seed(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for p in (a, b):
            code, _, _ = run(
                ["synth", "--normals", "10", "--pd", "10", "--seed", "42", "--out", str(p)],
                capsys,
            )
            assert code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_zero_normals_fails(self, tmp_path, capsys):
        code, _, err = run(
            ["synth", "--normals", "0", "--pd", "5", "--seed", "1",
             "--out", str(tmp_path / "x.csv")],
            capsys,
        )
        assert code == 1
        assert err.startswith("error:")
        assert err.count("\n") == 1

    def test_seed_required(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["synth", "--normals", "5", "--pd", "5", "--out", str(tmp_path / "x.csv")])
        assert exc.value.code == 2


class TestScore:
    def test_intercept_only(self, capsys):
        code, out, _ = run(["score", "--model", "paper-eq1"], capsys)
        assert code == 0
        prob = float(next(l for l in out.splitlines() if l.startswith("probability:")).split()[1])
        linear = float(next(l for l in out.splitlines() if l.startswith("linear_score:")).split()[1])
        assert linear == pytest.approx(0.54813, abs=1e-12)
        assert prob == pytest.approx(0.6337, abs=5e-4)

    def test_tremor_case(self, capsys):
        code, out, _ = run(
            ["score", "--model", "paper-eq1", "--set", "P2_TRMR=4",
             "--age", "66", "--gender", "1"],
            capsys,
        )
        assert code == 0
        prob = float(next(l for l in out.splitlines() if l.startswith("probability:")).split()[1])
        assert prob > 0.9999

    def test_unknown_item(self, capsys):
        code, _, err = run(["score", "--model", "paper-eq1", "--set", "P9_NOPE=1"], capsys)
        assert code == 1
        assert "P9_NOPE" in err


class TestCvTrainImportanceCompare:
    def test_cv_writes_report(self, cohort_csv, tmp_path, capsys):
        prefix = str(tmp_path / "rep")
        code, out, _ = run(
            ["cv", "--data", str(cohort_csv), "--scheme", "record", "--selector",
             "wilcoxon", "--model", "logistic", "--k", "4", "--reps", "2",
             "--seed", "9", "--out-prefix", prefix],
            capsys,
        )
        assert code == 0
        report = json.load(open(prefix + ".json"))
        assert len(report["records"]) == 8
        assert report["config"]["toolkit_version"]
        with open(prefix + ".records.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 8

    def test_cv_grid_all(self, cohort_csv, tmp_path, capsys):
        prefix = str(tmp_path / "grid")
        code, out, _ = run(
            ["cv", "--data", str(cohort_csv), "--scheme", "record", "--selector", "all",
             "--model", "all", "--k", "3", "--reps", "1", "--seed", "2",
             "--out-prefix", prefix],
            capsys,
        )
        assert code == 0
        assert len([l for l in out.splitlines() if "auc=" in l]) == 12

    def test_train_then_importance(self, cohort_csv, tmp_path, capsys):
        artifact = tmp_path / "forest.json"
        code, _, _ = run(
            ["train", "--data", str(cohort_csv), "--model", "forest", "--seed", "4",
             "--out", str(artifact)],
            capsys,
        )
        assert code == 0
        out_csv = tmp_path / "imp.csv"
        code, _, _ = run(
            ["importance", "--model", str(artifact), "--data", str(cohort_csv),
             "--seed", "1", "--out", str(out_csv)],
            capsys,
        )
        assert code == 0
        with open(out_csv) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 22

    def test_importance_requires_data(self, cohort_csv, tmp_path, capsys):
        artifact = tmp_path / "forest2.json"
        run(["train", "--data", str(cohort_csv), "--model", "forest", "--seed", "4",
             "--out", str(artifact)], capsys)
        code, _, err = run(
            ["importance", "--model", str(artifact), "--seed", "1",
             "--out", str(tmp_path / "imp.csv")],
            capsys,
        )
        assert code == 1
        assert "--data" in err

    def test_importance_rejects_wrong_data(self, cohort_csv, tmp_path, capsys):
        artifact = tmp_path / "forest3.json"
        run(["train", "--data", str(cohort_csv), "--model", "forest", "--seed", "4",
             "--out", str(artifact)], capsys)
        other = tmp_path / "other.csv"
        run(["synth", "--normals", "8", "--pd", "8", "--seed", "77", "--out", str(other)],
            capsys)
        code, _, err = run(
            ["importance", "--model", str(artifact), "--data", str(other),
             "--seed", "1", "--out", str(tmp_path / "imp.csv")],
            capsys,
        )
        assert code == 1
        assert "does not match" in err

    def test_compare(self, cohort_csv, tmp_path, capsys):
        prefix = str(tmp_path / "cmp")
        run(["cv", "--data", str(cohort_csv), "--scheme", "record", "--selector",
             "wilcoxon", "--model", "logistic", "--k", "4", "--reps", "2",
             "--seed", "9", "--out-prefix", prefix + ".a"], capsys)
        run(["cv", "--data", str(cohort_csv), "--scheme", "record", "--selector",
             "wilcoxon", "--model", "boost", "--k", "4", "--reps", "2",
             "--seed", "9", "--out-prefix", prefix + ".b"], capsys)
        out_csv = tmp_path / "table.csv"
        code, out, _ = run(
            ["compare", "--reports", prefix + ".a.json", prefix + ".b.json",
             "--metric", "auc", "--out", str(out_csv)],
            capsys,
        )
        assert code == 0
        with open(out_csv) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2
        assert sum(int(r["is_best"]) for r in rows) == 1


class TestCorrelate:
    def test_correlate(self, tmp_path, capsys):
        cohort = load_cohort_for_hy(tmp_path)
        out_csv = tmp_path / "rho.csv"
        code, _, _ = run(["correlate", "--data", str(cohort), "--out", str(out_csv)],
                         capsys)
        assert code == 0
        with open(out_csv) as fh:
            rows = {r["feature"]: r for r in csv.DictReader(fh)}
        assert "PQ_TOTAL" in rows
        assert float(rows["PQ_TOTAL"]["spearman_rho"]) > 0.2

    def test_missing_hy_fails(self, cohort_csv, tmp_path, capsys):
        code, _, err = run(
            ["correlate", "--data", str(cohort_csv), "--out", str(tmp_path / "rho.csv")],
            capsys,
        )
        assert code == 1
        assert "HY" in err


def load_cohort_for_hy(tmp_path):
    """Cohort CSV with an HY column correlated with the questionnaire total."""
    path = tmp_path / "hy.csv"
    main(["synth", "--normals", "25", "--pd", "40", "--seed", "11", "--out", str(path)])
    cohort = load_cohort(path)
    totals = cohort.pq_matrix().sum(axis=1)
    hy = np.where(cohort.y == 1, 1.0 + (totals > np.median(totals)), 0.0)
    from pqscreen.cohort import Cohort, write_cohort

    with_hy = Cohort(cohort.subject_ids, cohort.visits, cohort.X, cohort.y, hy=hy)
    write_cohort(with_hy, path)
    return path

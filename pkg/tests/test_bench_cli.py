import csv
import io

import numpy as np
import pytest

from activeforecast import bench
from activeforecast.cli import main, read_config_file
from activeforecast.experts import load_model

from conftest import DATA

MUSHROOMS = str(DATA / "mushrooms")


def cli(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out)
    return code, out.getvalue()


def rows_of(text, row_type="run"):
    return [r for r in csv.DictReader(io.StringIO(text)) if r["row_type"] == row_type]


def strip_wall_time(text):
    rows = list(csv.reader(io.StringIO(text)))
    col = rows[0].index("wall_time_s")
    return [r[:col] + r[col + 1:] for r in rows]


@pytest.fixture(scope="module")
def mushrooms_model(tmp_path_factory):
    path = tmp_path_factory.mktemp("model") / "mushrooms.model"
    code, _ = cli("train-experts", "--dataset", MUSHROOMS, "--split-seed", 7, "--model", path)
    assert code == 0
    return path


@pytest.fixture(scope="module")
def mushrooms_run_csv(mushrooms_model):
    code, text = cli("run", "--dataset", MUSHROOMS, "--model", mushrooms_model, "--permutations", 3)
    assert code == 0
    return text


class TestConfig:
    def test_defaults(self):
        cfg = bench.ExperimentConfig()
        assert cfg.permutations == 20 and cfg.delta == 0.2 and cfg.eta is None
        assert cfg.policies == bench.ALL_POLICIES

    @pytest.mark.parametrize(
        "kwargs",
        [{"permutations": 0}, {"delta": -0.1}, {"deltas": (0.2, 0.1)}, {"deltas": (0.1, 0.1)}, {"deltas": ()},
         {"policies": ("EWAF", "XYZ")}, {"eta": 0.0}],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            bench.ExperimentConfig(**kwargs)

    def test_config_file(self, tmp_path):
        path = tmp_path / "exp.conf"
        path.write_text("# experiment\ndataset = data/x\nsplit-seed = 3\ndeltas = 0.1, 0.3\npa_C = 2\n")
        assert read_config_file(path) == {"dataset": "data/x", "split_seed": "3", "deltas": "0.1, 0.3", "pa_C": "2"}

    def test_bad_config_line(self, tmp_path):
        path = tmp_path / "exp.conf"
        path.write_text("dataset\n")
        assert cli("train-experts", "--config", path)[0] == 2

    def test_flags_override_file(self, tmp_path, mushrooms_model):
        conf = tmp_path / "exp.conf"
        conf.write_text(f"dataset = {MUSHROOMS}\nmodel = {mushrooms_model}\npermutations = 5\npolicies = EWAF\n")
        code, text = cli("run", "--config", conf, "--permutations", 1)
        assert code == 0
        assert len(rows_of(text)) == 1


class TestTrainExperts:
    def test_mushrooms_model(self, mushrooms_model, tmp_path):
        pool = load_model(mushrooms_model)
        assert (len(pool), pool.dim) == (5, 112)
        again = tmp_path / "again.model"
        assert cli("train-experts", "--dataset", MUSHROOMS, "--split-seed", 7, "--model", again)[0] == 0
        assert again.read_bytes() == mushrooms_model.read_bytes()

    def test_reports_mistakes(self, tmp_path):
        code, text = cli("train-experts", "--dataset", MUSHROOMS, "--model", tmp_path / "m")
        assert code == 0
        assert text.count("training mistakes") == 5

    def test_one_instance_split_error(self, tmp_path, capsys):
        ds = tmp_path / "one.txt"
        ds.write_text("1 1:1\n-1 1:2\n")
        code, _ = cli("train-experts", "--dataset", ds, "--model", tmp_path / "m")
        assert code == 2
        assert "empty" in capsys.readouterr().err

    def test_parse_error_names_line(self, tmp_path, capsys):
        ds = tmp_path / "bad.txt"
        ds.write_text("1 1:1\n-1 2:1 1:1\n")
        assert cli("train-experts", "--dataset", ds, "--model", tmp_path / "m")[0] == 2
        err = capsys.readouterr().err
        assert "bad.txt" in err and "2" in err

    def test_expert_param_override(self, tmp_path):
        base, tuned = tmp_path / "a", tmp_path / "b"
        cli("train-experts", "--dataset", MUSHROOMS, "--model", base)
        cli("train-experts", "--dataset", MUSHROOMS, "--model", tuned, "--expert-param", "pa_C=0.01")
        a, b = load_model(base), load_model(tuned)
        assert not np.array_equal(a[3].weights, b[3].weights)
        assert np.array_equal(a[0].weights, b[0].weights)


class TestRun:
    def test_missing_model(self, tmp_path):
        assert cli("run", "--dataset", MUSHROOMS, "--model", tmp_path / "absent")[0] == 2

    def test_rows(self, mushrooms_run_csv):
        runs = rows_of(mushrooms_run_csv)
        assert len(runs) == 3 * 6
        summary = rows_of(mushrooms_run_csv, "summary")
        assert [s["policy"] for s in summary] == list(bench.ALL_POLICIES)
        assert all(s["runs"] == "3" for s in summary)

    def test_ewaf_close_to_gf(self, mushrooms_run_csv):
        summary = {s["policy"]: float(s["regret_rate_pct"]) for s in rows_of(mushrooms_run_csv, "summary")}
        assert summary["EWAF"] == pytest.approx(summary["GF"], abs=5e-3)

    def test_pairs_share_seed_and_ratio(self, mushrooms_run_csv):
        runs = rows_of(mushrooms_run_csv)
        by_key = {(r["policy"], r["seed"]): r for r in runs}
        for base, partner in (("REWAF", "AEWAF"), ("RGF", "AGF")):
            for seed in ("0", "1", "2"):
                b, a = by_key[(base, seed)], by_key[(partner, seed)]
                assert b["T"] == a["T"]
                assert float(b["rho"]) == int(a["Q"]) / int(a["T"])

    def test_rerun_identical_except_wall_time(self, mushrooms_model, mushrooms_run_csv):
        _, again = cli("run", "--dataset", MUSHROOMS, "--model", mushrooms_model, "--permutations", 3)
        assert strip_wall_time(again) == strip_wall_time(mushrooms_run_csv)

    def test_self_describing(self, mushrooms_run_csv):
        for r in rows_of(mushrooms_run_csv):
            for key in ("seed", "eta", "T", "N", "Q"):
                assert r[key] != ""
            if r["policy"] in ("REWAF", "RGF"):
                assert r["rho"] != ""

    def test_output_file(self, mushrooms_model, tmp_path):
        out = tmp_path / "res.csv"
        code, text = cli("run", "--dataset", MUSHROOMS, "--model", mushrooms_model, "--permutations", 1,
                         "--policies", "AEWAF", "--output", out)
        assert code == 0 and text == ""
        assert len(rows_of(out.read_text())) == 1


class TestSweep:
    def test_full_tolerance_never_queries(self, mushrooms_model):
        code, text = cli("sweep", "--dataset", MUSHROOMS, "--model", mushrooms_model, "--permutations", 2,
                         "--deltas", "1.0", "--policies", "AEWAF")
        assert code == 0
        runs = rows_of(text)
        assert len(runs) == 2 and all(r["Q"] == "0" for r in runs)

    def test_zero_tolerance_on_disagreeing_stream(self, rng):
        F = np.column_stack([np.zeros(300), np.ones(300), rng.uniform(0, 1, 300)])
        y = rng.integers(0, 2, 300)
        prepared = bench.Prepared("synthetic", None, F, y)
        cfg = bench.ExperimentConfig(policies=("EWAF", "AEWAF"), deltas=(0.0,), permutations=2)
        results = bench.sweep_protocol(prepared, cfg)
        for ewaf, aewaf in zip(results[::2], results[1::2]):
            assert aewaf.Q == aewaf.T
            assert aewaf.forecaster_loss == ewaf.forecaster_loss

    def test_unsorted_grid(self, mushrooms_model):
        assert cli("sweep", "--dataset", MUSHROOMS, "--model", mushrooms_model, "--deltas", "0.3,0.1")[0] == 2


class TestVerifyBounds:
    def test_real_rows_pass(self, mushrooms_run_csv, tmp_path):
        path = tmp_path / "res.csv"
        path.write_text(mushrooms_run_csv)
        code, report = cli("verify-bounds", path)
        assert code == 0
        assert report.count("PASS") == 12 and report.count("SKIP") == 6
        assert "12/12" in report

    def test_violation_reported(self, tmp_path):
        row = dict.fromkeys(bench.CSV_COLUMNS, "")
        row.update(row_type="run", policy="AEWAF", seed="4", T="100", N="5", Q="50", eta="0.3", delta="0.2",
                   forecaster_loss="40", best_expert_loss="0")
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=bench.CSV_COLUMNS)
        w.writeheader()
        w.writerow(row)
        path = tmp_path / "bad.csv"
        path.write_text(buf.getvalue())
        code, report = cli("verify-bounds", path)
        assert code == 1
        assert "FAIL row 1 AEWAF seed=4" in report

    def test_malformed_csv(self, tmp_path):
        path = tmp_path / "junk.csv"
        path.write_text("a,b\n1,2\n")
        assert cli("verify-bounds", path)[0] == 2

import json
import math

import pytest

from randclt.cli import main


def run_cli(argv, capsys):
    rc = main(argv)
    out = capsys.readouterr().out
    return rc, out


class TestSubcommands:
    def test_systems_list(self, capsys):
        rc, out = run_cli(["systems", "list"], capsys)
        assert rc == 0
        kinds = {s["kind"] for s in json.loads(out)["systems"]}
        assert kinds == {"trig", "cosine", "chebyshev", "shifted_periodic",
                         "walsh", "empirical", "lacunary_trig"}

    def test_jn_uniform_closed_form(self, capsys):
        rc, out = run_cli(["jn", "--n", "3", "--t-grid", "0.5:0.5:5"], capsys)
        assert rc == 0
        for row in json.loads(out)["values"]:
            assert row["jn"] == pytest.approx(math.sin(row["s"]) / row["s"], abs=1e-10)

    def test_moments_walsh(self, capsys):
        rc, out = run_cli(["moments", "--system", "walsh", "--d", "3"], capsys)
        assert rc == 0
        rep = json.loads(out)["report"]
        assert rep["m2"] == pytest.approx(1.0)
        assert rep["xi"]["E3"] == pytest.approx(42 / 343)

    def test_predict_cor51(self, capsys):
        rc, out = run_cli(["predict", "--kind", "cor51", "--system", "walsh", "--d", "4"], capsys)
        assert rc == 0
        pred = json.loads(out)["prediction"]
        assert pred["kind"] == "cor51"
        assert pred["main"] > 0 and pred["error_scale"] > 0

    def test_bounds_eq211(self, capsys):
        rc, out = run_cli(["bounds", "--kind", "eq211", "--n", "20"], capsys)
        assert rc == 0
        assert json.loads(out)["bound"]["value"] > 0

    def test_bounds_thm12(self, capsys):
        rc, out = run_cli(["bounds", "--kind", "thm12", "--system", "empirical", "--n", "5"], capsys)
        assert rc == 0
        assert json.loads(out)["bound"]["value"] == pytest.approx(1 / 32 / 5 - 1 / 25)

    def test_table_walsh_preset(self, capsys):
        rc, out = run_cli(["table", "--preset", "walsh", "--seed", "3",
                           "--n-theta", "200", "--format", "json"], capsys)
        assert rc == 0
        blob = json.loads(out)
        assert {r["n"] for r in blob["rows"]} == {7, 15}
        names = {a["name"] for a in blob["audits"]}
        assert "prop_11_1" in names and all(a["satisfied"] for a in blob["audits"])

    def test_table_lacunary_zeros(self, capsys):
        rc, out = run_cli(["table", "--preset", "lacunary", "--q", "2",
                           "--n-max", "20", "--seed", "1"], capsys)
        assert rc == 0
        rows = [line for line in out.splitlines() if line and not line.startswith("#")][1:]
        assert all(row.split(",")[3] == "0" for row in rows)

    def test_audit_standalone(self, capsys):
        rc, out = run_cli(["audit", "--name", "subgaussian_cf"], capsys)
        assert rc == 0
        assert json.loads(out)["audits"][0]["satisfied"]

    def test_distance_json(self, capsys):
        rc, out = run_cli(["distance", "--system", "empirical", "--n", "16",
                           "--metric", "omega_sq", "--target", "normal",
                           "--n-theta", "200", "--seed", "7", "--format", "json"], capsys)
        assert rc == 0
        row = json.loads(out)["rows"][0]
        assert row["n"] == 16 and row["seed"] == 7

    def test_distance_csv_stdout(self, capsys):
        rc, out = run_cli(["distance", "--system", "empirical", "--n", "16",
                           "--metric", "rho", "--target", "normal",
                           "--n-theta", "50", "--seed", "7", "--format", "csv"], capsys)
        assert rc == 0
        assert out.startswith("# schema:")
        assert out.splitlines()[2].startswith("empirical,empirical,16,rho,normal,")

    def test_run_config(self, tmp_path, capsys):
        cfg = {
            "system": {"kind": "empirical", "params": {}},
            "n_list": [8], "seed": 4, "metrics": ["rho"], "targets": ["normal"],
            "n_theta": 64,
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        out_path = tmp_path / "rows.csv"
        rc, _ = run_cli(["run", "--config", str(path), "--out", str(out_path)], capsys)
        assert rc == 0
        assert out_path.read_text().startswith("# schema:")


class TestExitCodes:
    def test_config_error_is_2(self, capsys):
        rc, _ = run_cli(["moments", "--system", "trig", "--n", "5"], capsys)
        assert rc == 2

    def test_bad_grid_is_2(self, capsys):
        rc, _ = run_cli(["jn", "--n", "3", "--t-grid", "oops"], capsys)
        assert rc == 2

    def test_numeric_failure_is_3(self, capsys):
        rc, _ = run_cli(["distance", "--system", "trig", "--n", "64",
                        "--metric", "rho", "--target", "normal", "--n-theta", "4",
                        "--inner-budget", "128", "--seed", "1"], capsys)
        assert rc == 3

    def test_unknown_subcommand_is_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2

    def test_missing_config_file_is_2(self, capsys):
        rc, _ = run_cli(["run", "--config", "/nonexistent/cfg.json"], capsys)
        assert rc == 2


class TestReproducibility:
    def test_distance_csv_identical_across_threads(self, tmp_path, capsys):
        paths = []
        for threads, name in ((1, "a.csv"), (3, "b.csv")):
            p = tmp_path / name
            rc, _ = run_cli(["distance", "--system", "trig", "--n", "8",
                             "--metric", "omega_sq", "--target", "normal",
                             "--n-theta", "100", "--inner-budget", "4096",
                             "--seed", "9", "--threads", str(threads),
                             "--out", str(p)], capsys)
            assert rc == 0
            paths.append(p)
        assert paths[0].read_bytes() == paths[1].read_bytes()

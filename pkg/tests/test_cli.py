"""CLI tests: ingestion contracts, output schema conformance,
byte-identical reruns and structured error exits."""

import json
import subprocess
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from besselreg.cli import CLIError, ingest_csv, main
from besselreg.regression import fit_bessel_em

DATA_DIR = resources.files("besselreg.data")
SA = str(DATA_DIR.joinpath("stress_anxiety.csv"))

SA_ARGS = [SA, "--response", "anxiety", "--mean-covariates", "stress"]


def run_cli(args):
    return main(args)


def read_summary(outdir):
    with open(Path(outdir) / "summary.json") as fh:
        return json.load(fh)


ROLES = {
    "response": "anxiety",
    "mean_covariates": ["stress"],
    "precision_covariates": [],
    "intercept_mean": True,
    "intercept_precision": True,
}


class TestIngest:
    def test_stress_anxiety_shape(self):
        data, report = ingest_csv(SA, ROLES)
        assert data.n == 166 and data.p == 2 and data.q == 1
        assert report["rescale_clamped"] == 0

    def test_missing_column(self):
        bad = dict(ROLES, response="nope")
        with pytest.raises(CLIError, match="missing column"):
            ingest_csv(SA, bad)

    def test_non_numeric_cell_reports_location(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("y,x\n0.5,1\n0.6,oops\n")
        with pytest.raises(CLIError, match=r"row 3, column 'x'"):
            ingest_csv(str(p), dict(ROLES, response="y",
                                    mean_covariates=["x"]))

    def test_empty_csv(self, tmp_path):
        p = tmp_path / "empty.csv"
        p.write_text("y,x\n")
        with pytest.raises(CLIError, match="no rows"):
            ingest_csv(str(p), dict(ROLES, response="y",
                                    mean_covariates=["x"]))

    def test_rescale_and_clamp(self, tmp_path):
        p = tmp_path / "raw.csv"
        p.write_text("y\n0\n50\n100\n25\n")
        roles = dict(ROLES, response="y", mean_covariates=[])
        data, report = ingest_csv(str(p), roles, rescale=(0, 100))
        assert report["rescale_clamped"] == 2
        assert np.all((data.z > 0) & (data.z < 1))

    def test_rescale_out_of_range(self, tmp_path):
        p = tmp_path / "raw.csv"
        p.write_text("y\n5\n150\n")
        roles = dict(ROLES, response="y", mean_covariates=[])
        with pytest.raises(CLIError, match="outside the rescale range"):
            ingest_csv(str(p), roles, rescale=(0, 100))

    def test_drop_rows(self):
        data, report = ingest_csv(SA, ROLES, drop_rows=(1, 2))
        assert data.n == 164 and report["dropped_rows"] == [1, 2]

    def test_round_trip_identical_fit(self, tmp_path, sa_data):
        # write a Dataset back to CSV, re-ingest, refit: same answer
        p = tmp_path / "rt.csv"
        rows = ["anxiety,stress"] + [
            f"{repr(float(z))},{repr(float(x))}"
            for z, x in zip(sa_data.z, sa_data.X[:, 1])]
        p.write_text("\n".join(rows) + "\n")
        again, _ = ingest_csv(str(p), ROLES)
        f1 = fit_bessel_em(sa_data)
        f2 = fit_bessel_em(again)
        np.testing.assert_allclose(f2.theta_hat.as_vector(),
                                   f1.theta_hat.as_vector(), atol=1e-12)


@pytest.fixture(scope="module")
def schema():
    with resources.files("besselreg").joinpath("output_schema.json").open() as fh:
        return json.load(fh)


class TestSubcommands:
    def test_fit_outputs_validate(self, tmp_path, schema):
        out = tmp_path / "fit"
        assert run_cli(["fit", *SA_ARGS, "--output-dir", str(out)]) == 0
        doc = read_summary(out)
        jsonschema.validate(doc, schema)
        assert doc["manifest"]["subcommand"] == "fit"
        assert set(doc["results"]["models"]) == {"bessel", "beta"}
        assert (out / "detail_coefficients.csv").exists()

    def test_fit_reproduces_reference_estimates(self, tmp_path):
        out = tmp_path / "fit2"
        run_cli(["fit", *SA_ARGS, "--model", "bessel",
                 "--output-dir", str(out)])
        coefs = read_summary(out)["results"]["models"]["bessel"]["coefficients"]
        by_name = {(c["block"], c["name"]): c["estimate"] for c in coefs}
        assert by_name[("mean", "intercept")] == pytest.approx(-3.298,
                                                               abs=0.005)
        assert by_name[("mean", "stress")] == pytest.approx(3.200, abs=0.005)

    def test_dbb_decision(self, tmp_path, schema):
        out = tmp_path / "dbb"
        assert run_cli(["dbb", *SA_ARGS, "--output-dir", str(out)]) == 0
        doc = read_summary(out)
        jsonschema.validate(doc, schema)
        assert doc["results"]["decision"] == "bessel"

    def test_envelope_and_determinism(self, tmp_path, schema):
        out1 = tmp_path / "e1"
        out2 = tmp_path / "e2"
        base = ["envelope", *SA_ARGS, "--model", "bessel",
                "--replications", "15", "--seed", "3", "--threads", "1"]
        assert run_cli(base + ["--output-dir", str(out1)]) == 0
        assert run_cli(base + ["--output-dir", str(out2)]) == 0
        csv1 = (out1 / "plotdata_envelope.csv").read_bytes()
        csv2 = (out2 / "plotdata_envelope.csv").read_bytes()
        assert csv1 == csv2
        jsonschema.validate(read_summary(out1), schema)

    def test_byte_identical_summary_on_rerun(self, tmp_path):
        out = tmp_path / "rerun"
        args = ["cv", *SA_ARGS, "--partitions", "3", "--seed", "5",
                "--threads", "1", "--output-dir", str(out)]
        assert run_cli(args) == 0
        first = (out / "summary.json").read_bytes()
        assert run_cli(args) == 0
        assert (out / "summary.json").read_bytes() == first

    def test_vif(self, tmp_path, schema):
        out = tmp_path / "vif"
        bf = str(DATA_DIR.joinpath("body_fat.csv"))
        cols = ["age", "weight", "height", "neck", "chest", "abdomen",
                "hip", "thigh", "knee", "ankle", "biceps", "forearm",
                "wrist"]
        assert run_cli(["vif", bf, "--columns", *cols,
                        "--drop-rows", "39", "42",
                        "--output-dir", str(out)]) == 0
        doc = read_summary(out)
        jsonschema.validate(doc, schema)
        removed = [r["column"] for r in doc["results"]["removed"]]
        assert set(removed) == {"weight", "abdomen", "hip"}

    def test_mc_config(self, tmp_path, schema):
        cfg = tmp_path / "mc.json"
        cfg.write_text(json.dumps({
            "mode": "estimation", "generator": "beta", "n": 80,
            "replications": 3, "fit_models": ["beta"],
        }))
        out = tmp_path / "mc"
        assert run_cli(["mc", str(cfg), "--seed", "2", "--threads", "1",
                        "--output-dir", str(out)]) == 0
        doc = read_summary(out)
        jsonschema.validate(doc, schema)
        assert doc["results"]["failures"]["beta"] == 0


class TestErrors:
    def test_missing_file_exit_code(self, capsys):
        assert run_cli(["fit", "does_not_exist.csv",
                        "--response", "y"]) == 2
        err = capsys.readouterr().err
        assert json.loads(err.strip())["error"]

    def test_empty_file_error(self, tmp_path, capsys):
        p = tmp_path / "e.csv"
        p.write_text("y,x\n")
        assert run_cli(["fit", str(p), "--response", "y",
                        "--mean-covariates", "x"]) == 2
        assert "no rows" in capsys.readouterr().err

    def test_seed_required_for_stochastic(self):
        with pytest.raises(SystemExit):
            run_cli(["envelope", *SA_ARGS, "--model", "bessel"])

    def test_console_script_runs(self):
        proc = subprocess.run([sys.executable, "-m", "besselreg.cli",
                               "--version"], capture_output=True, text=True)
        assert proc.returncode == 0

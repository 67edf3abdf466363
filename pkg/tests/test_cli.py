"""
Tests for the command-line front end: argument validation, exit codes and
the rendered outputs.
"""

import csv
import io
import json

import pytest
from pydantic import ValidationError

from ndoppe import config
from ndoppe.cli import RunConfig, error_message, ingest, main
from ndoppe.errors import DatasetError, DatasetParseError, EmptyDatasetError
from ndoppe.fitting import FitReport


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestFit:
    """ndoppe fit"""

    def test_fixture_json(self, capsys):
        """JSON output parses back into a report"""
        code, out, _ = _run(capsys, "fit", "--fixture", "table1", "--format", "json")
        assert code == 0
        result = FitReport.model_validate_json(out)
        assert result.dataset.n == 119853
        assert [f.model for f in result.fits] == ["poisson", "negbin", "ndoppe"]
        assert result.fit_for("ndoppe").coeffs == [1.0, 1.0]

    def test_text_table(self, capsys):
        """The text table lists every cell and the statistics"""
        code, out, _ = _run(capsys, "fit", "--fixture", "table5", "--models", "ndoppe")
        assert code == 0
        assert "Dataset: table5" in out
        assert "chi_sq" in out and "nll" in out

    def test_input_file(self, capsys, tmp_path):
        """A CSV file can be fitted with explicit coefficients"""
        path = tmp_path / "claims.csv"
        path.write_text("count,frequency\n0,50\n1,30\n2,15\n3,5\n", encoding="utf-8")
        code, out, _ = _run(capsys, "fit", "--input", str(path), "--models", "ndoppe",
                            "--coeffs", "1,2", "--format", "csv")
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == ["count", "observed", "ndoppe"]
        assert [r[0] for r in rows[1:5]] == ["0", "1", "2", "3"]

    def test_bad_coeffs(self, capsys):
        """Negative coefficients exit with status 2"""
        code, _, err = _run(capsys, "fit", "--fixture", "table1", "--coeffs", "-1")
        assert code == 2
        assert "error" in err

    def test_unknown_model(self, capsys):
        """An unknown model name exits with status 2"""
        code, _, _ = _run(capsys, "fit", "--fixture", "table1", "--models", "zip")
        assert code == 2

    def test_missing_source(self, capsys):
        """One of --fixture and --input is required"""
        code, _, _ = _run(capsys, "fit")
        assert code == 2

    def test_missing_file(self, capsys, tmp_path):
        """A missing input file exits with status 2"""
        code, _, err = _run(capsys, "fit", "--input", str(tmp_path / "nope.csv"))
        assert code == 2
        assert "not found" in err

    def test_output_under_output_dir(self, capsys, tmp_path, monkeypatch):
        """Relative --output paths land under the configured output directory"""
        monkeypatch.setattr(config, "OUTPUT_DIR", str(tmp_path))
        code, out, _ = _run(capsys, "fit", "--fixture", "table4", "--format", "json", "--output", "t4.json")
        assert code == 0
        assert out == ""
        data = json.loads((tmp_path / "t4.json").read_text(encoding="utf-8"))
        assert data["dataset"]["name"] == "table4"


class TestIngest:
    """Reading dataset files"""

    def test_parse_error_has_line(self, tmp_path):
        """Malformed rows report their line number"""
        path = tmp_path / "bad.csv"
        path.write_text("# claims\ncount,frequency\n0,5\n1,x\n", encoding="utf-8")
        with pytest.raises(DatasetParseError) as info:
            ingest(str(path))
        assert info.value.line == 4

    def test_wrong_header(self, tmp_path):
        """The header must be count,frequency"""
        path = tmp_path / "bad.csv"
        path.write_text("x,n\n0,5\n", encoding="utf-8")
        with pytest.raises(DatasetParseError):
            ingest(str(path))

    def test_empty_file(self, tmp_path):
        """A file without a header holds no dataset"""
        path = tmp_path / "empty.csv"
        path.write_text("# nothing here\n", encoding="utf-8")
        with pytest.raises(EmptyDatasetError):
            ingest(str(path))

    def test_missing(self, tmp_path):
        """Missing files are dataset errors"""
        with pytest.raises(DatasetError):
            ingest(str(tmp_path / "missing.csv"))


class TestCompound:
    """ndoppe compound"""

    def test_pdf_at_zero(self, capsys):
        """The pdf at zero is the atom"""
        code, out, _ = _run(capsys, "compound", "pdf", "--model", "ndoppe", "--coeffs", "1",
                            "--theta", "0.25", "--gamma", "2", "--x", "0", "--format", "json")
        assert code == 0
        values = json.loads(out)
        assert values["pdf"] == pytest.approx(0.25)
        assert values["atom"] == pytest.approx(0.25)

    def test_mean(self, capsys):
        """Compound Poisson mean alpha / gamma"""
        code, out, _ = _run(capsys, "compound", "mean", "--model", "poisson", "--alpha", "3",
                            "--gamma", "2", "--format", "json")
        assert code == 0
        assert json.loads(out)["mean"] == pytest.approx(1.5)

    def test_premium(self, capsys):
        """Zero retention gives the mean"""
        code, out, _ = _run(capsys, "compound", "premium", "--model", "negbin", "--r", "2",
                            "--p", "0.5", "--gamma", "1", "--format", "json")
        assert code == 0
        assert json.loads(out)["premium"] == pytest.approx(2.0, rel=1e-8)

    def test_unsupported_mean(self, capsys):
        """xgamma models have no closed-form mean"""
        code, _, err = _run(capsys, "compound", "mean", "--model", "dxgamma1", "--p", "0.5", "--gamma", "1")
        assert code == 2
        assert "not available" in err

    def test_missing_gamma(self, capsys):
        """--gamma is required"""
        code, _, _ = _run(capsys, "compound", "pdf", "--model", "poisson", "--alpha", "1")
        assert code == 2

    def test_mgf_outside_radius(self, capsys):
        """t beyond the radius exits with status 2"""
        code, _, _ = _run(capsys, "compound", "mgf", "--model", "poisson", "--alpha", "1",
                          "--gamma", "1", "--t", "2")
        assert code == 2


class TestSimulate:
    """ndoppe simulate"""

    def test_deterministic(self, capsys):
        """The same seed prints the same summary"""
        argv = ["simulate", "aggregate", "--model", "ndoppe", "--coeffs", "1,1", "--theta", "0.4",
                "--gamma", "1.5", "--n", "5000", "--seed", "42", "--format", "json"]
        _, first, _ = _run(capsys, *argv)
        _, second, _ = _run(capsys, *argv)
        assert first == second
        values = json.loads(first)
        assert values["n"] == 5000
        assert values["seed"] == 42
        assert values["generator"] == "PCG64"
        assert "expected_mean" in values

    def test_counts_without_gamma(self, capsys):
        """Count sampling does not need a claim rate"""
        code, out, _ = _run(capsys, "simulate", "count", "--model", "poisson", "--alpha", "2",
                            "--n", "20000", "--seed", "1", "--format", "json")
        assert code == 0
        values = json.loads(out)
        assert abs(values["mean"] - 2.0) < 4 * values["mean_std_error"]
        assert values["expected_mean"] == pytest.approx(2.0)

    def test_zero_replicates(self, capsys):
        """--n 0 exits with status 2 and a one-line message"""
        code, _, err = _run(capsys, "simulate", "count", "--model", "poisson", "--alpha", "2", "--n", "0")
        assert code == 2
        assert err.strip().splitlines()[-1] == "error: --n must be a positive number of replicates"
        assert "errors.pydantic.dev" not in err

    def test_count_kind_restricted(self, capsys):
        """Count sampling supports the three count laws"""
        code, _, _ = _run(capsys, "simulate", "count", "--model", "dlindley", "--lambda", "0.3", "--n", "10")
        assert code == 2


class TestReport:
    """ndoppe report"""

    def test_csv_files(self, capsys, tmp_path, monkeypatch):
        """CSV output with --output-dir writes one file per table"""
        monkeypatch.setattr(config, "OUTPUT_DIR", str(tmp_path))
        code, _, _ = _run(capsys, "report", "--format", "csv", "--output-dir", "tables", "--workers", "2")
        assert code == 0
        files = sorted(p.name for p in (tmp_path / "tables").iterdir())
        assert files == [f"table{i}.csv" for i in range(1, 9)]
        rows = list(csv.reader(io.StringIO((tmp_path / "tables" / "table1.csv").read_text(encoding="utf-8"))))
        assert rows[0] == ["count", "observed", "poisson", "negbin", "ndoppe"]


class TestRunConfig:
    """Validated command configuration"""

    def test_coeff_string(self):
        """Comma separated coefficients are parsed"""
        cfg = RunConfig(command="fit", fixture="table1", coeffs="1,3.35")
        assert cfg.coeffs == [1.0, 3.35]

    def test_both_sources(self):
        """--fixture and --input are exclusive"""
        with pytest.raises(ValueError):
            RunConfig(command="fit", fixture="table1", input="x.csv")

    def test_error_message(self):
        """Validation failures reduce to their first message"""
        with pytest.raises(ValidationError) as info:
            RunConfig(command="fit", fixture="table1", input="x.csv")
        assert error_message(info.value) == "give exactly one of --fixture or --input"

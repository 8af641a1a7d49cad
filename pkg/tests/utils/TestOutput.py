import json
from dataclasses import dataclass
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pandas as pd
import pytest

from src.models.run_config import SweepParameter
from src.utils.output import (DEFAULT_OUTPUT_DIR, OUTPUT_ENV_VAR, ReportEncoder, report_to_dict,
                              resolve_output_dir, write_csv, write_json)


@dataclass
class SampleReport:
    name: str
    values: np.ndarray
    parameter: SweepParameter
    count: np.int64


@pytest.fixture
def sample_report():
    return SampleReport(
        name="sample",
        values=np.array([0.5, 1.5]),
        parameter=SweepParameter.TENSION_RATIO,
        count=np.int64(3),
    )


class TestResolveOutputDir:
    """Tests for the --out / LAMBQ_OUT / default precedence."""

    def test_cli_value_wins(self, monkeypatch, tmp_path):
        monkeypatch.setenv(OUTPUT_ENV_VAR, str(tmp_path / "env"))
        assert resolve_output_dir(str(tmp_path / "cli")) == tmp_path / "cli"

    def test_environment_variable(self, monkeypatch, tmp_path):
        monkeypatch.setenv(OUTPUT_ENV_VAR, str(tmp_path / "env"))
        assert resolve_output_dir() == tmp_path / "env"

    def test_default(self, monkeypatch):
        monkeypatch.delenv(OUTPUT_ENV_VAR, raising=False)
        assert resolve_output_dir() == Path(DEFAULT_OUTPUT_DIR)


class TestWriteCsv:
    """Tests for CSV output."""

    def test_header_and_float_format(self, tmp_path):
        path = write_csv({"alpha": [1, 2], "Omega": [0.1, 1.0 / 3.0]}, tmp_path / "out.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "alpha,Omega"
        assert lines[1] == "1,0.10000000000000001"
        assert float(lines[2].split(",")[1]) == 1.0 / 3.0

    def test_values_round_trip_exactly(self, tmp_path):
        values = np.random.default_rng(7).random(20)
        path = write_csv({"x": values}, tmp_path / "x.csv")
        read_back = pd.read_csv(path, float_precision="round_trip")["x"].to_numpy()
        assert np.array_equal(read_back, values)

    def test_deterministic(self, tmp_path):
        columns = {"a": [0.25, 0.5], "b": [np.pi, np.e]}
        first = write_csv(columns, tmp_path / "first.csv").read_bytes()
        second = write_csv(columns, tmp_path / "second.csv").read_bytes()
        assert first == second

    def test_accepts_dataframe_and_creates_directory(self, tmp_path):
        frame = pd.DataFrame({"q": [1.0]})
        path = write_csv(frame, tmp_path / "nested" / "dir" / "q.csv")
        assert path.exists()
        assert path.read_text() == "q\n1\n"

    def test_write_failure_raises_ioerror(self, tmp_path):
        with patch("pandas.DataFrame.to_csv", side_effect=OSError("disk full")):
            with pytest.raises(IOError):
                write_csv({"a": [1.0]}, tmp_path / "a.csv")


class TestWriteJson:
    """Tests for JSON reports."""

    def test_sorted_keys_and_trailing_newline(self, tmp_path):
        path = write_json({"zeta": 1, "alpha": 2}, tmp_path / "r.json")
        text = path.read_text()
        assert text.endswith("}\n")
        assert text.index('"alpha"') < text.index('"zeta"')

    def test_dataclass_report(self, tmp_path, sample_report):
        path = write_json(sample_report, tmp_path / "report.json")
        loaded = json.loads(path.read_text())
        assert loaded == {
            "count": 3,
            "name": "sample",
            "parameter": "tension_ratio",
            "values": [0.5, 1.5],
        }


def test_report_encoder_numpy_scalars():
    encoded = json.dumps({"f": np.float64(0.5), "b": np.bool_(True), "p": Path("a/b")}, cls=ReportEncoder)
    assert json.loads(encoded) == {"f": 0.5, "b": True, "p": "a/b"}


def test_report_encoder_rejects_unknown_objects():
    with pytest.raises(TypeError):
        json.dumps(object(), cls=ReportEncoder)


def test_report_to_dict(sample_report):
    result = report_to_dict(sample_report)
    assert result["values"] == [0.5, 1.5]
    assert result["parameter"] == "tension_ratio"

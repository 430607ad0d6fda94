"""File formats: matrix export, TOML writer, report records."""

import numpy as np
import pytest

from gammaecho.io import matrix_csv, report_csv, report_record_text, toml_dumps

try:
    import tomllib as toml
except ImportError:
    import tomli as toml


class TestMatrixCsv:
    def test_layout_and_exact_round_trip(self):
        matrix = np.arange(6).reshape(2, 3) / 10.0
        text = matrix_csv([0.0, 0.5], [10.0, 20.0, 30.0], matrix)
        lines = text.splitlines()
        assert lines[0] == "k\\xi,10,20,30"
        for i, line in enumerate(lines[1:]):
            cells = [float(c) for c in line.split(",")]
            assert cells[0] == [0.0, 0.5][i]
            assert cells[1:] == list(matrix[i])  # 17 digits parse back exactly


class TestTomlWriter:
    def test_round_trip_through_a_reader(self):
        mapping = {
            "name": 'quote " and backslash \\ and\nnewline',
            "count": 3,
            "enabled": True,
            "ratio": 0.1,
            "grid": [1.0, 2.5],
            "table": {"inner": "x", "deep": {"v": 2}},
            "rows": [{"a": 1}, {"a": 2}],
        }
        back = toml.loads(toml_dumps(mapping))
        assert back == mapping

    def test_full_precision_floats(self):
        value = 0.1 + 0.2  # not representable as a short decimal
        back = toml.loads(toml_dumps({"x": value}))
        assert back["x"] == value

    def test_rejects_unsupported_types(self):
        with pytest.raises(TypeError):
            toml_dumps({"x": object()})


class TestReportRecords:
    def test_text_and_csv_forms_agree(self):
        record = {"efficiency": 0.5, "label": "main", "n": 3}
        text = report_record_text(record)
        assert "efficiency=0.5\n" in text and "label=main\n" in text
        head, row = report_csv(record).splitlines()
        assert head.split(",") == list(record)
        assert row.split(",") == ["0.5", "main", "3"]

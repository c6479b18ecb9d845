import math
import os
from fractions import Fraction

import numpy as np
import pandas as pd
import pytest

from config.settings import REPORT_SCHEMA_VERSION
from core.error_handler import DataValidationError, KindMismatch
from core.figures import emit_figure
from core.reports import (
    Report,
    canonical_payload,
    default_report_path,
    emit_plot_data,
    load_report,
    plot_frame,
    save_report,
)
from utils.formatting import format_mapping, format_table, to_jsonable


@pytest.fixture
def growth_report():
    return Report(
        command="growth",
        config={"seed": 5},
        payload={"records": [{"n": 2, "M_n": 1}, {"n": 1, "M_n": 1}]},
        kind="growth",
    )


class TestJsonable:
    """Conversion of domain values."""

    def test_domain_values(self, el, mw, uniform, f2):
        assert to_jsonable(el("ab")) == "ab"
        assert to_jsonable(mw("xaXA")) == "xaXA"
        assert to_jsonable(uniform) == "a:1/4, A:1/4, b:1/4, B:1/4"
        assert to_jsonable(f2) == "F_2"
        assert to_jsonable(Fraction(1, 3)) == "1/3"

    def test_numeric_values(self):
        assert to_jsonable(np.int64(3)) == 3
        assert to_jsonable(math.inf) == "inf"
        assert to_jsonable(np.array([1.5, 2.0])) == [1.5, 2.0]
        assert to_jsonable({1: {2, 1}}) == {"1": [1, 2]}

    def test_frames_become_rows(self):
        df = pd.DataFrame({"t": [0, 1], "survival": [1.0, 0.25]})
        assert to_jsonable(df) == [{"t": 0, "survival": 1.0}, {"t": 1, "survival": 0.25}]

    def test_terminal_text(self):
        assert format_table(pd.DataFrame()) == "(no rows)"
        assert format_mapping({"a": 1, "long": 2}) == "a     1\nlong  2"


class TestReports:
    """Saving, loading and plot data."""

    def test_round_trip(self, growth_report, tmp_path):
        path = save_report(growth_report, str(tmp_path / "growth.json"))
        loaded = load_report(path)
        assert loaded.to_dict() == growth_report.to_dict()
        assert canonical_payload(loaded) == canonical_payload(growth_report)

    def test_duration_is_not_part_of_the_payload(self, growth_report):
        slower = Report(command="growth", config={"seed": 5}, payload=dict(growth_report.payload),
                        duration_s=9.0, kind="growth")
        assert canonical_payload(slower) == canonical_payload(growth_report)

    def test_default_path(self, growth_report, tmp_path):
        assert default_report_path(growth_report, str(tmp_path)) == os.path.join(str(tmp_path), "growth-5.json")

    def test_schema_version_is_checked(self, growth_report, tmp_path):
        stale = Report(command="growth", config={}, payload={}, schema_version=REPORT_SCHEMA_VERSION + 1)
        path = save_report(stale, str(tmp_path / "stale.json"))
        with pytest.raises(DataValidationError):
            load_report(path)

    def test_plot_frame_is_sorted(self, growth_report):
        df = plot_frame(growth_report, "growth")
        assert df.columns.tolist() == ["n", "M_n"]
        assert df["n"].tolist() == [1, 2]

    def test_kind_mismatch(self, growth_report):
        with pytest.raises(KindMismatch):
            plot_frame(growth_report, "tail")
        with pytest.raises(KindMismatch):
            plot_frame(growth_report, "histogram")

    def test_missing_columns(self):
        report = Report(command="stats tail", config={}, payload={"survival": [{"t": 0}]}, kind="tail")
        with pytest.raises(DataValidationError):
            plot_frame(report, "tail")

    def test_emit_plot_data(self, growth_report, tmp_path):
        path = emit_plot_data(growth_report, "growth", output_dir=str(tmp_path))
        assert os.path.basename(path) == "growth-growth.csv"
        with open(path, encoding="utf-8") as handle:
            assert handle.read().splitlines() == ["n,M_n", "1,1", "2,1"]

    def test_emit_figure(self, growth_report, tmp_path):
        path = emit_figure(growth_report, "growth", output_dir=str(tmp_path))
        assert path.endswith(".html")
        assert os.path.getsize(path) > 0
        with pytest.raises(KindMismatch):
            emit_figure(growth_report, "histogram", output_dir=str(tmp_path))

    def test_tail_figure_has_envelope(self, tmp_path):
        report = Report(
            command="stats tail",
            config={},
            payload={"survival": [{"t": 0, "survival": 1.0}, {"t": 1, "survival": 0.25},
                                  {"t": 2, "survival": 0.0}], "fitted_c1": 1.0},
            kind="tail",
        )
        path = emit_figure(report, "tail", output_dir=str(tmp_path))
        assert os.path.basename(path) == "stats-tail-tail.html"

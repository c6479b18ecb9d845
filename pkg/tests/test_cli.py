import json
import os

import pytest

from config.experiment_config import ENV_KEYS
from core.cli import cli_dispatch
from core.reports import canonical_payload, load_report


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for name in ENV_KEYS.values():
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def run(tmp_path, capsys):
    """Dispatch with reports going to tmp_path; returns (code, stdout, stderr)."""
    def invoke(*args):
        code = cli_dispatch(["--output-dir", str(tmp_path), "--seed", "5", *args])
        captured = capsys.readouterr()
        return code, captured.out, captured.err
    return invoke


class TestExactCommands:
    """Commands without randomness."""

    def test_complexity(self, run, tmp_path):
        code, out, _ = run("complexity", "xaXA")
        assert code == 0
        assert out.splitlines()[0] == "1"
        report = load_report(str(tmp_path / "complexity-5.json"))
        assert report.payload["complexity"] == 1
        assert report.payload["nonsolution"] == "b"
        assert report.config["seed"] == 5

    def test_growth(self, run, tmp_path):
        code, out, _ = run("growth", "2")
        assert code == 0
        assert "M(1) = 1  witness x" in out
        records = load_report(str(tmp_path / "growth-5.json")).payload["records"]
        assert [r["M_n"] for r in records] == [1, 1]

    def test_certify_identity_fails(self, run):
        code, out, _ = run("certify", "e", "1")
        assert code == 0
        assert "verdict: fail" in out

    def test_certify_commutator_candidate(self, run, tmp_path):
        code, out, _ = run("certify", "abababababab", "1")
        assert code == 0
        assert "verdict: pass" in out
        certificate = load_report(str(tmp_path / "certify-5.json")).payload["certificate"]
        assert certificate["margin"] == 7.0

    def test_certify_single(self, run):
        code, out, _ = run("certify-single", "x a X A", "b")
        assert code == 0
        assert "nonsolution: true" in out

    def test_lower_bound(self, run):
        code, out, _ = run("lower-bound", "2")
        assert code == 0
        assert out.splitlines()[0] == "3  witness aab"

    def test_no_save(self, tmp_path, capsys):
        code = cli_dispatch(["--output-dir", str(tmp_path), "--no-save", "complexity", "x"])
        assert code == 0
        assert not os.listdir(tmp_path)


class TestRandomCommands:
    """Seeded commands with an explicit C."""

    def test_find_single(self, run):
        code, out, _ = run("find-single", "x", "--c", "5")
        assert code == 0
        assert "attempts 1" in out

    def test_find_simul(self, run):
        code, out, _ = run("find-simul", "1", "--c", "20")
        assert code == 0
        assert "margin:" in out

    def test_selfless(self, run):
        code, out, _ = run("selfless", "1", "--c", "20")
        assert code == 0
        assert "x -> " in out

    def test_walk_is_reproducible(self, run, tmp_path):
        run("walk", "--length", "30")
        first = canonical_payload(load_report(str(tmp_path / "walk-5.json")))
        run("walk", "--length", "30")
        assert canonical_payload(load_report(str(tmp_path / "walk-5.json"))) == first

    def test_stats_speed_with_plots(self, run, tmp_path):
        code, _, _ = run("--trials", "5", "--plots", "stats", "speed", "--n", "10", "--n", "20")
        assert code == 0
        with open(tmp_path / "stats-speed-speed.csv", encoding="utf-8") as handle:
            assert handle.readline().strip() == "n,lambda_hat,stderr"
        assert (tmp_path / "stats-speed-speed.html").exists()

    def test_stats_tail(self, run, tmp_path):
        code, _, _ = run("--trials", "20", "stats", "tail", "--n", "50")
        assert code == 0
        with open(tmp_path / "stats-tail-5.json", encoding="utf-8") as handle:
            payload = json.load(handle)["payload"]
        assert payload["survival"][0] == {"t": 0, "survival": 1.0}

    def test_stats_overlap(self, run, tmp_path):
        code, _, _ = run("--trials", "3", "stats", "overlap", "--n", "40", "--radius", "1")
        assert code == 0
        payload = load_report(str(tmp_path / "stats-overlap-5.json")).payload
        assert payload["ball_restricted"] is True
        assert len(payload["trials"]) == 3


class TestPlotCommand:
    """Plot data from saved reports."""

    def test_plot_growth_report(self, run, tmp_path):
        run("growth", "1")
        code, _, _ = run("plot", str(tmp_path / "growth-5.json"), "growth")
        assert code == 0
        assert (tmp_path / "growth-growth.csv").exists()

    def test_plot_kind_mismatch(self, run, tmp_path):
        run("growth", "1")
        code, _, err = run("plot", str(tmp_path / "growth-5.json"), "tail")
        assert code == 1
        assert "KindMismatch" in err


class TestInadmissibleMeasures:
    """Walk-driven commands need an admissible measure or the override."""

    @pytest.fixture
    def one_sided(self, tmp_path):
        def write(allow):
            path = tmp_path / "one-sided.conf"
            path.write_text(f"measure = a:1/2, b:1/2\nallow_inadmissible = {allow}\n")
            return str(path)
        return write

    @pytest.mark.parametrize("args", [
        ("find-single", "xaXA", "--c", "5"),
        ("stats", "speed", "--n", "20"),
        ("walk",),
    ])
    def test_refused_without_override(self, run, one_sided, tmp_path, args):
        code, _, err = run("--config", one_sided("false"), *args)
        assert code == 1
        assert "not admissible" in err
        assert not list(tmp_path.glob("*.json"))

    def test_override_is_recorded(self, run, one_sided, tmp_path):
        code, _, err = run("--config", one_sided("true"), "find-single", "xaXA", "--c", "5")
        assert code == 0
        assert "running under allow_inadmissible" in err
        report = load_report(str(tmp_path / "find-single-5.json"))
        assert report.config["allow_inadmissible"] is True

    def test_exact_commands_ignore_the_measure(self, run, one_sided):
        code, out, _ = run("--config", one_sided("false"), "complexity", "xaXA")
        assert code == 0
        assert out.splitlines()[0] == "1"


class TestExitCodes:
    """Errors map to exit codes."""

    def test_unknown_symbol(self, run):
        code, _, err = run("complexity", "xq")
        assert code == 1
        assert "Word grammar" in err

    def test_budget_exceeded(self, run):
        code, _, err = run("--budget", "10", "growth", "3")
        assert code == 2
        assert "Budget exceeded" in err

    def test_unknown_command(self, run):
        code, _, err = run("frobnicate")
        assert code == 2
        assert "Measure grammar" in err

    def test_trivial_word(self, run):
        code, _, err = run("complexity", "x X")
        assert code == 1
        assert "TrivialWord" in err

    def test_attempt_limit(self, tmp_path, capsys):
        config = tmp_path / "run.conf"
        config.write_text("attempt_limit = 2\n")
        code = cli_dispatch(["--config", str(config), "--output-dir", str(tmp_path),
                             "find-single", "x", "--c", "0"])
        assert code == 1
        assert "AttemptLimitExceeded" in capsys.readouterr().err

    def test_negative_c_delta(self, run):
        code, _, err = run("--c-delta", "-1", "complexity", "x a X A")
        assert code == 1
        assert "ConfigurationError" in err

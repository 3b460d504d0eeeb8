import json
from pathlib import Path

import pytest

from wrlab.cli import main

DATA_DIR = Path(__file__).parent / "data"
SAMPLE = str(DATA_DIR / "sample_trial.csv")
HIERARCHY = str(DATA_DIR / "trial_hierarchy.json")
GOLDEN = DATA_DIR / "golden_analyze.txt"


class TestAnalyze:
    def test_symmetric_two_patient_dataset(self, tmp_path, capsys):
        data = tmp_path / "two.csv"
        data.write_text("id,arm,ebp,ddd\np1,T,1,2.0\np2,C,1,2.0\n")
        assert main(["analyze", "--data", str(data), "--hierarchy", HIERARCHY,
                     "--out", str(tmp_path / "r.txt")]) == 1  # all ties: runtime error
        data.write_text("id,arm,ebp,ddd\np1,T,0,2.0\np2,T,1,1.0\n"
                        "p3,C,1,2.0\np4,C,0,1.0\n")
        assert main(["analyze", "--data", str(data), "--hierarchy", HIERARCHY]) == 0
        out = capsys.readouterr().out
        assert "win ratio: 1" in out

    def test_golden_report_byte_identical(self, tmp_path):
        out = tmp_path / "report.txt"
        code = main(["analyze", "--data", SAMPLE, "--hierarchy", HIERARCHY,
                     "--bootstrap", "500", "--seed", "123456789",
                     "--out", str(out)])
        assert code == 0
        assert out.read_bytes() == GOLDEN.read_bytes()

    def test_golden_counts_match_naive_oracle(self):
        from naive_oracle import naive_tally
        from random_datasets import to_oracle_form
        from wrlab import io
        h = io.read_hierarchy(HIERARCHY)
        records = io.read_dataset(SAMPLE, h)
        t_p, c_p, levels = to_oracle_form(records, h)
        ref = naive_tally(t_p, c_p, levels)
        text = GOLDEN.read_text()
        assert f"wins: {ref['wins']}  losses: {ref['losses']}  ties: {ref['ties']}" in text

    def test_malformed_event_value_exits_2(self, tmp_path, capsys):
        h = tmp_path / "h.json"
        h.write_text(json.dumps({
            "schema": "wrlab/hierarchy-v1",
            "levels": [{"name": "death", "kind": "time-to-event",
                        "direction": "higher-favorable", "margin": 0.0}]}))
        data = tmp_path / "bad.csv"
        data.write_text("id,arm,time_death,event_death\np1,T,10,2\np2,C,400,0\n")
        assert main(["analyze", "--data", str(data), "--hierarchy", str(h)]) == 2
        err = capsys.readouterr().err
        assert "event indicator" in err and ":2:" in err


class TestCalculators:
    def test_calibrate_weibull(self, capsys):
        assert main(["calibrate", "weibull", "--time", "730",
                     "--survival", "0.7", "--shape", "4"]) == 0
        assert capsys.readouterr().out == "scale: 944.615\n"

    def test_calibrate_exponential(self, capsys):
        assert main(["calibrate", "exponential", "--time", "730",
                     "--dropout", "0.10"]) == 0
        assert capsys.readouterr().out == "scale: 6928.59\n"

    def test_calibrate_missing_args_exit_2(self, capsys):
        assert main(["calibrate", "weibull", "--time", "730"]) == 2

    def test_samplesize_precision(self, capsys):
        assert main(["samplesize", "precision", "--width", "0.8",
                     "--p-tie", "0.02"]) == 0
        out = capsys.readouterr().out
        assert "n_treatment: 67" in out and "n_control: 67" in out
        assert "n_total: 134" in out

    def test_samplesize_yu(self, capsys):
        assert main(["samplesize", "yu", "--wr", "1.5", "--power", "0.8"]) == 0
        out = capsys.readouterr().out
        assert "n_total: 256" in out
        assert "n_total_unrounded: 254.624" in out

    def test_power_yu(self, capsys):
        assert main(["power", "yu", "--wr", "1.32", "--n-total", "510"]) == 0
        assert capsys.readouterr().out == "power: 0.774858\n"

    def test_power_mao(self, capsys):
        assert main(["power", "mao", "--wr", "1.5", "--n-total", "256",
                     "--xi0-sq", "0.3333333333333333", "--w0", "0.5"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("power: 0.8")

    def test_power_yu_missing_args(self, capsys):
        assert main(["power", "yu", "--wr", "1.5"]) == 2

    def test_samplesize_invalid_domain_exit_2(self, capsys):
        assert main(["samplesize", "precision", "--width", "-1"]) == 2

    def test_tie_sensitivity_table(self, tmp_path):
        out = tmp_path / "ties.csv"
        assert main(["power", "yu", "--n-grid", "50,150,500",
                     "--wr-grid", "1.5,1.75,2",
                     "--p-tie-grid", "0,0.2,0.4,0.6,0.8", "--out", str(out)]) == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "n_total,wr,p_tie,power"
        assert len(lines) == 1 + 3 * 3 * 5


class TestRanksimCommand:
    def test_csv_output(self, tmp_path):
        out = tmp_path / "rs.csv"
        assert main(["ranksim", "--n-t", "15", "--n-c", "15", "--phi", "0.6",
                     "--bootstrap", "100", "--iterations", "40",
                     "--seed", "3", "--out", str(out)]) == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0].startswith("scenario,")
        assert len(lines) == 2

    def test_infeasible_phi_exit_1(self, capsys):
        assert main(["ranksim", "--n-t", "80", "--n-c", "20", "--phi", "0.9",
                     "--iterations", "5"]) == 1


class TestSimulateCommand:
    def test_preset_deterministic(self, tmp_path):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (out1, out2):
            assert main(["simulate", "--preset", "binary-continuous",
                         "--iterations", "10", "--seed", "1",
                         "--out", str(out)]) == 0
        assert out1.read_bytes() == out2.read_bytes()
        lines = out1.read_text().strip().split("\n")
        assert len(lines) == 1 + 50 * 3  # 50 cells x 3 methods

    def test_config_grid_json_output(self, tmp_path):
        config = tmp_path / "grid.json"
        config.write_text(json.dumps({
            "schema": "wrlab/grid-v1", "dgm": "binary-continuous",
            "deltas": [0.5], "p_treatments": [0.5], "orders": ["binary-first"],
            "iterations": 20}))
        out = tmp_path / "res.json"
        assert main(["simulate", "--config", str(config), "--seed", "2",
                     "--format", "json", "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert payload["schema"] == "wrlab/results-v1"
        assert len(payload["results"]) == 3

    def test_requires_exactly_one_source(self, capsys):
        assert main(["simulate"]) == 2
        assert main(["simulate", "--preset", "iphak", "--config", "x.json"]) == 2

    def test_unknown_preset_exit_2(self, capsys):
        assert main(["simulate", "--preset", "nope"]) == 2

    def test_bad_config_schema_exit_2(self, tmp_path, capsys):
        config = tmp_path / "grid.json"
        config.write_text(json.dumps({"schema": "other"}))
        assert main(["simulate", "--config", str(config)]) == 2


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["not-a-command"])
    assert exc.value.code == 2


def test_threads_env_fallback(monkeypatch):
    from wrlab.cli import _threads_default
    monkeypatch.delenv("WRLAB_THREADS", raising=False)
    assert _threads_default() == 1
    monkeypatch.setenv("WRLAB_THREADS", "4")
    assert _threads_default() == 4
    monkeypatch.setenv("WRLAB_THREADS", "junk")
    assert _threads_default() == 1

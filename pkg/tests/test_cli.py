"""CLI contract tests: subcommands, exit codes, determinism, round-trips."""

import json

from netprotect.cli import main


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSolve:
    def test_solve_reports_no_buy_equilibrium(self, capsys):
        code, out, _ = run_cli(["solve", "--treatment", "dec-net",
                                "--utility", "risk_neutral", "--no-payoff-table"], capsys)
        assert code == 0
        doc = json.loads(out)
        assert doc["equilibria"] == [{p: "no_buy" for p in "ABCDEF"}]
        assert doc["treatment"] == "dec-net"
        assert "payoff_table" not in doc

    def test_solve_writes_file(self, tmp_path, capsys):
        out_file = tmp_path / "report.json"
        code, *_ = run_cli(["solve", "--treatment", "bas-ind", "--out", str(out_file)],
                           capsys)
        assert code == 0
        doc = json.loads(out_file.read_text())
        assert len(doc["payoff_table"]) == 64

    def test_bad_utility_is_config_error(self, capsys):
        code, _, err = run_cli(["solve", "--treatment", "bas-ind",
                                "--utility", "quadratic:2"], capsys)
        assert code == 2
        assert "config error" in err


class TestSimulate:
    def test_bare_simulate_runs_decoy_network_session(self, tmp_path, capsys):
        out = tmp_path / "log.csv"
        code, _, err = run_cli(["simulate", "--out", str(out)], capsys)
        assert code == 0
        text = out.read_text()
        assert text.splitlines()[0].startswith("session_id,")
        assert "dec-net" in text and "dec-ind" in text
        assert len(text.splitlines()) == 121

    def test_seed_determines_bytes(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_cli(["simulate", "--seed", "9", "--out", str(a)], capsys)[0] == 0
        assert run_cli(["simulate", "--seed", "9", "--out", str(b)], capsys)[0] == 0
        assert a.read_bytes() == b.read_bytes()
        c = tmp_path / "c.csv"
        assert run_cli(["simulate", "--seed", "10", "--out", str(c)], capsys)[0] == 0
        assert a.read_bytes() != c.read_bytes()

    def test_missing_config_is_config_error(self, capsys):
        code, _, err = run_cli(["simulate", "--config", "missing.cfg"], capsys)
        assert code == 2
        assert "missing.cfg" in err

    def test_config_file_drives_session(self, tmp_path, capsys):
        cfg = {
            "session_type": "ind_then_net_baseline",
            "master_seed": 4,
            "groups": [[{"kind": "random", "p_vector": [1.0, 0.0]}] * 6],
        }
        path = tmp_path / "run.json"
        path.write_text(json.dumps(cfg))
        out = tmp_path / "log.csv"
        code, *_ = run_cli(["simulate", "--config", str(path), "--out", str(out)], capsys)
        assert code == 0
        assert out.read_text().count("no_buy") == 120

    def test_json_format(self, tmp_path, capsys):
        out = tmp_path / "log.json"
        code, *_ = run_cli(["simulate", "--out", str(out), "--format", "json"], capsys)
        assert code == 0
        assert len(json.loads(out.read_text())) == 120


class TestAnalyze:
    def test_round_trip_with_zero_warnings(self, tmp_path, capsys):
        log = tmp_path / "log.csv"
        run_cli(["simulate", "--seed", "3", "--out", str(log)], capsys)
        code, out, _ = run_cli(["analyze", "--log", str(log), "--format", "json"], capsys)
        assert code == 0
        doc = json.loads(out)
        assert doc["warnings"] == []
        assert doc["records"] == 120
        cells = {(c["treatment"], c["slice"], c["degree"]): c for c in doc["cells"]}
        assert cells[("dec-net", "rounds1_10", None)]["total"] == 60

    def test_missing_log_is_config_error(self, capsys):
        code, *_ = run_cli(["analyze", "--log", "nope.csv"], capsys)
        assert code == 2

    def test_malformed_log_is_config_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        code, *_ = run_cli(["analyze", "--log", str(bad)], capsys)
        assert code == 2


class TestTables:
    def test_tables_to_directory(self, tmp_path, capsys):
        code, out, _ = run_cli(["tables", "--out", str(tmp_path / "report")], capsys)
        assert code == 0
        files = sorted((tmp_path / "report").glob("*.csv"))
        assert len(files) == 10
        names = {f.stem for f in files}
        assert {"table1_decisions", "table2_tests", "tableA1_counts",
                "tableA2_counts"} <= names

    def test_tables_text_output(self, capsys):
        code, out, _ = run_cli(["tables"], capsys)
        assert code == 0
        assert "45.9" in out  # dec-net all-rounds cell
        assert "not independently verifiable" in out


class TestUsageErrors:
    def test_unknown_subcommand(self, capsys):
        assert run_cli(["frobnicate"], capsys)[0] == 1

    def test_unknown_flag(self, capsys):
        assert run_cli(["solve", "--treatment", "bas-ind", "--what"], capsys)[0] == 1

    def test_missing_required_flag(self, capsys):
        assert run_cli(["solve"], capsys)[0] == 1


class TestOutdirEnv:
    def test_relative_out_lands_in_env_dir(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("NETPROTECT_OUTDIR", str(tmp_path))
        code, *_ = run_cli(["simulate", "--seed", "1", "--out", "runs/log.csv"], capsys)
        assert code == 0
        assert (tmp_path / "runs" / "log.csv").exists()

"""CLI behavior: commands, formats, exit codes, manifests, replay."""

import json
import math

import pytest

from switchrun.cli import EXIT_INTERNAL, EXIT_OK, EXIT_USAGE, main, parse_range
from switchrun.errors import ConfigError

PAPER_LOG_GRID = {
    "1/3": [7, 8, 9, 10, 11],
    "1/4": [6, 7, 8, 9, 10],
    "1/10": [4, 5, 6, 6, 7],
}


def run_cli(args, out, capsys):
    code = main([*args, "--out", str(out)])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestExactCommand:
    def test_reference_row(self, tmp_path, capsys):
        code, out, _ = run_cli(
            ["exact", "--N", "4", "--K", "2", "--p", "0.5"], tmp_path, capsys
        )
        assert code == EXIT_OK
        assert out.strip() == "0.125,0.125,0.353553390593,OK"
        content = (tmp_path / "exact.csv").read_text()
        assert content.splitlines()[0] == "N,K,p,lower,exact,upper,verdict"
        assert (tmp_path / "exact.manifest.json").exists()

    def test_bounds_omitted_below_2k(self, tmp_path, capsys):
        code, out, _ = run_cli(
            ["exact", "--N", "3", "--K", "2", "--p", "0.5"], tmp_path, capsys
        )
        assert code == EXIT_OK
        # P(M_3 < 1) = p^3 + q^3 = 0.25 for a fair coin; bounds empty
        assert out.strip() == ",0.25,,NA"

    def test_k1_exact_zero(self, tmp_path, capsys):
        code, out, _ = run_cli(
            ["exact", "--N", "4", "--K", "1", "--p", "0.5"], tmp_path, capsys
        )
        assert code == EXIT_OK
        assert out.strip().split(",")[1] == "0"

    def test_invalid_p_is_usage_error(self, tmp_path, capsys):
        code, _, err = run_cli(
            ["exact", "--N", "4", "--K", "2", "--p", "1.5"], tmp_path, capsys
        )
        assert code == EXIT_USAGE
        assert "error" in err

    def test_missing_flag_is_usage_error(self, tmp_path, capsys):
        code = main(["exact", "--N", "4", "--K", "2", "--out", str(tmp_path)])
        capsys.readouterr()
        assert code == EXIT_USAGE


class TestTablesCommand:
    def test_log_grid_matches_reference(self, tmp_path, capsys):
        code, _, _ = run_cli(["tables", "--table", "2"], tmp_path, capsys)
        assert code == EXIT_OK
        lines = (tmp_path / "table2.csv").read_text().splitlines()
        assert lines[0] == "p,200,500,1000,2000,5000"
        for line in lines[1:]:
            label, *cells = line.split(",")
            assert [int(c) for c in cells] == PAPER_LOG_GRID[label]

    def test_pattern_table_structure(self, tmp_path, capsys):
        code, _, _ = run_cli(["tables", "--table", "1", "--seed", "7"], tmp_path, capsys)
        assert code == EXIT_OK
        lines = (tmp_path / "table1.csv").read_text().splitlines()
        assert len(lines) == 4
        for line in lines[1:]:
            cells = line.split(",")[1:]
            assert len(cells) == 5
            for cell in cells:
                assert cell.startswith("{") and cell.endswith("}")
                inner = cell[1:-1]
                assert all(ch in "01" for ch in inner)
                assert all(a != b for a, b in zip(inner, inner[1:]))

    def test_repeat_run_table_structure(self, tmp_path, capsys):
        code, _, _ = run_cli(["tables", "--table", "3", "--seed", "7"], tmp_path, capsys)
        assert code == EXIT_OK
        lines = (tmp_path / "table3.csv").read_text().splitlines()
        assert lines[0] == "run,1/3,1/4,1/10"
        assert len(lines) == 12  # header + T-1..T-10 + log row
        for line in lines[1:-1]:
            run, *cells = line.split(",")
            assert run.startswith("T-")
            for cell in cells:
                pattern, m_part = cell.split(" M=")
                inner = pattern[1:-1]
                assert int(m_part) == len(inner) - 1
                assert all(a != b for a, b in zip(inner, inner[1:]))
        log_row = lines[-1].split(",")
        assert log_row[0] == "log_lambda_N"
        assert [int(v) for v in log_row[1:]] == [12, 11, 8]

    def test_seed_changes_simulated_tables_only(self, tmp_path, capsys):
        a_dir, b_dir = tmp_path / "a", tmp_path / "b"
        run_cli(["tables", "--table", "1", "--seed", "1"], a_dir, capsys)
        run_cli(["tables", "--table", "1", "--seed", "2"], b_dir, capsys)
        assert (a_dir / "table1.csv").read_text() != (b_dir / "table1.csv").read_text()
        run_cli(["tables", "--table", "2", "--seed", "1"], a_dir, capsys)
        run_cli(["tables", "--table", "2", "--seed", "2"], b_dir, capsys)
        assert (a_dir / "table2.csv").read_text() == (b_dir / "table2.csv").read_text()

    def test_formats(self, tmp_path, capsys):
        for fmt, name in [("md", "table2.md"), ("json", "table2.json")]:
            code, _, _ = run_cli(
                ["tables", "--table", "2", "--format", fmt], tmp_path, capsys
            )
            assert code == EXIT_OK
            assert (tmp_path / name).exists()
        obj = json.loads((tmp_path / "table2.json").read_text())
        assert obj["columns"][0] == "p"


class TestBoundsCommand:
    def test_single_cell(self, tmp_path, capsys):
        code, _, _ = run_cli(
            ["bounds", "--N", "20", "--K", "4", "--p", "0.3333"], tmp_path, capsys
        )
        assert code == EXIT_OK
        lines = (tmp_path / "bounds.csv").read_text().splitlines()
        assert lines[0] == "N,K,p,lower,upper"
        _, _, _, lower, upper = lines[1].split(",")
        assert float(lower) <= float(upper)

    def test_range_sweep_skips_invalid(self, tmp_path, capsys):
        code, out, _ = run_cli(
            ["bounds", "--N", "4:40:4", "--K", "2:6:2", "--p", "0.5"], tmp_path, capsys
        )
        assert code == EXIT_OK
        lines = (tmp_path / "bounds.csv").read_text().splitlines()[1:]
        for line in lines:
            n, k, _, lower, upper = line.split(",")
            assert int(n) >= 2 * int(k)
            assert float(lower) <= float(upper) + 1e-12

    def test_parse_range(self):
        assert parse_range("12", "N") == [12]
        assert parse_range("3:6", "N") == [3, 4, 5, 6]
        assert parse_range("2:10:4", "N") == [2, 6, 10]
        for bad in ("a", "5:1", "1:2:0", "1:2:3:4"):
            with pytest.raises(ConfigError):
                parse_range(bad, "N")

    def test_csv_round_trip(self, tmp_path, capsys):
        run_cli(["bounds", "--N", "10:60:7", "--K", "2:5", "--p", "0.3"], tmp_path, capsys)
        text = (tmp_path / "bounds.csv").read_text()
        lines = text.splitlines()
        rebuilt = [lines[0]]
        for line in lines[1:]:
            n, k, p, lower, upper = line.split(",")
            rebuilt.append(
                f"{int(n)},{int(k)},{float(p):.12g},{float(lower):.12g},{float(upper):.12g}"
            )
        assert "\n".join(rebuilt) + "\n" == text


class TestGammaCommand:
    def test_verdict_only(self, tmp_path, capsys):
        code, out, _ = run_cli(
            ["gamma", "--a", "2", "--b", "0", "--p", "0.5"], tmp_path, capsys
        )
        assert code == EXIT_OK
        assert out.strip() == "Converges"
        obj = json.loads((tmp_path / "gamma.json").read_text())
        assert obj["verdict"] == "Converges"
        assert obj["runs"] == []

    def test_divergent_with_scan(self, tmp_path, capsys):
        code, out, _ = run_cli(
            [
                "gamma", "--a", "0.5", "--b", "0", "--p", "0.5",
                "--runs", "5", "--N-max", "1000", "--seed", "11",
            ],
            tmp_path,
            capsys,
        )
        assert code == EXIT_OK
        assert out.splitlines()[0] == "Diverges"
        obj = json.loads((tmp_path / "gamma.json").read_text())
        assert obj["hit_fraction"] == 1.0
        assert len(obj["runs"]) == 5


class TestConfigCommands:
    CONFIG = """\
[smoke]
p = 0.5
n_grid = 50, 200
trials = 4
seed = 21
epsilon = 0.5
gamma_a = 1.0
gamma_b = 0.0
"""

    def write_config(self, tmp_path, text=None):
        path = tmp_path / "exp.ini"
        path.write_text(text if text is not None else self.CONFIG)
        return path

    def test_simulate_outputs(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path)
        code, _, _ = run_cli(["simulate", "--config", str(cfg)], tmp_path / "o", capsys)
        assert code == EXIT_OK
        report = json.loads((tmp_path / "o" / "smoke.report.json").read_text())
        assert [pt["N"] for pt in report["grid"]] == [50, 200]
        csv_lines = (tmp_path / "o" / "smoke.trials.csv").read_text().splitlines()
        assert csv_lines[0] == "p,N,trial,M,ratio"
        assert len(csv_lines) == 1 + 2 * 4
        assert (tmp_path / "o" / "simulate.manifest.json").exists()

    def test_slln_trend_report(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path)
        code, out, _ = run_cli(["slln", "--config", str(cfg)], tmp_path / "o", capsys)
        assert code == EXIT_OK
        lines = (tmp_path / "o" / "smoke.slln.csv").read_text().splitlines()
        assert lines[0] == "N,mean_M,mean_ratio,abs_gap_to_1"
        assert len(lines) == 3

    def test_missing_key_reported(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path, "[x]\np = 0.5\ntrials = 2\nseed = 1\n")
        code, _, err = run_cli(["simulate", "--config", str(cfg)], tmp_path, capsys)
        assert code == EXIT_USAGE
        assert "n_grid" in err and "[x]" in err

    def test_parse_error_carries_line_number(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path, "[x]\np 0.5\n")
        code, _, err = run_cli(["simulate", "--config", str(cfg)], tmp_path, capsys)
        assert code == EXIT_USAGE
        assert "line" in err.lower() and "2" in err

    def test_unknown_key_rejected(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path, self.CONFIG + "bogus = 1\n")
        code, _, err = run_cli(["simulate", "--config", str(cfg)], tmp_path, capsys)
        assert code == EXIT_USAGE
        assert "bogus" in err

    def test_gamma_keys_must_pair(self, tmp_path, capsys):
        text = self.CONFIG.replace("gamma_b = 0.0\n", "")
        cfg = self.write_config(tmp_path, text)
        code, _, err = run_cli(["simulate", "--config", str(cfg)], tmp_path, capsys)
        assert code == EXIT_USAGE
        assert "gamma" in err

    def test_missing_config_file(self, tmp_path, capsys):
        code, _, err = run_cli(
            ["simulate", "--config", str(tmp_path / "nope.ini")], tmp_path, capsys
        )
        assert code == EXIT_USAGE


class TestManifestReplay:
    def test_replay_reproduces_bytes(self, tmp_path, capsys):
        first = tmp_path / "first"
        code, _, _ = run_cli(["tables", "--table", "3", "--seed", "5"], first, capsys)
        assert code == EXIT_OK
        original = (first / "table3.csv").read_bytes()

        second = tmp_path / "second"
        code = main(
            ["replay", "--manifest", str(first / "tables.manifest.json"), "--out", str(second)]
        )
        capsys.readouterr()
        assert code == EXIT_OK
        assert (second / "table3.csv").read_bytes() == original

    def test_replay_detects_tampering(self, tmp_path, capsys):
        first = tmp_path / "first"
        run_cli(["tables", "--table", "2"], first, capsys)
        manifest_path = first / "tables.manifest.json"
        obj = json.loads(manifest_path.read_text())
        name = next(iter(obj["outputs"]))
        obj["outputs"][name] = "0" * 64
        manifest_path.write_text(json.dumps(obj))
        code = main(["replay", "--manifest", str(manifest_path), "--out", str(tmp_path / "r")])
        capsys.readouterr()
        assert code == EXIT_INTERNAL

    def test_replay_simulate(self, tmp_path, capsys):
        cfg = tmp_path / "exp.ini"
        cfg.write_text("[mini]\np = 0.3\nn_grid = 64\ntrials = 3\nseed = 8\n")
        first = tmp_path / "a"
        run_cli(["simulate", "--config", str(cfg)], first, capsys)
        cfg.unlink()  # replay must not need the config file
        second = tmp_path / "b"
        code = main(
            ["replay", "--manifest", str(first / "simulate.manifest.json"), "--out", str(second)]
        )
        capsys.readouterr()
        assert code == EXIT_OK
        assert (second / "mini.report.json").read_bytes() == (
            first / "mini.report.json"
        ).read_bytes()


class TestOutDirResolution:
    def test_env_var_used_when_flag_absent(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("SWITCHRUN_OUT", str(tmp_path / "envout"))
        code = main(["tables", "--table", "2"])
        capsys.readouterr()
        assert code == EXIT_OK
        assert (tmp_path / "envout" / "table2.csv").exists()

    def test_flag_beats_env(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("SWITCHRUN_OUT", str(tmp_path / "envout"))
        code, _, _ = run_cli(["tables", "--table", "2"], tmp_path / "flagout", capsys)
        assert code == EXIT_OK
        assert (tmp_path / "flagout" / "table2.csv").exists()
        assert not (tmp_path / "envout").exists()

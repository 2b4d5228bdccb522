"""Command-line interface: output schemas, determinism, exit codes."""

import json
import math
import os
import subprocess
import sys

import pytest

from qtremble.cli import main

pytestmark = pytest.mark.usefixtures("tmp_path")


def run_main(*argv) -> int:
    return main(list(argv))


class TestSurfaceCommand:
    def test_csv_row_count_and_header(self, tmp_path):
        out = tmp_path / "surface.csv"
        rc = run_main("surface", "--game", "PD", "--vary", "A", "--dims", "2",
                      "--opponent", "pure:Q", "--nodes", "65", "--out", str(out))
        assert rc == 0
        lines = out.read_text().splitlines()
        header = lines[0].split(",")
        assert header == ["theta", "alpha", "payoff_A", "payoff_B"]
        assert len(lines) == 1 + 65 * 65
        assert all(len(line.split(",")) == len(header) for line in lines[1:])

    def test_csv_values_round_trip_losslessly(self, tmp_path):
        out = tmp_path / "surface.csv"
        run_main("surface", "--game", "PD", "--vary", "A", "--dims", "1",
                 "--opponent", "pure:C", "--nodes", "9", "--out", str(out))
        rows = [line.split(",") for line in out.read_text().splitlines()[1:]]
        thetas = [float(r[0]) for r in rows]
        assert thetas[0] == -math.pi and thetas[-1] == math.pi

    def test_json_schema(self, tmp_path):
        out = tmp_path / "surface.json"
        rc = run_main("surface", "--game", "SH", "--vary", "B", "--dims", "2",
                      "--opponent", "tremble:C,kappa=1.75", "--nodes", "33",
                      "--format", "json", "--out", str(out))
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["columns"] == ["theta", "alpha", "payoff_A", "payoff_B"]
        assert len(doc["rows"]) == 33 * 33
        assert doc["metadata"]["seed"] == 0

    def test_sh_above_threshold_peaks_at_c(self, tmp_path):
        out = tmp_path / "sh.json"
        run_main("surface", "--game", "SH", "--vary", "B", "--dims", "2",
                 "--opponent", "tremble:C,kappa=1.75", "--nodes", "65",
                 "--format", "json", "--out", str(out))
        rows = json.loads(out.read_text())["rows"]
        top = max(rows, key=lambda r: r[3])
        assert abs(top[0]) <= 1e-9  # theta = 0: Bob stays with C

    def test_deterministic_bytes(self, tmp_path):
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        for path in (first, second):
            rc = run_main("surface", "--game", "PD", "--vary", "B", "--dims", "2",
                          "--opponent", "tremble:Q,kappa=5", "--nodes", "17",
                          "--out", str(path))
            assert rc == 0
        assert first.read_bytes() == second.read_bytes()

    def test_no_temp_files_left_behind(self, tmp_path):
        out = tmp_path / "clean.csv"
        run_main("surface", "--game", "PD", "--vary", "A", "--dims", "1",
                 "--opponent", "pure:C", "--nodes", "9", "--out", str(out))
        assert os.listdir(tmp_path) == ["clean.csv"]

    def test_self_check_failure_exit_code(self, tmp_path):
        rc = run_main("surface", "--game", "PD", "--vary", "A", "--dims", "2",
                      "--opponent", "tremble:Q,kappa=25", "--quad-nodes", "8",
                      "--nodes", "9", "--self-check", "--out", str(tmp_path / "x.csv"))
        assert rc == 4

    def test_custom_game_file(self, tmp_path):
        game_file = tmp_path / "game.json"
        game_file.write_text(json.dumps({
            "name": "custom", "a": [[1, 0], [0, 1]], "b": [[1, 0], [0, 1]],
        }))
        out = tmp_path / "out.csv"
        rc = run_main("surface", "--game", str(game_file), "--vary", "A",
                      "--dims", "1", "--opponent", "pure:C", "--nodes", "9",
                      "--out", str(out))
        assert rc == 0
        assert len(out.read_text().splitlines()) == 10


class TestThpCommand:
    def test_eg_two_parameter_failures(self, tmp_path):
        out = tmp_path / "eg.json"
        rc = run_main("thp", "--game", "EG", "--profile", "D:D", "--tremble-dims", "2",
                      "--kappa", "1,5", "--format", "json", "--out", str(out))
        assert rc == 0
        doc = json.loads(out.read_text())
        assert [v["holds"] for v in doc["verdicts"]] == [False, False]

    def test_eg_three_parameter_survival(self, tmp_path):
        out = tmp_path / "eg3.json"
        rc = run_main("thp", "--game", "EG", "--profile", "D:D", "--tremble-dims", "3",
                      "--response-dims", "2", "--kappa", "1", "--format", "json",
                      "--out", str(out))
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["verdicts"][0]["holds"] is True

    def test_pd_quantum_profile_holds(self, tmp_path):
        out = tmp_path / "pd.csv"
        rc = run_main("thp", "--game", "PD", "--profile", "Q:Q", "--tremble-dims", "2",
                      "--kappa", "5", "--out", str(out))
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "kappa,holds,distance,margin"
        assert lines[1].startswith("5,true,")

    def test_triple_literal_profile(self, tmp_path):
        out = tmp_path / "triple.json"
        rc = run_main("thp", "--game", "PD", "--profile", "0,3.141592653589793,0:Q",
                      "--tremble-dims", "2", "--kappa", "1", "--format", "json",
                      "--out", str(out))
        assert rc == 0
        assert json.loads(out.read_text())["verdicts"][0]["holds"] is True


class TestThresholdCommand:
    def test_sh_bracket(self, tmp_path):
        out = tmp_path / "sh.json"
        rc = run_main("threshold", "--game", "SH", "--profile", "C:C",
                      "--tremble-dims", "2", "--lo", "1", "--hi", "5",
                      "--format", "json", "--out", str(out))
        assert rc == 0
        doc = json.loads(out.read_text())
        assert 1.5 < doc["kappa_star"] <= 1.75
        assert doc["bracket"][1] - doc["bracket"][0] <= doc["tol"]

    def test_no_bracket_exit_code(self, tmp_path):
        rc = run_main("threshold", "--game", "PD", "--profile", "Q:Q",
                      "--tremble-dims", "2", "--lo", "0.5", "--hi", "5",
                      "--out", str(tmp_path / "x.json"))
        assert rc == 3


class TestClassicalCommand:
    def test_json_verdicts(self, tmp_path):
        out = tmp_path / "eg.json"
        rc = run_main("classical", "--game", "EG", "--format", "json", "--out", str(out))
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["thp"]["C,C"] is True
        assert doc["thp"]["D,D"] is False
        kinds = {tuple(e["profile"]): e["kind"] for e in doc["equilibria"]}
        assert kinds == {("C", "C"): "strict", ("D", "D"): "weak"}
        assert len(doc["surface"]) == 65 * 65

    def test_pd_equilibria(self, tmp_path):
        out = tmp_path / "pd.json"
        run_main("classical", "--game", "PD", "--format", "json", "--out", str(out))
        doc = json.loads(out.read_text())
        assert [e["profile"] for e in doc["equilibria"]] == [["D", "D"]]
        assert doc["thp"]["D,D"] is True

    def test_sh_both_perfect(self, tmp_path):
        out = tmp_path / "sh.json"
        run_main("classical", "--game", "SH", "--format", "json", "--out", str(out))
        doc = json.loads(out.read_text())
        assert doc["thp"]["C,C"] is True and doc["thp"]["D,D"] is True

    def test_csv_surface(self, tmp_path):
        out = tmp_path / "sh.csv"
        rc = run_main("classical", "--game", "SH", "--nodes", "11", "--out", str(out))
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "p_A,p_B,payoff_A,payoff_B"
        assert len(lines) == 1 + 11 * 11


class TestErrorHandling:
    def test_unknown_game_exit_code(self, tmp_path):
        rc = run_main("surface", "--game", "NOPE", "--vary", "A", "--dims", "1",
                      "--opponent", "pure:C", "--out", str(tmp_path / "x.csv"))
        assert rc == 2

    def test_bad_opponent_literal(self, tmp_path):
        rc = run_main("surface", "--game", "PD", "--vary", "A", "--dims", "2",
                      "--opponent", "garbage", "--out", str(tmp_path / "x.csv"))
        assert rc == 2

    def test_bad_profile(self, tmp_path):
        rc = run_main("thp", "--game", "PD", "--profile", "Q", "--tremble-dims", "2",
                      "--kappa", "1", "--out", str(tmp_path / "x.csv"))
        assert rc == 2

    def test_bad_mixture_weights(self, tmp_path):
        rc = run_main("surface", "--game", "EG", "--vary", "B", "--dims", "1",
                      "--opponent", "mix:C=0.7,D=0.7", "--out", str(tmp_path / "x.csv"))
        assert rc == 2


class TestSubprocessEntryPoint:
    def test_module_invocation_is_deterministic(self, tmp_path):
        cmd = [sys.executable, "-m", "qtremble", "thp", "--game", "EG",
               "--profile", "D:D", "--tremble-dims", "2", "--kappa", "1,5",
               "--format", "json"]
        first = subprocess.run(cmd, capture_output=True, check=True)
        second = subprocess.run(cmd, capture_output=True, check=True)
        assert first.stdout == second.stdout
        assert json.loads(first.stdout)["verdicts"][0]["holds"] is False

    def test_missing_subcommand_exits_2(self):
        proc = subprocess.run([sys.executable, "-m", "qtremble"], capture_output=True)
        assert proc.returncode == 2

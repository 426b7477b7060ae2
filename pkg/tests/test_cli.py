import json

import pytest

import src.cli as cli
from src.cli import EXIT_OK, EXIT_UNTERMINATED, EXIT_USAGE, main
from src.experiments import CSV_COLUMNS


@pytest.fixture(autouse=True)
def isolated_data_dir(tmp_path, monkeypatch):
    monkeypatch.setattr(cli.config, "data_dir", str(tmp_path / "data"))
    monkeypatch.setattr(cli.config, "enable_notify", False)


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestGen:
    def test_complete(self, capsys):
        assert main(["gen", "complete:3"]) == EXIT_OK
        assert capsys.readouterr().out == "3\n0 1\n0 2\n1 2\n"

    def test_flag_form_and_file(self, tmp_path):
        out = tmp_path / "g.txt"
        assert main(["gen", "--gen", "cliques:2", "--out", str(out)]) == EXIT_OK
        assert out.read_text().splitlines()[0] == "6"

    def test_seeded_gnp_is_reproducible(self, capsys):
        main(["gen", "gnp:30,0.5", "--seed", "9"])
        first = capsys.readouterr().out
        main(["gen", "gnp:30,0.5", "--seed", "9"])
        assert capsys.readouterr().out == first

    @pytest.mark.parametrize("argv", [["gen", "star:4"], ["gen"], ["gen", "ring:2"]])
    def test_bad_spec(self, argv, capsys):
        assert main(argv) == EXIT_USAGE
        assert "error" in capsys.readouterr().err


class TestRun:
    def test_single_node(self, capsys):
        assert main(["run", "--gen", "empty:1", "--p0", "1", "--seed", "1"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "mis: [0]" in out
        assert "rounds: 1" in out
        assert "verdict: PASS" in out

    def test_coloring_json(self, capsys):
        assert main(["run", "--gen", "complete:4", "--algorithm", "coloring-feedback", "--seed", "3",
                     "--format", "json"]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert sorted(data["result"]["colors"]) == [1, 2, 3, 4]
        assert data["result"]["colors_used"] == 4
        assert data["verdict"] == "PASS"
        assert data["algorithm"]["algorithm"] == "coloring-feedback"

    def test_csv(self, capsys):
        assert main(["run", "--gen", "path:3", "--seed", "2", "--format", "csv"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "node,outcome,beeps,second_exchange_signals,seed"
        assert len(lines) == 4
        assert all(line.endswith(",2") for line in lines[1:])

    def test_csv_without_seed_carries_generated_seed(self, capsys):
        assert main(["run", "--gen", "ring:5", "--format", "csv"]) == EXIT_OK
        rows = [line.split(",") for line in capsys.readouterr().out.splitlines()[1:]]
        seeds = {row[-1] for row in rows}
        assert len(rows) == 5 and len(seeds) == 1
        seed = int(seeds.pop())
        assert main(["run", "--gen", "ring:5", "--format", "csv", "--seed", str(seed)]) == EXIT_OK
        assert [line.split(",") for line in capsys.readouterr().out.splitlines()[1:]] == rows

    def test_unterminated_exit_code(self, capsys):
        code = main(["run", "--gen", "complete:2", "--algorithm", "mis-global", "--schedule", "constant:1",
                     "--max-rounds", "50", "--seed", "0"])
        assert code == EXIT_UNTERMINATED
        out = capsys.readouterr().out
        assert "rounds: 50" in out and "UNTERMINATED" in out

    def test_random_seed_is_reported(self, capsys):
        assert main(["run", "--gen", "complete:3"]) == EXIT_OK
        seed_line = next(line for line in capsys.readouterr().out.splitlines() if line.startswith("seed: "))
        assert int(seed_line.split()[1]) >= 0

    def test_byte_identical_reruns(self, tmp_path):
        outputs = []
        for k in range(2):
            out, transcript = tmp_path / f"r{k}.json", tmp_path / f"t{k}.jsonl"
            assert main(["run", "--gen", "gnp:60,0.5", "--seed", "42", "--format", "json", "--out", str(out),
                         "--transcript", str(transcript), "--diagnostics"]) == EXIT_OK
            outputs.append((out.read_bytes(), transcript.read_bytes()))
        assert outputs[0] == outputs[1]

    def test_transcript_lines(self, tmp_path, capsys):
        transcript = tmp_path / "t.jsonl"
        main(["run", "--gen", "complete:5", "--seed", "8", "--format", "json", "--transcript", str(transcript)])
        rounds = json.loads(capsys.readouterr().out)["result"]["rounds_used"]
        records = [json.loads(line) for line in transcript.read_text().splitlines()]
        assert [r["round"] for r in records] == list(range(1, rounds + 1))
        assert set(records[0]) == {"round", "first_exchange", "second_exchange", "finished"}

    def test_config_file_with_flag_override(self, tmp_path, capsys):
        cfg = write(tmp_path / "run.json", json.dumps(
            {"gen": "complete:4", "algorithm": "coloring-feedback", "seed": 1, "max-rounds": 500}))
        assert main(["run", "--config", cfg, "--seed", "7", "--format", "json"]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["result"]["seed"] == 7
        assert data["result"]["kind"] == "coloring"

    @pytest.mark.parametrize("argv", [
        ["run", "--seed", "1"],
        ["run", "--gen", "complete:3", "--graph", "g.txt"],
        ["run", "--gen", "bogus:3"],
        ["run", "--graph", "does-not-exist.txt"],
        ["run", "--gen", "complete:3", "--f1", "0.5"],
        ["run", "--gen", "complete:3", "--algorithm", "mis-global", "--schedule", "ramp:0.5"],
        ["run", "--gen", "complete:3", "--max-rounds", "0"],
        ["run", "--gen", "complete:3", "--algorithm", "luby"],
    ])
    def test_usage_errors(self, argv):
        assert main(argv) == EXIT_USAGE

    def test_malformed_graph_file(self, tmp_path, capsys):
        g = write(tmp_path / "g.txt", "3\n0 1\n2 2\n")
        assert main(["run", "--graph", g, "--seed", "1"]) == EXIT_USAGE
        assert "line 3" in capsys.readouterr().err


class TestVerify:
    def test_outcome_round_trip(self, tmp_path, capsys):
        g = tmp_path / "g.txt"
        outcome = tmp_path / "o.json"
        main(["gen", "gnp:40,0.3", "--seed", "4", "--out", str(g)])
        assert main(["run", "--graph", str(g), "--seed", "4", "--outcome-out", str(outcome)]) == EXIT_OK
        capsys.readouterr()
        assert main(["verify", str(outcome), "--graph", str(g)]) == EXIT_OK
        assert capsys.readouterr().out == "PASS\n"

    def test_fail(self, tmp_path, capsys):
        g = write(tmp_path / "g.txt", "3\n0 1\n1 2\n")
        bad = write(tmp_path / "bad.json", json.dumps({"kind": "mis", "members": [0]}))
        assert main(["verify", bad, "--graph", g]) == 1
        assert capsys.readouterr().out == "FAIL: node 2 could be added\n"

    def test_coloring(self, tmp_path, capsys):
        g = write(tmp_path / "g.txt", "3\n0 1\n1 2\n")
        good = write(tmp_path / "good.json", json.dumps({"kind": "coloring", "colors": [1, 2, 1]}))
        partial = write(tmp_path / "partial.json", json.dumps({"kind": "coloring", "colors": [1, None, 1]}))
        assert main(["verify", good, "--graph", g]) == EXIT_OK
        assert main(["verify", partial, "--graph", g]) == 1
        assert capsys.readouterr().out.splitlines()[1].startswith("FAIL: partial coloring")

    def test_bad_outcome_file(self, tmp_path):
        g = write(tmp_path / "g.txt", "2\n0 1\n")
        bad = write(tmp_path / "bad.json", json.dumps({"kind": "matching"}))
        assert main(["verify", bad, "--graph", g]) == EXIT_USAGE


class TestExperiment:
    def small_config(self, tmp_path) -> str:
        return write(tmp_path / "exp.json", json.dumps({
            "name": "small",
            "family": "gnp",
            "sweep": [10, 20],
            "edge_p": 0.5,
            "trials": 3,
            "algorithms": [{"algorithm": "mis-feedback"}, {"algorithm": "mis-global", "schedule": "ramp:2"}],
        }))

    def test_config_file_reports(self, tmp_path, capsys):
        cfg = self.small_config(tmp_path)
        prefix = tmp_path / "out" / "small"
        assert main(["experiment", "--config", cfg, "--seed", "1", "--out", str(prefix), "--format", "csv"]) == EXIT_OK
        stdout = capsys.readouterr().out
        csv_text = (tmp_path / "out" / "small.csv").read_text()
        assert stdout == csv_text
        assert csv_text.splitlines()[0] == ",".join(CSV_COLUMNS)
        assert len(csv_text.splitlines()) == 1 + 2 * 2
        report = json.loads((tmp_path / "out" / "small.json").read_text())
        assert report["config"]["seed"] == 1
        assert [a["algorithm"]["algorithm"] for a in report["algorithms"]] == ["mis-feedback", "mis-global"]

    def test_byte_identical_reports(self, tmp_path):
        cfg = self.small_config(tmp_path)
        blobs = []
        for k in range(2):
            prefix = tmp_path / f"rep{k}"
            main(["experiment", "--config", cfg, "--seed", "11", "--out", str(prefix), "--format", "json"])
            blobs.append(((tmp_path / f"rep{k}.json").read_bytes(), (tmp_path / f"rep{k}.csv").read_bytes()))
        assert blobs[0] == blobs[1]

    def test_paper_gnp_preset(self, tmp_path, capsys):
        prefix = tmp_path / "gnp"
        assert main(["experiment", "paper-gnp", "--seed", "1", "--trials", "1", "--out", str(prefix),
                     "--format", "csv"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 11
        assert [line.split(",")[2] for line in lines[1:]] == [str(n) for n in range(20, 201, 20)]
        assert json.loads((tmp_path / "gnp.json").read_text())["config"]["name"] == "paper-gnp"

    def test_density_sweep_from_config_file(self, tmp_path, capsys):
        cfg = write(tmp_path / "dense.json", json.dumps({
            "name": "dense",
            "family": "gnp",
            "sweep": [12],
            "edge_ps": [0.2, 0.8],
            "trials": 2,
            "algorithms": [{"algorithm": "coloring-feedback"}],
        }))
        assert main(["experiment", "--config", cfg, "--seed", "4", "--out", str(tmp_path / "d"),
                     "--format", "csv"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].endswith(",edge_p")
        assert [line.split(",")[-1] for line in lines[1:]] == ["0.2", "0.8"]

    def test_text_summary_and_history(self, tmp_path, capsys):
        cfg = self.small_config(tmp_path)
        assert main(["experiment", "--config", cfg, "--seed", "2", "--out", str(tmp_path / "s"), "--record"]) == EXIT_OK
        assert "[mis-global]" in capsys.readouterr().out
        history = json.loads((tmp_path / "data" / "history.json").read_text())
        assert history["runs"][-1]["experiment"] == "small"

    @pytest.mark.parametrize("argv", [
        ["experiment", "nope", "--seed", "1"],
        ["experiment", "paper-gnp"],
        ["experiment"],
        ["experiment", "paper-gnp", "--seed", "1", "--trials", "0"],
    ])
    def test_usage_errors(self, argv):
        assert main(argv) == EXIT_USAGE

    def test_preset_and_config_conflict(self, tmp_path):
        cfg = self.small_config(tmp_path)
        assert main(["experiment", "paper-gnp", "--config", cfg, "--seed", "1"]) == EXIT_USAGE


def test_help_exits_cleanly():
    assert main(["--help"]) == EXIT_OK


def test_unknown_command():
    assert main(["frobnicate"]) == EXIT_USAGE

import json

import pytest

from src.algorithms import AlgorithmSpec
from src.experiments import ExperimentConfig, run_experiment
from src.store import HISTORY_LIMIT, ReportStore, dumps_csv, dumps_json, dumps_jsonl


@pytest.fixture(scope="module")
def report():
    cfg = ExperimentConfig(name="tiny", family="complete", sweep=(3, 5), algorithms=(AlgorithmSpec(),), trials=2,
                           master_seed=1)
    return run_experiment(cfg)


def test_dumps_are_stable():
    assert dumps_json({"b": 1, "a": "ビープ"}) == '{\n  "b": 1,\n  "a": "ビープ"\n}\n'
    assert dumps_csv([{"x": 1, "y": ""}], ("x", "y")) == "x,y\n1,\n"
    assert dumps_jsonl([{"round": 1}, {"round": 2}]) == '{"round":1}\n{"round":2}\n'


def test_save_report_default_location(tmp_path, report):
    store = ReportStore(tmp_path)
    json_path, csv_path = store.save_report(report)
    assert json_path == tmp_path / "tiny.json"
    assert json.loads(json_path.read_text())["config"]["name"] == "tiny"
    assert len(csv_path.read_text().splitlines()) == 3


def test_save_report_prefix(tmp_path, report):
    json_path, csv_path = ReportStore(tmp_path).save_report(report, tmp_path / "nested" / "run1")
    assert json_path.exists() and csv_path.exists()
    assert csv_path.name == "run1.csv"


class TestOutcome:
    def test_round_trip(self, tmp_path):
        store = ReportStore(tmp_path)
        path = tmp_path / "o.json"
        store.save_outcome(path, {"kind": "coloring", "colors": [1, 2, None]})
        assert ReportStore.load_outcome(path) == {"kind": "coloring", "colors": [1, 2, None]}

    @pytest.mark.parametrize("payload", [
        [], {"kind": "mis"}, {"kind": "mis", "members": ["a"]}, {"kind": "coloring", "colors": "1,2"},
        {"kind": "matching", "members": []},
    ])
    def test_rejects(self, tmp_path, payload):
        path = tmp_path / "o.json"
        path.write_text(json.dumps(payload))
        with pytest.raises(ValueError):
            ReportStore.load_outcome(path)


def test_history_is_capped(tmp_path):
    store = ReportStore(tmp_path / "data")
    for k in range(HISTORY_LIMIT + 5):
        store.record_history({"experiment": "x", "seed": k})
    runs = json.loads((tmp_path / "data" / "history.json").read_text())["runs"]
    assert len(runs) == HISTORY_LIMIT
    assert runs[0]["seed"] == 5 and runs[-1]["seed"] == HISTORY_LIMIT + 4
    assert "timestamp" in runs[-1]

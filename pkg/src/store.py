"""
保存・読込：実験レポート（JSON / CSV）/ トランスクリプト（JSONL）/ 結果ファイル / 実行履歴

主成果物（レポート・トランスクリプト）は時刻を含めない。同じシードなら同じバイト列になる。
履歴（history.json）だけは記録時刻を持つ。
"""
import csv
import io
import json
import logging
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .experiments import CSV_COLUMNS, ExperimentReport

logger = logging.getLogger(__name__)

HISTORY_FILE = "history.json"
HISTORY_LIMIT = 100


def dumps_json(data) -> str:
    return json.dumps(data, ensure_ascii=False, indent=2) + "\n"


def dumps_csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def dumps_jsonl(records: Iterable[dict]) -> str:
    return "".join(json.dumps(r, ensure_ascii=False, separators=(",", ":")) + "\n" for r in records)


class ReportStore:
    """
    - 実験レポートの書き出し（<prefix>.json / <prefix>.csv）
    - verify 用の結果ファイルの読込
    - 実行履歴の追記（直近100件）
    """

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)

    # ============================
    # レポート
    # ============================
    def save_report(self, report: ExperimentReport, prefix: Optional[str | Path] = None) -> tuple[Path, Path]:
        base = Path(prefix) if prefix else self.data_dir / report.config.name
        base.parent.mkdir(parents=True, exist_ok=True)
        json_path = base.with_name(base.name + ".json")
        csv_path = base.with_name(base.name + ".csv")
        self._write(json_path, dumps_json(report.to_dict()))
        self._write(csv_path, dumps_csv(report.csv_rows(), CSV_COLUMNS))
        logger.info(f"📁 レポート保存: {json_path}, {csv_path}")
        return json_path, csv_path

    def save_transcript(self, path: str | Path, records: Iterable[dict]):
        self._write(Path(path), dumps_jsonl(records))
        logger.info(f"📁 トランスクリプト保存: {path}")

    # ============================
    # 結果ファイル（verify 入力）
    # ============================
    @staticmethod
    def load_outcome(path: str | Path) -> dict:
        """{"kind": "mis", "members": [...]} か {"kind": "coloring", "colors": [...]}"""
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        if not isinstance(data, dict):
            raise ValueError(f"{path}: outcome must be a JSON object")
        kind = data.get("kind")
        if kind == "mis":
            members = data.get("members")
            if not isinstance(members, list) or not all(isinstance(v, int) for v in members):
                raise ValueError(f"{path}: 'members' must be a list of node indices")
        elif kind == "coloring":
            colors = data.get("colors")
            if not isinstance(colors, list) or not all(c is None or isinstance(c, int) for c in colors):
                raise ValueError(f"{path}: 'colors' must be a list of colour indices")
        else:
            raise ValueError(f"{path}: unknown outcome kind {kind!r}")
        return data

    def save_outcome(self, path: str | Path, outcome: dict):
        self._write(Path(path), dumps_json(outcome))

    # ============================
    # 実行履歴
    # ============================
    def record_history(self, entry: dict):
        os.makedirs(self.data_dir, exist_ok=True)
        path = self.data_dir / HISTORY_FILE
        history = self._load(path, default={"runs": []})
        history["runs"].append({"timestamp": datetime.now(timezone.utc).isoformat(), **entry})
        if len(history["runs"]) > HISTORY_LIMIT:
            history["runs"] = history["runs"][-HISTORY_LIMIT:]
        self._save(path, history)
        logger.info(f"履歴保存: 累計{len(history['runs'])}件")

    # ============================
    # ファイル操作
    # ============================
    @staticmethod
    def _write(path: Path, text: str):
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)

    @staticmethod
    def _load(path: Path, default: dict) -> dict:
        try:
            with open(path, "r", encoding="utf-8") as f:
                return json.load(f)
        except (FileNotFoundError, json.JSONDecodeError):
            return default

    @staticmethod
    def _save(path: Path, data: dict):
        try:
            with open(path, "w", encoding="utf-8") as f:
                json.dump(data, f, ensure_ascii=False, indent=2)
        except OSError as e:
            logger.error(f"ファイル保存エラー ({path}): {e}")

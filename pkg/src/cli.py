"""
コマンドライン：gen / run / verify / experiment

終了コード: 0 成功 / 1 使い方・入出力エラー / 2 未終了 / 3 検証失敗
設定の優先順位: 環境変数（config）< --config ファイル < フラグ
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .algorithms import ALGORITHMS, AlgorithmSpec
from .config import config
from .engine import BeepingSimulator, RunResult, SimulationError
from .experiments import CSV_COLUMNS, PRESETS, ExperimentConfig, VerificationFailure, get_preset, run_experiment
from .graph import Graph, GraphFormatError, generate, read_graph, save_edge_list
from .mis import MisParams
from .notifier import notify_experiment
from .store import ReportStore, dumps_csv, dumps_json
from .verify import Verdict, check_coloring, check_mis

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNTERMINATED = 2
EXIT_VERIFY = 3

RUN_CSV_COLUMNS = ("node", "outcome", "beeps", "second_exchange_signals", "seed")


class UsageError(Exception):
    pass


# ============================================================
# 引数
# ============================================================
def _add_algorithm_flags(p: argparse.ArgumentParser):
    p.add_argument("--algorithm", choices=ALGORITHMS, help="アルゴリズム（既定: mis-feedback）")
    p.add_argument("--p0", type=float, help="初期確率の下限（既定 0.5）")
    p.add_argument("--f1", type=float, help="変化率の下限（既定 2）")
    p.add_argument("--f2", type=float, help="変化率の上限（既定 f1）")
    p.add_argument("--init-rule", choices=("fixed", "uniform"), help="初期 p の決め方")
    p.add_argument("--f-rule", choices=("fixed", "uniform"), help="f の決め方")
    p.add_argument("--schedule", help="mis-global のスケジュール（例: ramp:2, phased:1.5, constant:0.5）")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="main.py", description="ビーピングモデル MIS / 貪欲彩色シミュレータ")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="グラフ生成（エッジリスト出力）")
    g.add_argument("spec", nargs="?", help="gnp:n,p | complete:n | ring:n | path:n | cliques:m | empty:n")
    g.add_argument("--gen", dest="gen_flag", help="spec と同じ（フラグ形式）")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", help="出力先（既定: 標準出力）")

    r = sub.add_parser("run", help="1回実行して検証")
    r.add_argument("--config", help="JSON設定ファイル（キーはフラグ名）")
    r.add_argument("--graph", help="エッジリストファイル")
    r.add_argument("--gen", help="生成器スペック")
    _add_algorithm_flags(r)
    r.add_argument("--seed", type=int, help="既定はランダム（出力に必ず表示）")
    r.add_argument("--max-rounds", type=int)
    r.add_argument("--format", choices=("json", "csv", "text"))
    r.add_argument("--out", help="出力先（既定: 標準出力）")
    r.add_argument("--transcript", help="ラウンドごとの記録（JSONL）の出力先")
    r.add_argument("--outcome-out", help="verify 用の結果ファイルの出力先")
    r.add_argument("--diagnostics", action="store_true", help="近傍重みを記録")

    v = sub.add_parser("verify", help="グラフと結果ファイルを検証")
    v.add_argument("outcome", help="結果ファイル（JSON）")
    v.add_argument("--graph", required=True, help="エッジリストファイル")

    e = sub.add_parser("experiment", help="多試行実験")
    e.add_argument("preset", nargs="?", help=f"プリセット名: {', '.join(PRESETS)}")
    e.add_argument("--config", help="実験設定ファイル（JSON）")
    e.add_argument("--seed", type=int, help="必須（設定ファイルに seed があれば省略可）")
    e.add_argument("--trials", type=int)
    e.add_argument("--max-rounds", type=int)
    e.add_argument("--jobs", type=int)
    e.add_argument("--format", choices=("json", "csv", "text"), help="標準出力の形式（既定: text）")
    e.add_argument("--out", help="レポートの出力先プレフィックス（.json / .csv を付ける）")
    e.add_argument("--record", action="store_true", help="data/history.json に記録")
    return parser


def _load_config_file(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read config {path}: {e}") from e
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must be a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def _merged(args: argparse.Namespace, file_values: dict, key: str, default=None):
    value = getattr(args, key, None)
    if value is not None:
        return value
    return file_values.get(key, default)


def _write_output(text: str, out: Optional[str]):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


# ============================================================
# gen
# ============================================================
def cmd_gen(args: argparse.Namespace) -> int:
    spec = args.spec or args.gen_flag
    if not spec:
        raise UsageError("generator spec required (e.g. gen complete:3)")
    try:
        g = generate(spec, args.seed)
    except ValueError as e:
        raise UsageError(str(e)) from e
    _write_output(save_edge_list(g), args.out)
    logger.info(f"生成: {spec} seed={args.seed} → {g!r}")
    return EXIT_OK


# ============================================================
# run
# ============================================================
def _algorithm_from(args: argparse.Namespace, file_values: dict) -> AlgorithmSpec:
    name = _merged(args, file_values, "algorithm", "mis-feedback")
    if name == "mis-global":
        return AlgorithmSpec(name, schedule=_merged(args, file_values, "schedule"))
    f1 = float(_merged(args, file_values, "f1", 2.0))
    params = MisParams(
        p0=float(_merged(args, file_values, "p0", 0.5)),
        f1=f1,
        f2=float(_merged(args, file_values, "f2", f1)),
        init_rule=_merged(args, file_values, "init_rule", "fixed"),
        f_rule=_merged(args, file_values, "f_rule", "fixed"),
    )
    return AlgorithmSpec(name, params)


def _graph_from(args: argparse.Namespace, file_values: dict, seed: int) -> Graph:
    path = _merged(args, file_values, "graph")
    spec = _merged(args, file_values, "gen")
    if bool(path) == bool(spec):
        raise UsageError("exactly one of --graph or --gen is required")
    if path:
        return read_graph(path)
    return generate(spec, seed)


def verdict_for(g: Graph, result: RunResult) -> Verdict:
    if result.kind == "mis":
        return check_mis(g, result.mis_members)
    return check_coloring(g, result.colors)


def _render_run(fmt: str, g: Graph, spec: AlgorithmSpec, result: RunResult, verdict: Optional[Verdict]) -> str:
    verdict_text = "UNTERMINATED" if verdict is None else str(verdict)
    if fmt == "json":
        return dumps_json({
            "graph": {"n": g.n, "edges": g.edge_count, "max_degree": g.max_degree},
            "algorithm": spec.to_dict(),
            "result": result.to_dict(),
            "verdict": verdict_text,
        })
    if fmt == "csv":
        rows = [
            {"node": v, "outcome": "" if o is None else int(o), "beeps": b, "second_exchange_signals": s,
             "seed": result.seed}
            for v, (o, b, s) in enumerate(zip(result.outcome, result.beeps_per_node,
                                              result.second_exchange_signals_per_node))
        ]
        return dumps_csv(rows, RUN_CSV_COLUMNS)
    lines = [
        f"algorithm: {spec.name}",
        f"graph: n={g.n} edges={g.edge_count} max_degree={g.max_degree}",
        f"seed: {result.seed}",
        f"terminated: {result.terminated}",
        f"rounds: {result.rounds_used}",
        f"time_steps: {result.time_steps}",
        f"mean_beeps: {result.mean_beeps:.4f}",
        f"max_beeps: {max(result.beeps_per_node)}",
    ]
    if result.kind == "mis":
        lines.append(f"mis: {sorted(result.mis_members)}")
    else:
        lines.append(f"colors: {list(result.colors)}")
        lines.append(f"colors_used: {result.colors_used}")
    lines.append(f"verdict: {verdict_text}")
    return "\n".join(lines) + "\n"


def cmd_run(args: argparse.Namespace) -> int:
    file_values = _load_config_file(args.config)
    seed = _merged(args, file_values, "seed")
    if seed is None:
        seed = int(np.random.SeedSequence().generate_state(1, dtype=np.uint64)[0])
    seed = int(seed)
    max_rounds = int(_merged(args, file_values, "max_rounds", config.max_rounds))
    fmt = _merged(args, file_values, "format", "text")

    try:
        spec = _algorithm_from(args, file_values)
        g = _graph_from(args, file_values, seed)
    except (ValueError, OSError) as e:
        raise UsageError(str(e)) from e

    transcript_path = _merged(args, file_values, "transcript")
    sim = BeepingSimulator(g, spec.build(), seed,
                           diagnostics=bool(args.diagnostics or file_values.get("diagnostics", False)),
                           transcript=bool(transcript_path))
    try:
        result = sim.run(max_rounds)
    except SimulationError as e:
        raise UsageError(str(e)) from e
    logger.info(f"実行: {spec.name} seed={result.seed} rounds={result.rounds_used} terminated={result.terminated}")

    verdict = verdict_for(g, result) if result.terminated else None
    _write_output(_render_run(fmt, g, spec, result, verdict), _merged(args, file_values, "out"))

    store = ReportStore(config.data_dir)
    if transcript_path:
        store.save_transcript(transcript_path, result.transcript)
    outcome_path = _merged(args, file_values, "outcome_out")
    if outcome_path:
        if result.kind == "mis":
            store.save_outcome(outcome_path, {"kind": "mis", "members": sorted(result.mis_members)})
        else:
            store.save_outcome(outcome_path, {"kind": "coloring", "colors": list(result.colors)})

    if not result.terminated:
        logger.warning(f"⚠️ {max_rounds}ラウンドで終了せず (seed={result.seed})")
        return EXIT_UNTERMINATED
    if not verdict:
        logger.error(f"❌ 検証失敗 seed={result.seed}: {verdict.reason}")
        sys.stderr.write(f"verification failed (seed={result.seed}): {verdict.reason}\n")
        return EXIT_VERIFY
    return EXIT_OK


# ============================================================
# verify
# ============================================================
def cmd_verify(args: argparse.Namespace) -> int:
    try:
        g = read_graph(args.graph)
        outcome = ReportStore.load_outcome(args.outcome)
    except (OSError, ValueError) as e:
        raise UsageError(str(e)) from e

    try:
        if outcome["kind"] == "mis":
            verdict = check_mis(g, outcome["members"])
        else:
            verdict = check_coloring(g, outcome["colors"])
    except ValueError as e:
        verdict = Verdict(False, str(e))
    sys.stdout.write(f"{verdict}\n")
    return EXIT_OK if verdict else 1


# ============================================================
# experiment
# ============================================================
def _experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    file_values = _load_config_file(args.config)
    if bool(args.preset) == bool(file_values):
        raise UsageError("give exactly one of a preset name or --config")

    seed = args.seed if args.seed is not None else file_values.get("seed")
    if seed is None:
        raise UsageError("--seed is required for experiments")
    try:
        if args.preset:
            cfg = get_preset(args.preset, int(seed), args.trials)
        else:
            file_values["seed"] = int(seed)
            file_values.setdefault("trials", config.trials)
            file_values.setdefault("max_rounds", config.max_rounds)
            if args.trials is not None:
                file_values["trials"] = args.trials
            cfg = ExperimentConfig.from_dict(file_values)
        if args.max_rounds is not None:
            cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "max_rounds": args.max_rounds})
    except (KeyError, ValueError) as e:
        raise UsageError(f"bad experiment config: {e}") from e
    return cfg


def cmd_experiment(args: argparse.Namespace) -> int:
    cfg = _experiment_config(args)
    jobs = args.jobs if args.jobs is not None else config.jobs
    try:
        report = run_experiment(cfg, jobs=max(1, jobs))
    except VerificationFailure as e:
        sys.stderr.write(f"{e}\n")
        return EXIT_VERIFY

    store = ReportStore(config.data_dir)
    json_path, csv_path = store.save_report(report, args.out)

    fmt = args.format or "text"
    if fmt == "json":
        sys.stdout.write(dumps_json(report.to_dict()))
    elif fmt == "csv":
        sys.stdout.write(dumps_csv(report.csv_rows(), CSV_COLUMNS))
    else:
        sys.stdout.write(report.summary_table() + "\n")

    if args.record:
        store.record_history({
            "experiment": cfg.name,
            "seed": cfg.master_seed,
            "trials": cfg.trials,
            "report": str(json_path),
        })
    notify_experiment(report)
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "run": cmd_run,
    "verify": cmd_verify,
    "experiment": cmd_experiment,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    except (GraphFormatError, OSError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE

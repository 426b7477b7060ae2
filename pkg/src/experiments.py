"""
実験ハーネス：多試行モンテカルロ / 統計 / スケーリング近似 / プリセット

試行 i（スイープ点 j）のシードは (master, j, i) から導出する。
同じ点・同じ試行ならアルゴリズムが違っても同じグラフ・同じシードを使う。
終了した実行は全て検証器に通し、1件でも失敗したら VerificationFailure で中断する。
未終了（max_rounds 到達）は打ち切り観測として数えるだけ。
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .algorithms import AlgorithmSpec
from .engine import DEFAULT_MAX_ROUNDS, derive_seed, run
from .graph import (
    Graph, clique_family_size, gen_clique_family, gen_complete, gen_empty, gen_gnp, gen_path, gen_ring,
)
from .mis import MisParams
from .schedule import BASELINE_SCHEDULE
from .verify import check_coloring, check_mis, expected_beep_bound

logger = logging.getLogger(__name__)

REPORT_VERSION = 1
FAMILIES = ("gnp", "complete", "ring", "path", "empty", "cliques")


class VerificationFailure(RuntimeError):
    """終了した実行が検証に失敗した（エンジンかアルゴリズムのバグ）"""

    def __init__(self, seed: int, algorithm: str, family: str, param: int, reason: str,
                 edge_p: Optional[float] = None):
        where = f"{family}:{param}" if edge_p is None else f"{family}:{param},{edge_p!r}"
        super().__init__(f"verification failed: {algorithm} on {where} seed={seed}: {reason}")
        self.seed = seed
        self.algorithm = algorithm
        self.family = family
        self.param = param
        self.edge_p = edge_p
        self.reason = reason


# ============================================================
# 設定
# ============================================================
@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    family: str
    sweep: tuple[int, ...]                  # gnp/complete/ring/path/empty: n, cliques: m
    algorithms: tuple[AlgorithmSpec, ...] = (AlgorithmSpec(),)
    edge_p: float = 0.5                     # gnp のみ
    edge_ps: tuple[float, ...] = ()         # gnp のみ。指定すると sweep × edge_ps の各組が1点
    trials: int = 100
    master_seed: int = 0
    max_rounds: int = DEFAULT_MAX_ROUNDS

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown graph family {self.family!r} (expected one of {', '.join(FAMILIES)})")
        if not self.sweep:
            raise ValueError("sweep must not be empty")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not self.algorithms:
            raise ValueError("at least one algorithm is required")
        if self.max_rounds < 1:
            raise ValueError(f"max_rounds must be >= 1, got {self.max_rounds}")
        for p in (self.edge_p, *self.edge_ps):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"edge_p must be in [0, 1], got {p}")
        if self.edge_ps and self.family != "gnp":
            raise ValueError(f"edge_ps only applies to the gnp family, not {self.family!r}")

    @property
    def points(self) -> tuple[tuple[int, Optional[float]], ...]:
        """スイープ点 j → (param, edge_p)。gnp 以外は edge_p = None"""
        if self.family != "gnp":
            return tuple((param, None) for param in self.sweep)
        return tuple((param, p) for param in self.sweep for p in (self.edge_ps or (self.edge_p,)))

    def graph(self, j: int, i: int) -> Graph:
        param, edge_p = self.points[j]
        if self.family == "gnp":
            return gen_gnp(param, edge_p, derive_seed(self.master_seed, j, i, 0))
        return _fixed_graph(self.family, param)

    def run_seed(self, j: int, i: int) -> int:
        return derive_seed(self.master_seed, j, i, 1)

    def vertex_count(self, j: int) -> int:
        param = self.points[j][0]
        return clique_family_size(param) if self.family == "cliques" else param

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "family": self.family,
            "sweep": list(self.sweep),
            "edge_p": self.edge_p,
            "edge_ps": list(self.edge_ps),
            "algorithms": [a.to_dict() for a in self.algorithms],
            "trials": self.trials,
            "seed": self.master_seed,
            "max_rounds": self.max_rounds,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        algorithms = d.get("algorithms") or [{"algorithm": "mis-feedback"}]
        return cls(
            name=d.get("name", "custom"),
            family=d["family"],
            sweep=tuple(int(x) for x in d["sweep"]),
            algorithms=tuple(AlgorithmSpec.from_dict(a) for a in algorithms),
            edge_p=float(d.get("edge_p", 0.5)),
            edge_ps=tuple(float(p) for p in d.get("edge_ps") or ()),
            trials=int(d.get("trials", 100)),
            master_seed=int(d.get("seed", 0)),
            max_rounds=int(d.get("max_rounds", DEFAULT_MAX_ROUNDS)),
        )


_FIXED = {
    "complete": gen_complete,
    "ring": gen_ring,
    "path": gen_path,
    "empty": gen_empty,
    "cliques": gen_clique_family,
}
_fixed_cache: dict[tuple[str, int], Graph] = {}


def _fixed_graph(family: str, param: int) -> Graph:
    key = (family, param)
    if key not in _fixed_cache:
        _fixed_cache[key] = _FIXED[family](param)
    return _fixed_cache[key]


# ============================================================
# 統計
# ============================================================
@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    residual: float     # RMSE

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "residual": self.residual}


def fit_scaling(points: Sequence[tuple[float, float]]) -> FitResult:
    """最小二乗で y = slope·x + intercept。residual は RMSE"""
    if len(points) < 2:
        raise ValueError("fit needs at least 2 points")
    x = np.array([p[0] for p in points], dtype=float)
    y = np.array([p[1] for p in points], dtype=float)
    if np.all(x == x[0]):
        raise ValueError("fit needs at least two distinct x values")
    X = np.c_[x, np.ones(x.size)]
    coef, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    rmse = float(np.sqrt(np.mean((y - X @ coef) ** 2)))
    return FitResult(slope=float(coef[0]), intercept=float(coef[1]), residual=rmse)


@dataclass(frozen=True)
class TrialRecord:
    rounds: int
    terminated: bool
    mean_beeps: float
    mean_second_signals: float
    colors_used: int
    max_degree: int


@dataclass(frozen=True)
class PointStats:
    family: str
    param: int
    n: int
    trials: int
    terminated: int
    censored_fraction: float
    mean_rounds: Optional[float]
    sd_rounds: Optional[float]
    min_rounds: Optional[int]
    max_rounds: Optional[int]
    mean_beeps: Optional[float]
    stderr_beeps: Optional[float]
    mean_second_signals: Optional[float]
    mean_max_degree: float
    mean_colors_used: Optional[float] = None
    edge_p: Optional[float] = None          # 密度スイープの gnp 点のみ

    @property
    def rounds_per_log2n(self) -> Optional[float]:
        if self.mean_rounds is None or self.n < 2:
            return None
        return self.mean_rounds / math.log2(self.n)

    @classmethod
    def from_trials(cls, family: str, param: int, n: int, records: Sequence[TrialRecord],
                    coloring: bool, edge_p: Optional[float] = None) -> "PointStats":
        done = [r for r in records if r.terminated]
        rounds = np.array([r.rounds for r in done], dtype=float)
        beeps = np.array([r.mean_beeps for r in done], dtype=float)
        second = np.array([r.mean_second_signals for r in done], dtype=float)
        k = len(done)
        return cls(
            family=family,
            param=param,
            n=n,
            trials=len(records),
            terminated=k,
            censored_fraction=(len(records) - k) / len(records),
            mean_rounds=float(rounds.mean()) if k else None,
            sd_rounds=float(rounds.std(ddof=1)) if k > 1 else (0.0 if k else None),
            min_rounds=int(rounds.min()) if k else None,
            max_rounds=int(rounds.max()) if k else None,
            mean_beeps=float(beeps.mean()) if k else None,
            stderr_beeps=float(beeps.std(ddof=1) / math.sqrt(k)) if k > 1 else (0.0 if k else None),
            mean_second_signals=float(second.mean()) if k else None,
            mean_max_degree=float(np.mean([r.max_degree for r in records])),
            mean_colors_used=float(np.mean([r.colors_used for r in done])) if coloring and k else None,
            edge_p=edge_p,
        )

    def to_dict(self) -> dict:
        d = {
            "family": self.family,
            "param": self.param,
            "n": self.n,
            "trials": self.trials,
            "terminated": self.terminated,
            "censored_fraction": self.censored_fraction,
            "mean_rounds": self.mean_rounds,
            "sd_rounds": self.sd_rounds,
            "min_rounds": self.min_rounds,
            "max_rounds": self.max_rounds,
            "mean_rounds_per_log2n": self.rounds_per_log2n,
            "mean_beeps": self.mean_beeps,
            "stderr_beeps": self.stderr_beeps,
            "mean_second_signals": self.mean_second_signals,
            "mean_max_degree": self.mean_max_degree,
        }
        if self.mean_colors_used is not None:
            d["mean_colors_used"] = self.mean_colors_used
        if self.edge_p is not None:
            d["edge_p"] = self.edge_p
        return d


@dataclass(frozen=True)
class AlgorithmReport:
    algorithm: AlgorithmSpec
    points: tuple[PointStats, ...]
    fit_log: Optional[FitResult] = None     # mean_rounds ~ log2 n
    fit_log2: Optional[FitResult] = None    # mean_rounds ~ (log2 n)^2
    beep_bound: Optional[float] = None

    @classmethod
    def build(cls, algorithm: AlgorithmSpec, points: Sequence[PointStats]) -> "AlgorithmReport":
        usable = [p for p in points if p.mean_rounds is not None and p.n >= 2]
        fit_log = fit_log2 = None
        if len({p.n for p in usable}) >= 2:
            fit_log = fit_scaling([(math.log2(p.n), p.mean_rounds) for p in usable])
            fit_log2 = fit_scaling([(math.log2(p.n) ** 2, p.mean_rounds) for p in usable])
        bound = None
        if algorithm.kind == "mis" and algorithm.is_feedback:
            bound = expected_beep_bound(algorithm.params.f1, algorithm.params.f2)
        return cls(algorithm, tuple(points), fit_log, fit_log2, bound)

    @property
    def name(self) -> str:
        return self.algorithm.name

    def log_fit_better(self) -> bool:
        return (self.fit_log is not None and self.fit_log2 is not None
                and self.fit_log.residual < self.fit_log2.residual)

    def ratio_increasing_top_half(self) -> bool:
        """mean_rounds / log2 n がスイープ後半で狭義単調増加か"""
        ratios = [p.rounds_per_log2n for p in self.points]
        top = ratios[len(ratios) // 2:]
        if any(r is None for r in top) or len(top) < 2:
            return False
        return all(a < b for a, b in zip(top, top[1:]))

    def within_beep_bound(self) -> bool:
        if self.beep_bound is None:
            return True
        return all(
            p.mean_beeps is None or p.mean_beeps <= self.beep_bound + 3 * (p.stderr_beeps or 0.0)
            for p in self.points
        )

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm.to_dict(),
            "points": [p.to_dict() for p in self.points],
            "fit_log2n": self.fit_log.to_dict() if self.fit_log else None,
            "fit_log2n_squared": self.fit_log2.to_dict() if self.fit_log2 else None,
            "beep_bound": self.beep_bound,
            "within_beep_bound": self.within_beep_bound(),
        }


CSV_COLUMNS = ("family", "param", "n", "algorithm", "mean_rounds", "sd_rounds", "mean_beeps",
               "censored_fraction", "edge_p")


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    algorithms: tuple[AlgorithmReport, ...]

    def to_dict(self) -> dict:
        return {
            "version": REPORT_VERSION,
            "config": self.config.to_dict(),
            "algorithms": [a.to_dict() for a in self.algorithms],
        }

    def csv_rows(self) -> list[dict]:
        rows = []
        for a in self.algorithms:
            for p in a.points:
                rows.append({
                    "family": p.family,
                    "param": p.param,
                    "n": p.n,
                    "algorithm": a.name,
                    "mean_rounds": _fmt(p.mean_rounds),
                    "sd_rounds": _fmt(p.sd_rounds),
                    "mean_beeps": _fmt(p.mean_beeps),
                    "censored_fraction": _fmt(p.censored_fraction),
                    "edge_p": _fmt(p.edge_p),
                })
        return rows

    def summary_table(self) -> str:
        lines = [f"実験: {self.config.name} (seed={self.config.master_seed}, trials={self.config.trials})"]
        for a in self.algorithms:
            lines.append(f"\n[{a.name}]")
            lines.append(f"{'param':>7} {'p':>5} {'n':>6} {'rounds':>9} {'sd':>7} {'r/log2n':>8} {'beeps':>7} {'censored':>9}")
            for p in a.points:
                lines.append(
                    f"{p.param:>7} {_cell(p.edge_p, 5, 2)} {p.n:>6} {_cell(p.mean_rounds, 9, 2)} {_cell(p.sd_rounds, 7, 2)} "
                    f"{_cell(p.rounds_per_log2n, 8, 3)} {_cell(p.mean_beeps, 7, 3)} {p.censored_fraction:>9.3f}"
                )
            if a.fit_log and a.fit_log2:
                lines.append(f"  fit log2n:   slope={a.fit_log.slope:.4f} residual={a.fit_log.residual:.4f}")
                lines.append(f"  fit log2²n:  slope={a.fit_log2.slope:.4f} residual={a.fit_log2.residual:.4f}")
            if a.beep_bound is not None:
                mark = "OK" if a.within_beep_bound() else "EXCEEDED"
                lines.append(f"  beep bound:  {a.beep_bound:.3f} ({mark})")
        return "\n".join(lines)


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else repr(float(x))


def _cell(x: Optional[float], width: int, digits: int) -> str:
    return f"{'-':>{width}}" if x is None else f"{x:>{width}.{digits}f}"


# ============================================================
# 実行
# ============================================================
def run_trials(cfg: ExperimentConfig, a: int, j: int, start: int, stop: int) -> list[TrialRecord]:
    """アルゴリズム a・スイープ点 j の試行 start..stop-1"""
    spec = cfg.algorithms[a]
    program = spec.build()
    records = []
    for i in range(start, stop):
        g = cfg.graph(j, i)
        seed = cfg.run_seed(j, i)
        result = run(g, program, seed, max_rounds=cfg.max_rounds)
        if result.terminated:
            if spec.kind == "mis":
                verdict = check_mis(g, result.mis_members)
            else:
                verdict = check_coloring(g, result.colors)
            if not verdict:
                param, edge_p = cfg.points[j]
                logger.error(f"❌ 検証失敗: {spec.name} {cfg.family}:{param} p={edge_p} seed={seed} {verdict.reason}")
                raise VerificationFailure(seed, spec.name, cfg.family, param, verdict.reason, edge_p)
        records.append(TrialRecord(
            rounds=result.rounds_used,
            terminated=result.terminated,
            mean_beeps=result.mean_beeps,
            mean_second_signals=result.mean_second_signals,
            colors_used=result.colors_used,
            max_degree=g.max_degree,
        ))
    return records


def _run_chunk(args: tuple) -> list[TrialRecord]:
    return run_trials(*args)


def run_experiment(cfg: ExperimentConfig, jobs: int = 1,
                   progress: Optional[Callable[[str, PointStats], None]] = None) -> ExperimentReport:
    """全スイープ点 × 全アルゴリズム × trials 回を実行して集計（jobs に依らず同じ結果）"""
    tasks = []
    chunk = max(1, math.ceil(cfg.trials / max(1, jobs)))
    for a in range(len(cfg.algorithms)):
        for j in range(len(cfg.points)):
            for start in range(0, cfg.trials, chunk):
                tasks.append((cfg, a, j, start, min(cfg.trials, start + chunk)))

    logger.info(f"🧪 実験開始: {cfg.name} ({len(cfg.algorithms)}アルゴリズム × {len(cfg.points)}点 × {cfg.trials}試行)")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_chunk, tasks))
    else:
        chunks = [_run_chunk(t) for t in tasks]

    # タスク順に連結するので集計順は固定
    grouped: dict[tuple[int, int], list[TrialRecord]] = {}
    for (_, a, j, _, _), records in zip(tasks, chunks):
        grouped.setdefault((a, j), []).extend(records)

    reports = []
    for a, spec in enumerate(cfg.algorithms):
        points = []
        for j, (param, edge_p) in enumerate(cfg.points):
            stats = PointStats.from_trials(cfg.family, param, cfg.vertex_count(j), grouped[(a, j)],
                                           coloring=spec.kind == "coloring",
                                           edge_p=edge_p if cfg.edge_ps else None)
            if stats.censored_fraction > 0:
                logger.warning(f"⚠️ {spec.name} {cfg.family}:{param} 打ち切り {stats.censored_fraction:.1%}")
            logger.info(f"  {spec.name} {cfg.family}:{param} n={stats.n} rounds={stats.mean_rounds} beeps={stats.mean_beeps}")
            if progress:
                progress(spec.name, stats)
            points.append(stats)
        reports.append(AlgorithmReport.build(spec, points))

    logger.info(f"🏁 実験完了: {cfg.name}")
    return ExperimentReport(cfg, tuple(reports))


# ============================================================
# プリセット
# ============================================================
def preset_paper_gnp(trials: int = 100, seed: int = 0) -> ExperimentConfig:
    """G(n, 1/2), n = 20..200、p0 = 1/2、f = 2"""
    return ExperimentConfig(
        name="paper-gnp",
        family="gnp",
        sweep=tuple(range(20, 201, 20)),
        algorithms=(AlgorithmSpec("mis-feedback"),),
        edge_p=0.5,
        trials=trials,
        master_seed=seed,
    )


def preset_lower_bound_separation(trials: int = 500, seed: int = 0) -> ExperimentConfig:
    """
    クリーク族 m = 3..12 でフィードバック版とグローバル版（phased:√2）を同じグラフ・シードで比較。
    グローバル版の rounds / log2 n は m とともに伸び、フィードバック版は log2 n の直線に乗る。
    判定は点ごとの平均で行うので試行数を少なくすると揺らぐ
    """
    return ExperimentConfig(
        name="lower-bound",
        family="cliques",
        sweep=tuple(range(3, 13)),
        algorithms=(AlgorithmSpec("mis-feedback"), AlgorithmSpec("mis-global", schedule=BASELINE_SCHEDULE)),
        trials=trials,
        master_seed=seed,
    )


def preset_gnp_compare(trials: int = 100, seed: int = 0) -> ExperimentConfig:
    """G(n, 1/2) でフィードバック版とグローバル版を同じグラフ・シードで比較（平均ビープ数も並べる）"""
    algorithms = (AlgorithmSpec("mis-feedback"), AlgorithmSpec("mis-global", schedule=BASELINE_SCHEDULE))
    return replace(preset_paper_gnp(trials, seed), name="gnp-compare", algorithms=algorithms)


def preset_coloring_delta(trials: int = 100, seed: int = 0) -> ExperimentConfig:
    """K_{Δ+1}, Δ ∈ {5, 10, 20, 40}"""
    return ExperimentConfig(
        name="coloring-delta",
        family="complete",
        sweep=(6, 11, 21, 41),
        algorithms=(AlgorithmSpec("coloring-feedback"),),
        trials=trials,
        master_seed=seed,
    )


def preset_coloring_gnp(trials: int = 100, seed: int = 0) -> ExperimentConfig:
    return replace(preset_paper_gnp(trials, seed), name="coloring-gnp",
                   algorithms=(AlgorithmSpec("coloring-feedback"),))


def preset_coloring_gnp_density(trials: int = 50, seed: int = 0) -> ExperimentConfig:
    """n = 100 固定で辺確率を変える（色数と最大次数の関係を見る）"""
    return ExperimentConfig(
        name="coloring-gnp-density",
        family="gnp",
        sweep=(100,),
        algorithms=(AlgorithmSpec("coloring-feedback"),),
        edge_ps=(0.1, 0.2, 0.3, 0.5, 0.7, 0.9),
        trials=trials,
        master_seed=seed,
    )


def preset_beep_bound(trials: int = 1000, seed: int = 0) -> ExperimentConfig:
    """G(100, 1/2) で (f1, f2) = (2, 2) と (1.5, 3)（f は毎ラウンド一様）"""
    return ExperimentConfig(
        name="beep-bound",
        family="gnp",
        sweep=(100,),
        algorithms=(
            AlgorithmSpec("mis-feedback", MisParams(f1=2.0, f2=2.0)),
            AlgorithmSpec("mis-feedback", MisParams(f1=1.5, f2=3.0, f_rule="uniform")),
        ),
        trials=trials,
        master_seed=seed,
    )


def preset_ring(trials: int = 100, seed: int = 0) -> ExperimentConfig:
    return ExperimentConfig(
        name="ring",
        family="ring",
        sweep=(16, 32, 64, 128, 256, 512),
        algorithms=(AlgorithmSpec("mis-feedback"),),
        trials=trials,
        master_seed=seed,
    )


PRESETS: dict[str, Callable[..., ExperimentConfig]] = {
    "paper-gnp": preset_paper_gnp,
    "lower-bound": preset_lower_bound_separation,
    "gnp-compare": preset_gnp_compare,
    "coloring-delta": preset_coloring_delta,
    "coloring-gnp": preset_coloring_gnp,
    "coloring-gnp-density": preset_coloring_gnp_density,
    "beep-bound": preset_beep_bound,
    "ring": preset_ring,
}


def get_preset(name: str, seed: int, trials: Optional[int] = None) -> ExperimentConfig:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r} (expected one of {', '.join(PRESETS)})")
    kwargs = {"seed": seed}
    if trials is not None:
        kwargs["trials"] = trials
    return PRESETS[name](**kwargs)

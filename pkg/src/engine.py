"""
シミュレーションエンジン：同期ロックステップ（1ラウンド = 2回の交換）

各交換では
  1. 全アクティブノードの送信判断を交換前の状態から計算
  2. その後で観測を配送
の2段階で進める。ノードロジックに渡るのは MisObservation / ColorObservation だけで、
送信者の数や識別子は見えない（匿名・衝突検知のみのビーピングモデル）。

乱数: ノード v のストリームは SeedSequence(master_seed).spawn(n)[v] 由来。
消費順（ノードごと、固定）:
  - init_rule=uniform のときのみ初期化時に1回
  - 毎ラウンド: 送信判定1回 → f_rule=uniform のときのみ f を1回
エンジンの反復順に依存しないので、順序を入れ替えても RunResult は同一になる。
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Hashable, Iterable, Optional, Protocol, Sequence

import numpy as np
import scipy.sparse as sp

from .graph import Graph, SEED_MASK

logger = logging.getLogger(__name__)

DEFAULT_MAX_ROUNDS = 10_000


class SimulationError(RuntimeError):
    pass


class RoundPhase(Enum):
    """1ラウンド内の交換。値はトランスクリプトのキー"""
    FIRST_EXCHANGE = "first_exchange"
    SECOND_EXCHANGE = "second_exchange"


@dataclass(frozen=True)
class MisObservation:
    """少なくとも1つの隣接ノードがビープしたか（数も送信元も分からない）"""
    heard_beep: bool


@dataclass(frozen=True)
class ColorObservation:
    """この交換で1つ以上の隣接ノードが送った色の集合（色ごとの有無のみ）"""
    colors_heard: frozenset[int] = frozenset()


class Randomness(Protocol):
    def random(self) -> float: ...


class NodeProgram(Protocol):
    """
    ノードごとのアルゴリズム。状態は不変値で、各メソッドは新しい状態を返す。
    signal は "beep"（メッセージ = True）か "color"（メッセージ = 色番号）
    """
    kind: str
    signal: str

    def init(self, rng: Randomness) -> Any: ...

    def first_send(self, state: Any, t: int, rng: Randomness) -> tuple[Any, Optional[Hashable]]: ...

    def first_receive(self, state: Any, t: int, obs: Any, rng: Randomness) -> Any: ...

    def second_send(self, state: Any, t: int) -> tuple[Any, Optional[Hashable]]: ...

    def second_receive(self, state: Any, t: int, obs: Any) -> Any: ...

    def outcome(self, state: Any) -> Any: ...


# ============================================================
# 乱数ポリシー
# ============================================================
@dataclass(frozen=True)
class RngPolicy:
    """master_seed と ノード添字 から各ノードの独立ストリームを導出する"""
    master_seed: int

    def node_streams(self, n: int) -> list[np.random.Generator]:
        root = np.random.SeedSequence(self.master_seed & SEED_MASK)
        return [np.random.Generator(np.random.PCG64(child)) for child in root.spawn(n)]


def derive_seed(master_seed: int, *keys: int) -> int:
    """(master, j, i, ...) から64bitシードを導出"""
    ss = np.random.SeedSequence(master_seed & SEED_MASK, spawn_key=tuple(keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


# ============================================================
# 観測の配送
# ============================================================
def observe_beeps(adjacency: sp.csr_matrix, senders: Sequence[int]) -> np.ndarray:
    """各ノードについて「送信した隣接ノードが1つ以上いたか」（疎行列 × 送信ベクトル）"""
    sent = np.zeros(adjacency.shape[0], dtype=np.int32)
    sent[list(senders)] = 1
    return adjacency @ sent > 0


def observe_colors(adjacency: sp.csr_matrix, messages: dict[int, int]) -> dict[int, np.ndarray]:
    """色ごとに「その色を送った隣接ノードがいたか」"""
    by_color: dict[int, list[int]] = {}
    for v, c in messages.items():
        by_color.setdefault(c, []).append(v)
    return {c: observe_beeps(adjacency, vs) for c, vs in sorted(by_color.items())}


def build_observations(signal: str, adjacency: sp.csr_matrix, messages: dict[int, Hashable],
                       receivers: Iterable[int]) -> dict[int, Any]:
    if signal == "beep":
        heard = observe_beeps(adjacency, sorted(messages))
        return {v: MisObservation(heard_beep=bool(heard[v])) for v in receivers}
    heard_by_color = observe_colors(adjacency, messages)
    return {
        v: ColorObservation(frozenset(c for c, heard in heard_by_color.items() if heard[v]))
        for v in receivers
    }


# ============================================================
# 結果
# ============================================================
@dataclass(frozen=True)
class RunResult:
    """1回のシミュレーションの全結果"""
    kind: str                               # "mis" / "coloring"
    outcome: tuple                          # MIS: bool / 色: int or None
    rounds_used: int
    beeps_per_node: tuple[int, ...]         # 第1交換での送信回数
    second_exchange_signals_per_node: tuple[int, ...]
    terminated: bool
    seed: int
    transcript: Optional[tuple[dict, ...]] = None
    weight_trace: Optional[tuple[dict, ...]] = None

    @property
    def time_steps(self) -> int:
        return 2 * self.rounds_used

    @property
    def n(self) -> int:
        return len(self.outcome)

    @property
    def mis_members(self) -> set[int]:
        return {v for v, member in enumerate(self.outcome) if member}

    @property
    def colors(self) -> tuple[Optional[int], ...]:
        return self.outcome

    @property
    def colors_used(self) -> int:
        return len({c for c in self.outcome if c is not None}) if self.kind == "coloring" else 0

    @property
    def mean_beeps(self) -> float:
        return sum(self.beeps_per_node) / len(self.beeps_per_node)

    @property
    def mean_second_signals(self) -> float:
        return sum(self.second_exchange_signals_per_node) / len(self.second_exchange_signals_per_node)

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "seed": self.seed,
            "terminated": self.terminated,
            "rounds_used": self.rounds_used,
            "time_steps": self.time_steps,
            "mean_beeps": self.mean_beeps,
            "beeps_per_node": list(self.beeps_per_node),
            "second_exchange_signals_per_node": list(self.second_exchange_signals_per_node),
        }
        if self.kind == "mis":
            d["members"] = sorted(self.mis_members)
        else:
            d["colors"] = list(self.outcome)
            d["colors_used"] = self.colors_used
        if self.weight_trace is not None:
            d["weight_trace"] = list(self.weight_trace)
        return d


# ============================================================
# シミュレータ本体
# ============================================================
class BeepingSimulator:
    """
    1回分の実行状態を持つ。run() で終了か max_rounds まで進める。
    order はエンジン内部の反復順（テスト用）。結果には影響しない。
    """

    def __init__(self, graph: Graph, program: NodeProgram, master_seed: int, *,
                 diagnostics: bool = False, transcript: bool = False,
                 order: Optional[Sequence[int]] = None):
        self.graph = graph
        self.program = program
        self.seed = master_seed & SEED_MASK
        self.diagnostics = diagnostics
        self.order = list(order) if order is not None else list(range(graph.n))
        if sorted(self.order) != list(range(graph.n)):
            raise SimulationError("order must be a permutation of the nodes")

        self._rngs = RngPolicy(self.seed).node_streams(graph.n)
        self.states: list[Any] = [None] * graph.n
        for v in self.order:
            self.states[v] = program.init(self._rngs[v])

        self.round = 0
        self.beeps = [0] * graph.n
        self.second_signals = [0] * graph.n
        self._transcript: Optional[list[dict]] = [] if transcript else None
        self._weights: Optional[list[dict]] = [] if diagnostics else None

    @property
    def active_nodes(self) -> list[int]:
        return [v for v in self.order if self.states[v].active]

    def neighborhood_weight(self, v: int) -> float:
        """μ_t(Γ(v)): アクティブな隣接ノードの現在の送信確率の和（非アクティブは0）"""
        if not self.diagnostics:
            raise SimulationError("neighborhood_weight requires diagnostics=True")
        return float(sum(self.states[u].p for u in self.graph.neighbors(v) if self.states[u].active))

    def _record_weights(self, active: list[int]):
        weights = [self.neighborhood_weight(v) for v in sorted(active)]
        self._weights.append({
            "round": self.round,
            "total_weight": float(sum(self.states[v].p for v in active)),
            "max_neighborhood_weight": max(weights) if weights else 0.0,
        })

    def _exchange(self, phase: RoundPhase, t: int, active: list[int]) -> dict[int, Hashable]:
        """送信判断を交換前の状態だけから全員分計算し、その後で観測を配送する"""
        program = self.program
        first = phase is RoundPhase.FIRST_EXCHANGE
        counter = self.beeps if first else self.second_signals

        sent: dict[int, Hashable] = {}
        for v in active:
            if first:
                self.states[v], msg = program.first_send(self.states[v], t, self._rngs[v])
            else:
                self.states[v], msg = program.second_send(self.states[v], t)
            if msg is not None:
                sent[v] = msg
                counter[v] += 1

        obs = build_observations(program.signal, self.graph.sparse, sent, active)
        for v in active:
            if first:
                self.states[v] = program.first_receive(self.states[v], t, obs[v], self._rngs[v])
            elif self.states[v].active:
                self.states[v] = program.second_receive(self.states[v], t, obs[v])
        return sent

    def step(self):
        """1ラウンド（第1交換 → 第2交換）"""
        self.round += 1
        t = self.round
        active = self.active_nodes

        if self._weights is not None:
            self._record_weights(active)

        sent = {phase: self._exchange(phase, t, active) for phase in RoundPhase}

        if self._transcript is not None:
            record = {"round": t}
            for phase, messages in sent.items():
                record[phase.value] = _events(self.program.signal, messages)
            record["finished"] = sorted(v for v in active if not self.states[v].active)
            if self._weights is not None:
                record["total_weight"] = self._weights[-1]["total_weight"]
                record["max_neighborhood_weight"] = self._weights[-1]["max_neighborhood_weight"]
            self._transcript.append(record)

    def run(self, max_rounds: int = DEFAULT_MAX_ROUNDS) -> RunResult:
        if max_rounds < 1:
            raise SimulationError(f"max_rounds must be >= 1, got {max_rounds}")
        while self.round < max_rounds and self.active_nodes:
            self.step()
        terminated = not self.active_nodes
        if not terminated:
            logger.debug(f"打ち切り: {max_rounds}ラウンドで未終了 (seed={self.seed})")
        return RunResult(
            kind=self.program.kind,
            outcome=tuple(self.program.outcome(s) for s in self.states),
            rounds_used=self.round,
            beeps_per_node=tuple(self.beeps),
            second_exchange_signals_per_node=tuple(self.second_signals),
            terminated=terminated,
            seed=self.seed,
            transcript=tuple(self._transcript) if self._transcript is not None else None,
            weight_trace=tuple(self._weights) if self._weights is not None else None,
        )


def _events(signal: str, sent: dict[int, Hashable]) -> list:
    if signal == "beep":
        return sorted(sent)
    return [[v, sent[v]] for v in sorted(sent)]


def run(graph: Graph, program: NodeProgram, master_seed: int,
        max_rounds: int = DEFAULT_MAX_ROUNDS, **options) -> RunResult:
    """グラフ・アルゴリズム・シードの純関数としての1回実行"""
    return BeepingSimulator(graph, program, master_seed, **options).run(max_rounds)

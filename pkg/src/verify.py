"""
検証器と解析的オラクル

エンジンからは独立に Graph + 結果だけから判定する（エンジンのバグを検出できるように）。
"""
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .graph import Graph, gen_complete
from .engine import derive_seed, run
from .mis import GlobalMis
from .schedule import ConstantSchedule

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Verdict:
    """判定結果。bool として使える。失敗時は reason に最初の違反"""
    ok: bool
    reason: Optional[str] = None

    def __bool__(self):
        return self.ok

    def __str__(self):
        return "PASS" if self.ok else f"FAIL: {self.reason}"


PASS = Verdict(True)


@dataclass(frozen=True)
class Coloring:
    """ノードごとの色（1始まり）。未着色は None"""
    colors: tuple[Optional[int], ...]

    @classmethod
    def of(cls, colors: Iterable[Optional[int]]) -> "Coloring":
        return cls(tuple(colors))

    @property
    def total(self) -> bool:
        return all(c is not None for c in self.colors)

    @property
    def colors_used(self) -> int:
        return len({c for c in self.colors if c is not None})

    def __len__(self):
        return len(self.colors)

    def __getitem__(self, v: int) -> Optional[int]:
        return self.colors[v]


def _check_nodes(g: Graph, s: Iterable[int]) -> set[int]:
    nodes = set(s)
    for v in nodes:
        if not 0 <= v < g.n:
            raise ValueError(f"node {v} out of range 0..{g.n - 1}")
    return nodes


def _check_total(g: Graph, c: Coloring | Sequence[Optional[int]]) -> Coloring:
    if not isinstance(c, Coloring):
        c = Coloring.of(c)
    if len(c) != g.n:
        raise ValueError(f"coloring has {len(c)} entries for {g.n} nodes")
    if not c.total:
        missing = next(v for v, col in enumerate(c.colors) if col is None)
        raise ValueError(f"partial coloring: node {missing} has no colour")
    bad = next((v for v, col in enumerate(c.colors) if col < 1), None)
    if bad is not None:
        raise ValueError(f"node {bad} has non-positive colour {c[bad]}")
    return c


# ============================================================
# MIS
# ============================================================
def is_independent(g: Graph, s: Iterable[int]) -> bool:
    nodes = _check_nodes(g, s)
    return not any(u in nodes for v in nodes for u in g.neighbors(v))


def is_maximal_independent(g: Graph, s: Iterable[int]) -> bool:
    return bool(check_mis(g, s))


def check_mis(g: Graph, s: Iterable[int]) -> Verdict:
    nodes = _check_nodes(g, s)
    for v in sorted(nodes):
        for u in g.neighbors(v):
            if u in nodes:
                return Verdict(False, f"adjacent members {min(u, v)} and {max(u, v)}")
    for v in range(g.n):
        if v not in nodes and not any(u in nodes for u in g.neighbors(v)):
            return Verdict(False, f"node {v} could be added")
    return PASS


# ============================================================
# 彩色
# ============================================================
def is_proper_coloring(g: Graph, c: Coloring | Sequence[Optional[int]]) -> bool:
    c = _check_total(g, c)
    return all(c[u] != c[v] for u, v in g.edges())


def is_grundy_coloring(g: Graph, c: Coloring | Sequence[Optional[int]]) -> Verdict:
    """色 k のノードは色 1..k-1 の隣接ノードを全て持つ"""
    c = _check_total(g, c)
    for u, v in g.edges():
        if c[u] == c[v]:
            return Verdict(False, f"edge {u}-{v} is monochromatic (colour {c[u]})")
    for v in range(g.n):
        seen = {c[u] for u in g.neighbors(v)}
        for k in range(1, c[v]):
            if k not in seen:
                return Verdict(False, f"node {v} (colour {c[v]}) has no neighbour with colour {k}")
    return PASS


def check_coloring(g: Graph, c: Coloring | Sequence[Optional[int]]) -> Verdict:
    """Grundy かつ Δ+1 色以内"""
    try:
        c = _check_total(g, c)
    except ValueError as e:
        return Verdict(False, str(e))
    verdict = is_grundy_coloring(g, c)
    if not verdict:
        return verdict
    top = max(c.colors)
    if top > g.max_degree + 1:
        return Verdict(False, f"colour {top} exceeds Δ+1 = {g.max_degree + 1}")
    return PASS


def reference_greedy(g: Graph, order: Sequence[int]) -> Coloring:
    """順序どおりに、隣接ノードで未使用の最小色を割り当てる"""
    if sorted(order) != list(range(g.n)):
        raise ValueError("order must be a permutation of the nodes")
    colors: list[Optional[int]] = [None] * g.n
    for v in order:
        taken = {colors[u] for u in g.neighbors(v)}
        k = 1
        while k in taken:
            k += 1
        colors[v] = k
    return Coloring.of(colors)


# ============================================================
# 解析的オラクル
# ============================================================
def exactly_one_beep_prob(d: int, p: float) -> float:
    """K_d で全ノードが確率 p でビープしたとき、ちょうど1つだけがビープする確率 d·p·(1-p)^(d-1)"""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    return d * p * (1.0 - p) ** (d - 1)


def expected_beep_bound(f1: float, f2: float) -> float:
    """1ノードあたりの期待ビープ回数の上界 1 + f1/(f1-1) + ⌈log f2 / log f1⌉²·f2"""
    if not 1.0 < f1 <= f2:
        raise ValueError(f"need 1 < f1 <= f2, got f1={f1}, f2={f2}")
    # log4/log2 のような整数比が丸めで切り上がらないように
    k = math.ceil(math.log(f2) / math.log(f1) - 1e-12)
    return 1.0 + f1 / (f1 - 1.0) + k * k * f2


def estimate_single_round_success(d: int, p: float, trials: int, seed: int,
                                  batch: int = 200) -> float:
    """
    K_d 上の定数スケジュール p で、1ラウンド目に誰かがMISに入る頻度をエンジンで推定する。
    K_d を batch 個並べたグラフを1ラウンドだけ回し、各コピーを1試行として数える。
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    program = GlobalMis(ConstantSchedule(p))
    successes = 0
    done = 0
    j = 0
    while done < trials:
        copies = min(batch, trials - done)
        g = _disjoint_cliques(d, copies)
        result = run(g, program, derive_seed(seed, j), max_rounds=1)
        members = result.mis_members
        successes += sum(1 for k in range(copies) if any(k * d + i in members for i in range(d)))
        done += copies
        j += 1
    return successes / trials


def _disjoint_cliques(d: int, copies: int) -> Graph:
    if copies == 1:
        return gen_complete(d)
    k = gen_complete(d)
    edges = [(b * d + u, b * d + v) for b in range(copies) for u, v in k.edges()]
    return Graph.from_edges(d * copies, edges)

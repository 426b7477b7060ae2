"""
グラフ表現：無向単純グラフ / 生成器 / エッジリスト入出力

ノードは 0..n-1 の添字。添字は保存用であり、アルゴリズム側には渡さない（匿名性はエンジンが担保）。
生成後は不変なので、試行ワーカー間で共有して問題ない。
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np
import scipy.sparse as sp

logger = logging.getLogger(__name__)

SEED_MASK = (1 << 64) - 1


class GraphFormatError(ValueError):
    """エッジリストの解析エラー（行番号つき）"""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Graph:
    """無向単純グラフ。adjacency[v] は昇順の隣接ノード列"""
    n: int
    adjacency: tuple[tuple[int, ...], ...]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        neigh: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            neigh[u].add(v)
            neigh[v].add(u)
        return cls(n=n, adjacency=tuple(tuple(sorted(s)) for s in neigh))

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @property
    def max_degree(self) -> int:
        return max(len(a) for a in self.adjacency)

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def edges(self) -> list[tuple[int, int]]:
        """u < v の辞書順"""
        return [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]

    @cached_property
    def sparse(self) -> sp.csr_matrix:
        """隣接行列（CSR, int32）。エンジンの観測計算用。メモリは O(n + 辺数)"""
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum([len(a) for a in self.adjacency], out=indptr[1:])
        indices = np.fromiter((u for adj in self.adjacency for u in adj), dtype=np.int32, count=int(indptr[-1]))
        data = np.ones(indices.size, dtype=np.int32)
        return sp.csr_matrix((data, indices, indptr), shape=(self.n, self.n))

    def __repr__(self):
        return f"<Graph n={self.n} m={self.edge_count} Δ={self.max_degree}>"


# ============================================================
# 生成器
# ============================================================
def gen_gnp(n: int, p: float, seed: int) -> Graph:
    """G(n, p)。各ペアを独立に確率pで採用（シード固定で決定的）"""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    rng = np.random.default_rng(seed & SEED_MASK)
    rows, cols = np.triu_indices(n, k=1)
    keep = rng.random(rows.size) < p
    return Graph.from_edges(n, zip(rows[keep].tolist(), cols[keep].tolist()))


def gen_complete(n: int) -> Graph:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return Graph.from_edges(n, ((u, v) for u in range(n) for v in range(u + 1, n)))


def gen_ring(n: int) -> Graph:
    if n < 3:
        raise ValueError(f"ring requires n >= 3, got {n}")
    return Graph.from_edges(n, ((v, (v + 1) % n) for v in range(n)))


def gen_path(n: int) -> Graph:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return Graph.from_edges(n, ((v, v + 1) for v in range(n - 1)))


def gen_empty(n: int) -> Graph:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return Graph.from_edges(n, ())


def gen_clique_family(m: int) -> Graph:
    """d = 1..m の各 K_d を m 個ずつ並べた非連結和。頂点数 m²(m+1)/2"""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    edges = []
    base = 0
    for d in range(1, m + 1):
        for _ in range(m):
            edges.extend((base + i, base + j) for i in range(d) for j in range(i + 1, d))
            base += d
    return Graph.from_edges(base, edges)


def clique_family_size(m: int) -> int:
    return m * m * (m + 1) // 2


GENERATORS = ("gnp", "complete", "ring", "path", "cliques", "empty")


def generate(spec: str, seed: int = 0) -> Graph:
    """
    生成器スペックからグラフを作る
    例: "gnp:200,0.5" / "complete:4" / "ring:5" / "path:3" / "cliques:3" / "empty:2"
    """
    name, _, args = spec.partition(":")
    name = name.strip().lower()
    parts = [a.strip() for a in args.split(",")] if args else []
    try:
        if name == "gnp" and len(parts) == 2:
            return gen_gnp(int(parts[0]), float(parts[1]), seed)
        if len(parts) == 1:
            k = int(parts[0])
            if name == "complete":
                return gen_complete(k)
            if name == "ring":
                return gen_ring(k)
            if name == "path":
                return gen_path(k)
            if name == "cliques":
                return gen_clique_family(k)
            if name == "empty":
                return gen_empty(k)
    except ValueError as e:
        raise ValueError(f"bad generator spec {spec!r}: {e}") from e
    raise ValueError(f"bad generator spec {spec!r} (expected one of {', '.join(GENERATORS)})")


# ============================================================
# エッジリスト入出力
# 1行目 = n、以降 "u v"（0 <= u < v < n）
# ============================================================
def save_edge_list(g: Graph) -> str:
    lines = [str(g.n)]
    lines.extend(f"{u} {v}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def load_edge_list(text: str) -> Graph:
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise GraphFormatError(1, "missing node count header")
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise GraphFormatError(1, f"bad node count {lines[0].strip()!r}") from None
    if n < 1:
        raise GraphFormatError(1, f"node count must be >= 1, got {n}")

    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(lines[1:], start=2):
        tokens = raw.split()
        if not tokens:
            continue
        if len(tokens) != 2:
            raise GraphFormatError(lineno, f"expected 'u v', got {raw.strip()!r}")
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise GraphFormatError(lineno, f"non-integer node in {raw.strip()!r}") from None
        if u == v:
            raise GraphFormatError(lineno, f"self-loop at node {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(lineno, f"node index out of range 0..{n - 1}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(lineno, f"duplicate edge {key[0]} {key[1]}")
        seen.add(key)
    return Graph.from_edges(n, seen)


def read_graph(path: str | Path) -> Graph:
    g = load_edge_list(Path(path).read_text(encoding="utf-8"))
    logger.debug(f"グラフ読込: {path} {g!r}")
    return g


def write_graph(path: str | Path, g: Graph):
    Path(path).write_text(save_edge_list(g), encoding="utf-8")
    logger.info(f"グラフ保存: {path} (n={g.n}, m={g.edge_count})")

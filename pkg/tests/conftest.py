import itertools

from hypothesis import strategies as st

from src.graph import Graph


class ScriptedRng:
    """random() が決められた値を順に返す"""

    def __init__(self, *values: float):
        self.values = list(values)

    def random(self) -> float:
        if not self.values:
            raise AssertionError("scripted randomness exhausted")
        return self.values.pop(0)


@st.composite
def graphs(draw: st.DrawFn, min_n: int = 1, max_n: int = 12) -> Graph:
    n = draw(st.integers(min_value=min_n, max_value=max_n))
    pairs = list(itertools.combinations(range(n), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph.from_edges(n, (e for e, keep in zip(pairs, mask) if keep))


def brute_force_maximal_sets(g: Graph) -> list[set[int]]:
    """全部分集合から極大独立集合を列挙（n <= 10 用）"""
    independent = []
    for mask in range(1 << g.n):
        s = {v for v in range(g.n) if mask >> v & 1}
        if all(u not in s for v in s for u in g.neighbors(v)):
            independent.append(s)
    return [s for s in independent if not any(s < t for t in independent)]

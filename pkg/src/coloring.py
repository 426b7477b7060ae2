"""
分散貪欲彩色のノードロジック

各ラウンド:
  第1交換: S にない最小の色 c を確率 p で送信。
           隣接ノードが同じ c を送っていたら Trying ← False, p ← p/f、そうでなければ p ← min(fp, 1)
  第2交換: Trying なら c を送信して確定・終了。受信した色は全て S に追加。
確率パラメータは MIS と同じ MisParams を使う。
"""
import logging
from dataclasses import dataclass, replace
from typing import Optional

from .engine import ColorObservation, Randomness
from .mis import MisParams, params_dict

logger = logging.getLogger(__name__)


def smallest_available(forbidden: frozenset[int] | set[int]) -> int:
    """forbidden にない最小の正整数"""
    c = 1
    while c in forbidden:
        c += 1
    return c


@dataclass(frozen=True)
class NodeColorState:
    p: float
    trying: bool = False
    forbidden: frozenset[int] = frozenset()
    active: bool = True
    assigned: Optional[int] = None
    candidate: int = 1


@dataclass(frozen=True)
class ColorActions:
    sent: Optional[int]         # 第1交換で送った色
    signalled: Optional[int]    # 第2交換で送った色
    assigned: Optional[int]


def offer_color(state: NodeColorState, rng: Randomness) -> tuple[NodeColorState, Optional[int]]:
    c = smallest_available(state.forbidden)
    state = replace(state, candidate=c)
    if rng.random() < state.p:
        return replace(state, trying=True), c
    return state, None


def color_feedback(state: NodeColorState, f: float, obs: ColorObservation) -> NodeColorState:
    # 自分の候補色だけに反応する
    if state.candidate in obs.colors_heard:
        return replace(state, trying=False, p=state.p / f)
    return replace(state, p=min(f * state.p, 1.0))


def commit_if_trying(state: NodeColorState) -> tuple[NodeColorState, Optional[int]]:
    if state.trying:
        return replace(state, assigned=state.candidate, active=False), state.candidate
    return state, None


def absorb_colors(state: NodeColorState, obs: ColorObservation) -> NodeColorState:
    # 終了済みノードの観測は捨てる
    if not state.active or not obs.colors_heard:
        return state
    return replace(state, forbidden=state.forbidden | obs.colors_heard)


def coloring_round(state: NodeColorState, params: MisParams, obs1: ColorObservation,
                   obs2: ColorObservation, rng: Randomness) -> tuple[NodeColorState, ColorActions]:
    if not state.active:
        raise ValueError("node is inactive")
    s, sent = offer_color(state, rng)
    s = color_feedback(s, params.draw_f(rng), obs1)
    s, signalled = commit_if_trying(s)
    s = absorb_colors(s, obs2)
    return s, ColorActions(sent=sent, signalled=signalled, assigned=s.assigned)


class FeedbackColoring:
    kind = "coloring"
    signal = "color"
    name = "coloring-feedback"

    def __init__(self, params: Optional[MisParams] = None):
        self.params = params or MisParams()

    def init(self, rng: Randomness) -> NodeColorState:
        return NodeColorState(p=self.params.initial_p(rng))

    def first_send(self, state, t, rng):
        return offer_color(state, rng)

    def first_receive(self, state, t, obs, rng):
        return color_feedback(state, self.params.draw_f(rng), obs)

    def second_send(self, state, t):
        return commit_if_trying(state)

    def second_receive(self, state, t, obs):
        return absorb_colors(state, obs)

    def outcome(self, state: NodeColorState) -> Optional[int]:
        return state.assigned

    def describe(self) -> dict:
        return {"algorithm": self.name, **params_dict(self.params)}

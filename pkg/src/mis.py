"""
MIS選択のノードロジック
  - FeedbackMis: 隣接ノードのビープを聞いたら p/f、聞かなければ min(fp, 1)
  - GlobalMis:   全ノード共通のスケジュール p_t を使う（観測で p を変えない）

状態は不変値。各フェーズ関数は新しい状態を返す。
"""
import logging
from dataclasses import dataclass, replace
from typing import Optional

from .engine import MisObservation, Randomness
from .schedule import Schedule

logger = logging.getLogger(__name__)

INIT_RULES = ("fixed", "uniform")
F_RULES = ("fixed", "uniform")


@dataclass(frozen=True)
class MisParams:
    """
    p0: 初期確率の下限 / f1, f2: 変化率の下限・上限（1 < f1 <= f2）
    init_rule: fixed → 全ノード p0、uniform → [p0, 1] から一様
    f_rule:    fixed → 常に f1、uniform → 毎ラウンド [f1, f2] から一様
    """
    p0: float = 0.5
    f1: float = 2.0
    f2: float = 2.0
    init_rule: str = "fixed"
    f_rule: str = "fixed"

    def __post_init__(self):
        if not 0.0 < self.p0 <= 1.0:
            raise ValueError(f"p0 must be in (0, 1], got {self.p0}")
        if not 1.0 < self.f1 <= self.f2:
            raise ValueError(f"need 1 < f1 <= f2, got f1={self.f1}, f2={self.f2}")
        if self.init_rule not in INIT_RULES:
            raise ValueError(f"init_rule must be one of {INIT_RULES}, got {self.init_rule!r}")
        if self.f_rule not in F_RULES:
            raise ValueError(f"f_rule must be one of {F_RULES}, got {self.f_rule!r}")

    def initial_p(self, rng: Randomness) -> float:
        if self.init_rule == "uniform":
            return self.p0 + (1.0 - self.p0) * rng.random()
        return self.p0

    def draw_f(self, rng: Randomness) -> float:
        if self.f_rule == "uniform":
            return self.f1 + (self.f2 - self.f1) * rng.random()
        return self.f1


@dataclass(frozen=True)
class NodeMisState:
    p: float
    trying: bool = False
    active: bool = True
    in_mis: bool = False


@dataclass(frozen=True)
class MisActions:
    """1ラウンドでノードが取った行動"""
    beeped: bool
    signalled: bool
    joined: bool
    retired: bool


# ============================================================
# フェーズ関数
# ============================================================
def beep(state: NodeMisState, rng: Randomness) -> tuple[NodeMisState, bool]:
    """第1交換: 確率 p で Trying ← True としてビープ"""
    if rng.random() < state.p:
        return replace(state, trying=True), True
    return state, False


def feedback_update(state: NodeMisState, f: float, obs: MisObservation) -> NodeMisState:
    if obs.heard_beep:
        return replace(state, trying=False, p=state.p / f)
    return replace(state, p=min(f * state.p, 1.0))


def join_if_trying(state: NodeMisState) -> tuple[NodeMisState, bool]:
    """第2交換: Trying なら送信してMISに参加・終了"""
    if state.trying:
        return replace(state, active=False, in_mis=True), True
    return state, False


def retire_if_heard(state: NodeMisState, obs: MisObservation) -> NodeMisState:
    if state.active and obs.heard_beep:
        return replace(state, active=False)
    return state


def _actions(before: NodeMisState, beeped: bool, signalled: bool, after: NodeMisState) -> MisActions:
    return MisActions(
        beeped=beeped,
        signalled=signalled,
        joined=after.in_mis and not before.in_mis,
        retired=before.active and not after.active and not after.in_mis,
    )


def feedback_mis_round(state: NodeMisState, params: MisParams, obs1: MisObservation,
                       obs2: MisObservation, rng: Randomness) -> tuple[NodeMisState, MisActions]:
    """フィードバック版の1ラウンド（観測を外から与える形）"""
    if not state.active:
        raise ValueError("node is inactive")
    s, beeped = beep(state, rng)
    s = feedback_update(s, params.draw_f(rng), obs1)
    s, signalled = join_if_trying(s)
    s = retire_if_heard(s, obs2)
    return s, _actions(state, beeped, signalled, s)


def global_mis_round(state: NodeMisState, schedule: Schedule, t: int, obs1: MisObservation,
                     obs2: MisObservation, rng: Randomness) -> tuple[NodeMisState, MisActions]:
    """グローバル版の1ラウンド。ラウンド t は p_t で送信し、終了後 p ← p_{t+1}"""
    if not state.active:
        raise ValueError("node is inactive")
    s, beeped = beep(replace(state, p=schedule(t)), rng)
    if obs1.heard_beep:
        s = replace(s, trying=False)
    s = replace(s, p=schedule(t + 1))
    s, signalled = join_if_trying(s)
    s = retire_if_heard(s, obs2)
    return s, _actions(state, beeped, signalled, s)


# ============================================================
# エンジン用ノードプログラム
# ============================================================
class FeedbackMis:
    kind = "mis"
    signal = "beep"
    name = "mis-feedback"

    def __init__(self, params: Optional[MisParams] = None):
        self.params = params or MisParams()

    def init(self, rng: Randomness) -> NodeMisState:
        return NodeMisState(p=self.params.initial_p(rng))

    def first_send(self, state, t, rng):
        state, sent = beep(state, rng)
        return state, (True if sent else None)

    def first_receive(self, state, t, obs, rng):
        return feedback_update(state, self.params.draw_f(rng), obs)

    def second_send(self, state, t):
        state, sent = join_if_trying(state)
        return state, (True if sent else None)

    def second_receive(self, state, t, obs):
        return retire_if_heard(state, obs)

    def outcome(self, state: NodeMisState) -> bool:
        return state.in_mis

    def describe(self) -> dict:
        return {"algorithm": self.name, **params_dict(self.params)}


class GlobalMis:
    kind = "mis"
    signal = "beep"
    name = "mis-global"

    def __init__(self, schedule: Schedule):
        self.schedule = schedule

    def init(self, rng: Randomness) -> NodeMisState:
        # 全ノード同じ p0 = p_1
        return NodeMisState(p=self.schedule(1))

    def first_send(self, state, t, rng):
        state, sent = beep(state, rng)
        return state, (True if sent else None)

    def first_receive(self, state, t, obs, rng):
        if obs.heard_beep:
            state = replace(state, trying=False)
        return replace(state, p=self.schedule(t + 1))

    def second_send(self, state, t):
        state, sent = join_if_trying(state)
        return state, (True if sent else None)

    def second_receive(self, state, t, obs):
        return retire_if_heard(state, obs)

    def outcome(self, state: NodeMisState) -> bool:
        return state.in_mis

    def describe(self) -> dict:
        return {"algorithm": self.name, "schedule": self.schedule.spec()}


def params_dict(params: MisParams) -> dict:
    return {
        "p0": params.p0,
        "f1": params.f1,
        "f2": params.f2,
        "init_rule": params.init_rule,
        "f_rule": params.f_rule,
    }

"""アルゴリズム設定（CLI / 設定ファイル / 実験プリセット共通）"""
from dataclasses import dataclass, field
from typing import Optional

from .coloring import FeedbackColoring
from .engine import NodeProgram
from .mis import FeedbackMis, GlobalMis, MisParams
from .schedule import DEFAULT_SCHEDULE, parse_schedule

ALGORITHMS = ("mis-feedback", "mis-global", "coloring-feedback")


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str = "mis-feedback"
    params: MisParams = field(default_factory=MisParams)
    schedule: Optional[str] = None

    def __post_init__(self):
        if self.name not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.name!r} (expected one of {', '.join(ALGORITHMS)})")
        if self.name == "mis-global":
            # "ramp:2" と "ramp:2.0" を同じ値として扱う（レポートからの再生成で等しくなる）
            canonical = parse_schedule(self.schedule or DEFAULT_SCHEDULE).spec()
            object.__setattr__(self, "schedule", canonical)

    @property
    def kind(self) -> str:
        return "coloring" if self.name.startswith("coloring") else "mis"

    @property
    def is_feedback(self) -> bool:
        return self.name != "mis-global"

    def build(self) -> NodeProgram:
        if self.name == "mis-feedback":
            return FeedbackMis(self.params)
        if self.name == "mis-global":
            return GlobalMis(parse_schedule(self.schedule or DEFAULT_SCHEDULE))
        return FeedbackColoring(self.params)

    def to_dict(self) -> dict:
        return self.build().describe()

    @classmethod
    def from_dict(cls, d: dict) -> "AlgorithmSpec":
        name = d.get("algorithm", "mis-feedback")
        if name == "mis-global":
            return cls(name=name, schedule=d.get("schedule") or DEFAULT_SCHEDULE)
        params = MisParams(
            p0=float(d.get("p0", 0.5)),
            f1=float(d.get("f1", 2.0)),
            f2=float(d.get("f2", d.get("f1", 2.0))),
            init_rule=d.get("init_rule", "fixed"),
            f_rule=d.get("f_rule", "fixed"),
        )
        return cls(name=name, params=params)

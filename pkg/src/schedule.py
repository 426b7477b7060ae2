"""
グローバル確率スケジュール：全ノード共通の p_1, p_2, ...（観測に依存しない）

文字列スペック:
  constant:0.5           常に0.5
  sequence:0.1,0.2,0.5   列挙した値の後は最後の値を繰り返す
  geometric:0.01,2       p0·g^(t-1)、1で頭打ち（1回きりの上昇）
  ramp:2                 段階 k=1,2,... ごとに g^-k, g^-k+1, ..., g^-1 と上げ直す
  phased:1.5             ramp と同じ段階だが、段階 k では各値を k ラウンドずつ保つ（段階の長さ k²）
"""
import math
import sys
from dataclasses import dataclass

# g^-k のアンダーフローで 0 にならないための下限
MIN_PROB = sys.float_info.min


class Schedule:
    """t >= 1 → p_t ∈ (0, 1]"""
    name = "schedule"

    def __call__(self, t: int) -> float:
        if t < 1:
            raise ValueError(f"round index must be >= 1, got {t}")
        return self._value(t)

    def _value(self, t: int) -> float:
        raise NotImplementedError

    def spec(self) -> str:
        raise NotImplementedError


def _check_prob(p: float) -> float:
    if not 0.0 < p <= 1.0:
        raise ValueError(f"schedule probability must be in (0, 1], got {p}")
    return p


@dataclass(frozen=True)
class ConstantSchedule(Schedule):
    p: float

    def __post_init__(self):
        _check_prob(self.p)

    def _value(self, t: int) -> float:
        return self.p

    def spec(self) -> str:
        return f"constant:{self.p!r}"


@dataclass(frozen=True)
class SequenceSchedule(Schedule):
    values: tuple[float, ...]

    def __post_init__(self):
        if not self.values:
            raise ValueError("sequence schedule needs at least one value")
        for p in self.values:
            _check_prob(p)

    def _value(self, t: int) -> float:
        return self.values[min(t, len(self.values)) - 1]

    def spec(self) -> str:
        return "sequence:" + ",".join(repr(p) for p in self.values)


@dataclass(frozen=True)
class GeometricSchedule(Schedule):
    start: float
    growth: float

    def __post_init__(self):
        _check_prob(self.start)
        if self.growth < 1.0:
            raise ValueError(f"geometric growth must be >= 1, got {self.growth}")

    def _value(self, t: int) -> float:
        # オーバーフロー回避: 1に届く段数を先に求める
        if self.growth == 1.0 or t - 1 < math.log(1.0 / self.start, self.growth):
            return min(self.start * self.growth ** (t - 1), 1.0)
        return 1.0

    def spec(self) -> str:
        return f"geometric:{self.start!r},{self.growth!r}"


@dataclass(frozen=True)
class RampSchedule(Schedule):
    """段階 k の長さは k。段階内で g^-k から g^-1 まで上げる"""
    growth: float = 2.0

    def __post_init__(self):
        if not self.growth > 1.0:
            raise ValueError(f"ramp growth must be > 1, got {self.growth}")

    def _value(self, t: int) -> float:
        # t が属する段階 k: 1+2+...+(k-1) < t <= k(k+1)/2
        k = math.ceil((math.sqrt(8 * t + 1) - 1) / 2)
        i = t - k * (k - 1) // 2          # 段階内の位置 1..k
        return max(self.growth ** (i - 1 - k), MIN_PROB)

    def spec(self) -> str:
        return f"ramp:{self.growth!r}"


@dataclass(frozen=True)
class PhasedSchedule(Schedule):
    """
    段階 k = 1, 2, ... で g^-k, g^-k+1, ..., g^-1 をそれぞれ k ラウンドずつ保つ。
    段階 k の長さは k²、段階 K の終わりまでで K(K+1)(2K+1)/6 ラウンド。
    比較実験のグローバル版はこれを使う
    """
    growth: float = math.sqrt(2.0)

    def __post_init__(self):
        if not self.growth > 1.0:
            raise ValueError(f"phased growth must be > 1, got {self.growth}")

    @staticmethod
    def phase_end(k: int) -> int:
        return k * (k + 1) * (2 * k + 1) // 6

    def _value(self, t: int) -> float:
        k = max(1, int(round((3 * t) ** (1 / 3))) - 1)
        while self.phase_end(k) < t:
            k += 1
        while k > 1 and self.phase_end(k - 1) >= t:
            k -= 1
        offset = t - self.phase_end(k - 1) - 1     # 0..k²-1
        level = k - offset // k                    # k → 1
        return max(self.growth ** -level, MIN_PROB)

    def spec(self) -> str:
        return f"phased:{self.growth!r}"


DEFAULT_SCHEDULE = "ramp:2"
BASELINE_SCHEDULE = f"phased:{math.sqrt(2.0)!r}"


def parse_schedule(spec: str) -> Schedule:
    name, _, args = spec.partition(":")
    name = name.strip().lower()
    try:
        values = tuple(float(a) for a in args.split(",")) if args.strip() else ()
    except ValueError:
        raise ValueError(f"bad schedule spec {spec!r}") from None

    if name == "constant" and len(values) == 1:
        return ConstantSchedule(values[0])
    if name == "sequence" and values:
        return SequenceSchedule(values)
    if name == "geometric" and len(values) == 2:
        return GeometricSchedule(values[0], values[1])
    if name == "ramp" and len(values) <= 1:
        return RampSchedule(*values)
    if name == "phased" and len(values) <= 1:
        return PhasedSchedule(*values)
    raise ValueError(
        f"bad schedule spec {spec!r} (constant:p | sequence:p1,p2,.. | geometric:p0,g | ramp:g | phased:g)"
    )

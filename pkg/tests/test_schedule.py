import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.schedule import (
    BASELINE_SCHEDULE, ConstantSchedule, GeometricSchedule, PhasedSchedule, RampSchedule, SequenceSchedule,
    parse_schedule,
)


def test_constant():
    s = ConstantSchedule(0.3)
    assert s(1) == s(1000) == 0.3


def test_sequence_repeats_last_value():
    s = SequenceSchedule((0.1, 0.2, 0.5))
    assert [s(t) for t in range(1, 6)] == [0.1, 0.2, 0.5, 0.5, 0.5]


def test_geometric_saturates():
    s = GeometricSchedule(0.125, 2.0)
    assert [s(t) for t in range(1, 6)] == [0.125, 0.25, 0.5, 1.0, 1.0]
    assert s(10**6) == 1.0


def test_ramp_restarts_each_phase():
    s = RampSchedule(2.0)
    assert [s(t) for t in range(1, 11)] == [
        0.5,
        0.25, 0.5,
        0.125, 0.25, 0.5,
        0.0625, 0.125, 0.25, 0.5,
    ]


@given(st.integers(min_value=1, max_value=10**6))
def test_ramp_stays_in_range(t):
    assert 0.0 < RampSchedule(2.0)(t) <= 0.5


def test_phased_holds_each_level_k_rounds():
    s = PhasedSchedule(2.0)
    assert [s(t) for t in range(1, 15)] == [
        0.5,
        0.25, 0.25, 0.5, 0.5,
        0.125, 0.125, 0.125, 0.25, 0.25, 0.25, 0.5, 0.5, 0.5,
    ]


@given(st.integers(min_value=1, max_value=40))
def test_phased_phase_layout(k):
    s = PhasedSchedule(2.0)
    start = PhasedSchedule.phase_end(k - 1) + 1
    values = [s(t) for t in range(start, PhasedSchedule.phase_end(k) + 1)]
    expected = [2.0 ** -level for level in range(k, 0, -1) for _ in range(k)]
    assert values == expected


@given(st.integers(min_value=1, max_value=10**6))
def test_phased_stays_in_range(t):
    assert 0.0 < PhasedSchedule()(t) < 1.0


@pytest.mark.parametrize("schedule", [RampSchedule(1e300), PhasedSchedule(1e300)])
def test_huge_growth_does_not_underflow_to_zero(schedule):
    assert all(0.0 < schedule(t) <= 1.0 for t in range(1, 60))


def test_round_index_starts_at_one():
    with pytest.raises(ValueError):
        ConstantSchedule(0.5)(0)


@pytest.mark.parametrize("spec, expected", [
    ("constant:0.5", ConstantSchedule(0.5)),
    ("sequence:0.1,0.2", SequenceSchedule((0.1, 0.2))),
    ("geometric:0.01,2", GeometricSchedule(0.01, 2.0)),
    ("ramp:2", RampSchedule(2.0)),
    ("ramp", RampSchedule()),
    ("phased:1.5", PhasedSchedule(1.5)),
    ("phased", PhasedSchedule()),
    (BASELINE_SCHEDULE, PhasedSchedule()),
])
def test_parse(spec, expected):
    assert parse_schedule(spec) == expected


@pytest.mark.parametrize("schedule", [
    ConstantSchedule(0.5), SequenceSchedule((0.1, 0.2)), GeometricSchedule(0.01, 2.0), RampSchedule(3.0),
    PhasedSchedule(1.5),
])
def test_spec_is_parseable(schedule):
    assert parse_schedule(schedule.spec()) == schedule


@pytest.mark.parametrize("spec", ["", "constant", "constant:0", "constant:1.5", "sequence:", "geometric:0.5",
                                  "geometric:0.5,0.5", "ramp:1", "ramp:a", "ramp:nan", "phased:1", "phased:0.5,2",
                                  "linear:0.5"])
def test_parse_rejects(spec):
    with pytest.raises(ValueError):
        parse_schedule(spec)

import pytest

from hasqoe import InterruptionEvent, SessionTrace, UsageError, ValidationError


def test_trace_coerces_to_tuples_and_floats() -> None:
    trace = SessionTrace([5, 4], [InterruptionEvent(1, 0.5)])
    assert trace.segments == (5.0, 4.0)
    assert isinstance(trace.segments, tuple)
    assert isinstance(trace.interruptions, tuple)


def test_trace_rejects_empty_segments() -> None:
    with pytest.raises(ValidationError, match="at least one segment"):
        SessionTrace(())


def test_trace_rejects_out_of_range_quality() -> None:
    with pytest.raises(ValidationError, match="segment 1 quality 7.0"):
        SessionTrace((3.0, 7.0))


def test_interruption_rejects_nonpositive_duration() -> None:
    with pytest.raises(ValidationError):
        InterruptionEvent(1, 0.0)
    with pytest.raises(ValidationError):
        InterruptionEvent(1, -2.5)


def test_interruption_before_first_segment_is_rejected() -> None:
    # stalls before playback starts are initial delay, which the model
    # does not cover
    with pytest.raises(ValidationError):
        InterruptionEvent(0, 1.0)


def test_interruption_index_bounds() -> None:
    SessionTrace((5.0, 4.0), (InterruptionEvent(2, 1.0),))  # after last segment: fine
    with pytest.raises(ValidationError, match="exceeds"):
        SessionTrace((5.0, 4.0), (InterruptionEvent(3, 1.0),))


def test_ground_truth_mos_range() -> None:
    assert SessionTrace((3.0,), ground_truth_mos=4.2).ground_truth_mos == 4.2
    with pytest.raises(ValidationError):
        SessionTrace((3.0,), ground_truth_mos=5.4)


def test_round_trip_through_dict() -> None:
    trace = SessionTrace(
        (4.0, 3.2, 5.0),
        (InterruptionEvent(1, 0.7), InterruptionEvent(3, 2.5)),
        ground_truth_mos=3.5,
        tag="multi-factor",
    )
    assert SessionTrace.from_dict(trace.to_dict()) == trace


def test_from_dict_structural_errors_are_usage_errors() -> None:
    with pytest.raises(UsageError, match="segments"):
        SessionTrace.from_dict({"interruptions": []})
    with pytest.raises(UsageError):
        SessionTrace.from_dict({"segments": "abc"})
    with pytest.raises(UsageError):
        SessionTrace.from_dict({"segments": [3.0], "interruptions": [{"duration_s": 1.0}]})
    with pytest.raises(UsageError):
        SessionTrace.from_dict({"segments": [3.0], "mos": "great"})


def test_from_dict_domain_errors_are_validation_errors() -> None:
    with pytest.raises(ValidationError):
        SessionTrace.from_dict({"segments": [9.0]})

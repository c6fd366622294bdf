"""Histogram model of streaming-session QoE.

A session is described by the per-segment quality values it played (MOS
units, continuous in [1, 5]) and by the playback interruptions it
suffered.  The model summarises a session as 22 normalized histogram
frequencies:

* 5 quality-level bins (share of segments played at each MOS level),
* 10 down-switch bins keyed by (starting level, drop amplitude),
* 1 grouped bin for quality maintaining and up-switches,
* 6 interruption-duration bins.

Predicted QoE is a weighted linear combination of those frequencies,
floored at 1.0 MOS.  ``paper_weights`` returns the published reference
weight set bundled with the package.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_left
from dataclasses import dataclass, field
from importlib import resources

from .errors import UsageError, ValidationError

MIN_MOS = 1.0
MAX_MOS = 5.0

#: Interruption-duration bin edges in seconds.  Bins are left-open,
#: right-closed: (0, 0.25], (0.25, 0.5], (0.5, 1], (1, 2], (2, 3], (3, inf).
DEFAULT_INTERRUPTION_EDGES: tuple[float, ...] = (0.25, 0.5, 1.0, 2.0, 3.0)

#: The (starting bin, amplitude bin) pairs a down-switch can land in.
#: From level i the deepest possible drop is to level 1, i.e. amplitude
#: -(i - 1); level 1 has no room to switch down at all.
DOWN_SWITCH_BINS: tuple[tuple[int, int], ...] = (
    (2, -1),
    (3, -2), (3, -1),
    (4, -3), (4, -2), (4, -1),
    (5, -4), (5, -3), (5, -2), (5, -1),
)

#: 5 quality weights + 10 down-switch weights + 1 grouped weight + 6
#: interruption weights.
N_PARAMETERS = 22


def _check_mos(value: float, label: str) -> float:
    value = float(value)
    if not math.isfinite(value) or not MIN_MOS <= value <= MAX_MOS:
        raise ValidationError(f"{label} {value!r} outside [{MIN_MOS}, {MAX_MOS}]")
    return value


@dataclass(frozen=True)
class InterruptionEvent:
    """A playback stall after ``after_segment`` segments, lasting ``duration_s``."""

    after_segment: int
    duration_s: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "after_segment", int(self.after_segment))
        object.__setattr__(self, "duration_s", float(self.duration_s))
        if self.after_segment < 1:
            # A stall before any playback is initial delay, which this
            # model does not cover.
            raise ValidationError(
                f"after_segment {self.after_segment} must be >= 1"
            )
        if not math.isfinite(self.duration_s) or self.duration_s <= 0.0:
            raise ValidationError(
                f"interruption duration {self.duration_s!r} must be a positive number"
            )

    def to_dict(self) -> dict:
        return {"after_segment": self.after_segment, "duration_s": self.duration_s}

    @classmethod
    def from_dict(cls, data: dict) -> "InterruptionEvent":
        if not isinstance(data, dict):
            raise UsageError(f"interruption record must be an object, got {data!r}")
        try:
            return cls(data["after_segment"], data["duration_s"])
        except KeyError as exc:
            raise UsageError(f"interruption record missing key {exc}") from None
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad interruption record {data!r}: {exc}") from None


@dataclass(frozen=True)
class SessionTrace:
    """One playback session: segment quality values plus interruptions.

    ``ground_truth_mos`` carries a subjective session rating when known.
    ``tag`` is free-form dataset metadata (e.g. ``"multi-factor"``) used
    by the evaluation protocol to select test pools.
    """

    segments: tuple[float, ...]
    interruptions: tuple[InterruptionEvent, ...] = ()
    ground_truth_mos: float | None = None
    tag: str | None = None

    def __post_init__(self) -> None:
        segments = tuple(float(q) for q in self.segments)
        object.__setattr__(self, "segments", segments)
        object.__setattr__(self, "interruptions", tuple(self.interruptions))
        if not segments:
            raise ValidationError("session must contain at least one segment")
        for k, q in enumerate(segments):
            _check_mos(q, f"segment {k} quality")
        for event in self.interruptions:
            if not isinstance(event, InterruptionEvent):
                raise ValidationError(f"interruption {event!r} is not an InterruptionEvent")
            if event.after_segment > len(segments):
                raise ValidationError(
                    f"after_segment {event.after_segment} exceeds "
                    f"segment count {len(segments)}"
                )
        if self.ground_truth_mos is not None:
            object.__setattr__(
                self,
                "ground_truth_mos",
                _check_mos(self.ground_truth_mos, "ground-truth MOS"),
            )

    def to_dict(self) -> dict:
        data: dict = {
            "segments": list(self.segments),
            "interruptions": [e.to_dict() for e in self.interruptions],
        }
        if self.ground_truth_mos is not None:
            data["mos"] = self.ground_truth_mos
        if self.tag is not None:
            data["tag"] = self.tag
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "SessionTrace":
        if not isinstance(data, dict):
            raise UsageError(f"session record must be an object, got {type(data).__name__}")
        if "segments" not in data:
            raise UsageError("session record missing 'segments'")
        segments = data["segments"]
        if not isinstance(segments, (list, tuple)):
            raise UsageError("'segments' must be an array of numbers")
        try:
            segments = tuple(float(q) for q in segments)
        except (TypeError, ValueError):
            raise UsageError("'segments' must be an array of numbers") from None
        raw_events = data.get("interruptions", [])
        if not isinstance(raw_events, (list, tuple)):
            raise UsageError("'interruptions' must be an array of objects")
        events = tuple(InterruptionEvent.from_dict(e) for e in raw_events)
        mos = data.get("mos")
        if mos is not None:
            try:
                mos = float(mos)
            except (TypeError, ValueError):
                raise UsageError(f"'mos' must be a number, got {mos!r}") from None
        tag = data.get("tag")
        if tag is not None and not isinstance(tag, str):
            raise UsageError(f"'tag' must be a string, got {tag!r}")
        return cls(segments, events, mos, tag)


@dataclass(frozen=True)
class BinningConfig:
    """Bin layout shared by feature extraction and prediction.

    The quality and amplitude axes use unit-wide half-open intervals
    [n - 0.5, n + 0.5); the layout is part of the 22-parameter model
    contract, so only the interruption edge values are tunable.
    """

    n_quality_bins: int = 5
    max_amplitude: int = 4
    half_width: float = 0.5
    interruption_edges: tuple[float, ...] = DEFAULT_INTERRUPTION_EDGES

    def __post_init__(self) -> None:
        object.__setattr__(self, "interruption_edges", tuple(float(e) for e in self.interruption_edges))
        if self.n_quality_bins != 5:
            raise ValidationError("the model defines exactly 5 quality bins")
        if self.max_amplitude != 4:
            raise ValidationError("the model defines amplitude bins -4..4")
        if self.half_width != 0.5:
            raise ValidationError("bins must tile the MOS scale; half_width is fixed at 0.5")
        edges = self.interruption_edges
        if len(edges) != 5:
            raise ValidationError("the model defines exactly 6 interruption bins (5 edges)")
        if edges[0] <= 0.0 or any(a >= b for a, b in zip(edges, edges[1:])):
            raise ValidationError(
                f"interruption edges {edges!r} must be positive and strictly increasing"
            )

    @property
    def n_interruption_bins(self) -> int:
        return len(self.interruption_edges) + 1


DEFAULT_BINNING = BinningConfig()


@dataclass(frozen=True)
class SwitchEvent:
    """A segment boundary: starting quality bin and amplitude bin.

    ``amplitude_bin`` < 0 is a down-switch; 0 covers quality maintaining
    and sub-half-step wobble; > 0 is an up-switch.
    """

    starting_quality_bin: int
    amplitude_bin: int


def bin_quality(q: float, config: BinningConfig = DEFAULT_BINNING) -> int:
    """Map a quality value in [1, 5] to its level bin 1..5.

    Bins are half-open on the right, so a value exactly on an edge
    (e.g. 4.5) belongs to the upper bin.
    """
    q = _check_mos(q, "quality value")
    n = int(math.floor(q + config.half_width))
    return min(max(n, 1), config.n_quality_bins)


def bin_interruption(duration_s: float, config: BinningConfig = DEFAULT_BINNING) -> int:
    """Map a stall duration in seconds to its bin 1..6 (left-open, right-closed)."""
    duration_s = float(duration_s)
    if not math.isfinite(duration_s) or duration_s <= 0.0:
        raise ValidationError(
            f"interruption duration {duration_s!r} must be a positive number"
        )
    return bisect_left(config.interruption_edges, duration_s) + 1


def classify_switch(
    q_before: float, q_after: float, config: BinningConfig = DEFAULT_BINNING
) -> SwitchEvent:
    """Classify the boundary between two consecutive segments."""
    q_before = _check_mos(q_before, "quality value")
    q_after = _check_mos(q_after, "quality value")
    i = bin_quality(q_before, config)
    delta = q_after - q_before
    j = int(math.floor(delta + config.half_width))
    j = max(-config.max_amplitude, min(config.max_amplitude, j))
    if j < 0 and i + j < 1:
        # Rounding at bin edges can suggest a drop below the bottom
        # level; land it in the deepest bin that actually exists.
        j = -(i - 1)
    return SwitchEvent(i, j)


@dataclass(frozen=True)
class FeatureVector:
    """Normalized histogram frequencies for one session.

    ``f_quality`` is normalized by the segment count; ``f_downswitch``,
    ``f_um`` and ``f_interruption`` by the total event count (segment
    boundaries plus interruptions) and are all zero when a session has
    no events.
    """

    f_quality: tuple[float, ...]
    f_downswitch: dict[tuple[int, int], float]
    f_um: float
    f_interruption: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "f_quality", tuple(float(v) for v in self.f_quality))
        object.__setattr__(self, "f_interruption", tuple(float(v) for v in self.f_interruption))
        object.__setattr__(self, "f_um", float(self.f_um))
        if len(self.f_quality) != 5:
            raise ValidationError("f_quality must have 5 entries")
        if len(self.f_interruption) != 6:
            raise ValidationError("f_interruption must have 6 entries")
        if set(self.f_downswitch) != set(DOWN_SWITCH_BINS):
            raise ValidationError("f_downswitch must cover exactly the valid down-switch bins")
        for v in (*self.f_quality, *self.f_downswitch.values(), self.f_um, *self.f_interruption):
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"frequency {v!r} outside [0, 1]")

    def as_vector(self) -> tuple[float, ...]:
        """The 22 frequencies in canonical order (quality, down-switch, grouped, interruption)."""
        return (
            *self.f_quality,
            *(self.f_downswitch[b] for b in DOWN_SWITCH_BINS),
            self.f_um,
            *self.f_interruption,
        )


def extract_features(
    trace: SessionTrace, config: BinningConfig = DEFAULT_BINNING
) -> FeatureVector:
    """Compute the 22 histogram frequencies of a session.

    Every consecutive-segment boundary counts as an event, including
    zero-amplitude quality maintaining; maintaining and up-switches are
    grouped into the single ``f_um`` frequency.
    """
    segments = trace.segments
    n = len(segments)

    quality_counts = [0] * config.n_quality_bins
    for q in segments:
        quality_counts[bin_quality(q, config) - 1] += 1

    down_counts = {b: 0 for b in DOWN_SWITCH_BINS}
    um_count = 0
    for before, after in zip(segments, segments[1:]):
        event = classify_switch(before, after, config)
        if event.amplitude_bin >= 0:
            um_count += 1
        else:
            down_counts[(event.starting_quality_bin, event.amplitude_bin)] += 1

    interruption_counts = [0] * config.n_interruption_bins
    for event in trace.interruptions:
        interruption_counts[bin_interruption(event.duration_s, config) - 1] += 1

    total_events = (n - 1) + len(trace.interruptions)
    if total_events == 0:
        f_down = {b: 0.0 for b in DOWN_SWITCH_BINS}
        f_um = 0.0
        f_interruption = (0.0,) * config.n_interruption_bins
    else:
        f_down = {b: c / total_events for b, c in down_counts.items()}
        f_um = um_count / total_events
        f_interruption = tuple(c / total_events for c in interruption_counts)

    return FeatureVector(
        f_quality=tuple(c / n for c in quality_counts),
        f_downswitch=f_down,
        f_um=f_um,
        f_interruption=f_interruption,
    )


@dataclass(frozen=True)
class ModelWeights:
    """The 22 model weights.

    ``alpha`` rewards time spent at each quality level, ``beta_down``
    penalizes down-switches per (starting bin, amplitude bin),
    ``beta_um`` penalizes the grouped maintaining/up-switch frequency,
    and ``gamma`` penalizes each interruption-duration bin.
    """

    alpha: tuple[float, ...]
    beta_down: dict[tuple[int, int], float]
    beta_um: float
    gamma: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", tuple(float(v) for v in self.alpha))
        object.__setattr__(self, "gamma", tuple(float(v) for v in self.gamma))
        object.__setattr__(self, "beta_um", float(self.beta_um))
        object.__setattr__(
            self,
            "beta_down",
            {(int(i), int(j)): float(w) for (i, j), w in self.beta_down.items()},
        )
        if len(self.alpha) != 5:
            raise ValidationError("alpha must have 5 entries")
        if len(self.gamma) != 6:
            raise ValidationError("gamma must have 6 entries")
        if set(self.beta_down) != set(DOWN_SWITCH_BINS):
            raise ValidationError(
                "beta_down must cover exactly the valid down-switch bins "
                f"{sorted(DOWN_SWITCH_BINS)}"
            )

    def as_vector(self) -> tuple[float, ...]:
        """The 22 weights in the same canonical order as FeatureVector.as_vector."""
        return (
            *self.alpha,
            *(self.beta_down[b] for b in DOWN_SWITCH_BINS),
            self.beta_um,
            *self.gamma,
        )

    @classmethod
    def from_vector(cls, values) -> "ModelWeights":
        values = [float(v) for v in values]
        if len(values) != N_PARAMETERS:
            raise ValidationError(f"expected {N_PARAMETERS} weights, got {len(values)}")
        return cls(
            alpha=tuple(values[0:5]),
            beta_down=dict(zip(DOWN_SWITCH_BINS, values[5:15])),
            beta_um=values[15],
            gamma=tuple(values[16:22]),
        )

    def to_dict(self) -> dict:
        return {
            "alpha": list(self.alpha),
            "beta_down": [
                {"i": i, "j": j, "w": self.beta_down[(i, j)]}
                for (i, j) in DOWN_SWITCH_BINS
            ],
            "beta_um": self.beta_um,
            "gamma": list(self.gamma),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelWeights":
        if not isinstance(data, dict):
            raise UsageError("weights record must be an object")
        try:
            beta_down = {
                (entry["i"], entry["j"]): entry["w"] for entry in data["beta_down"]
            }
            return cls(
                alpha=tuple(data["alpha"]),
                beta_down=beta_down,
                beta_um=data["beta_um"],
                gamma=tuple(data["gamma"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"bad weights record: {exc!r}") from None


def paper_weights() -> ModelWeights:
    """The published reference weight set bundled with the package."""
    text = resources.files("hasqoe").joinpath("data/paper_weights.json").read_text("utf-8")
    return ModelWeights.from_dict(json.loads(text))


def perceptual_quality(features: FeatureVector, weights: ModelWeights) -> float:
    """Quality-driven score: level reward minus switch penalties (no floor)."""
    reward = sum(a * f for a, f in zip(weights.alpha, features.f_quality))
    down = sum(
        weights.beta_down[b] * features.f_downswitch[b] for b in DOWN_SWITCH_BINS
    )
    return float(reward - down - weights.beta_um * features.f_um)


def interruption_degradation(features: FeatureVector, weights: ModelWeights) -> float:
    """Penalty contributed by playback interruptions."""
    return float(sum(g * f for g, f in zip(weights.gamma, features.f_interruption)))


def predict(
    trace: SessionTrace,
    weights: ModelWeights,
    config: BinningConfig = DEFAULT_BINNING,
) -> float:
    """Predicted session MOS: quality score minus stall penalty, floored at 1.0."""
    features = extract_features(trace, config)
    return max(
        perceptual_quality(features, weights) - interruption_degradation(features, weights),
        MIN_MOS,
    )

"""Session statistics used by comparison models, with pluggable linear coefficients.

Three published statistic sets are computed:

* ``guo``     — median and minimum segment quality,
* ``vriendt`` — switch count (boundaries whose amplitude bin is nonzero),
                mean and population standard deviation of segment quality,
* ``liu``     — presence-time-weighted quality (uniform segment durations,
                so the arithmetic mean), mean squared down-switch
                amplitude, total stall duration, and stall count.

The coefficients that turn statistics into a MOS prediction are not
reproduced here; they are supplied by the caller or fitted by ordinary
least squares on a labeled dataset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .fitting import LabeledDataset, lstsq_min_norm
from .model import (
    DEFAULT_BINNING,
    MAX_MOS,
    MIN_MOS,
    BinningConfig,
    SessionTrace,
    classify_switch,
)

MODEL_STATISTICS: dict[str, tuple[str, ...]] = {
    "guo": ("median_quality", "min_quality"),
    "vriendt": ("switch_count", "mean_quality", "std_quality"),
    "liu": (
        "weighted_quality_sum",
        "mean_sq_down_amplitude",
        "stall_duration_sum",
        "stall_count",
    ),
}


@dataclass(frozen=True)
class BaselineFeatures:
    """Per-session statistics feeding the comparison models."""

    median_quality: float
    min_quality: float
    switch_count: int
    mean_quality: float
    std_quality: float
    weighted_quality_sum: float
    mean_sq_down_amplitude: float
    stall_duration_sum: float
    stall_count: int

    def as_dict(self) -> dict[str, float]:
        return {
            "median_quality": self.median_quality,
            "min_quality": self.min_quality,
            "switch_count": float(self.switch_count),
            "mean_quality": self.mean_quality,
            "std_quality": self.std_quality,
            "weighted_quality_sum": self.weighted_quality_sum,
            "mean_sq_down_amplitude": self.mean_sq_down_amplitude,
            "stall_duration_sum": self.stall_duration_sum,
            "stall_count": float(self.stall_count),
        }


def extract_baseline_features(
    trace: SessionTrace, config: BinningConfig = DEFAULT_BINNING
) -> BaselineFeatures:
    """Compute all comparison-model statistics for one session."""
    q = np.asarray(trace.segments, dtype=float)
    deltas = np.diff(q)
    # A "switch" is a boundary whose amplitude rounds to a nonzero bin;
    # sub-half-step wobble does not count.
    switch_count = sum(
        1
        for before, after in zip(trace.segments, trace.segments[1:])
        if classify_switch(before, after, config).amplitude_bin != 0
    )
    down = deltas[deltas < 0.0]
    mean_sq_down = float(np.mean(down**2)) if down.size else 0.0
    durations = [e.duration_s for e in trace.interruptions]
    return BaselineFeatures(
        median_quality=float(np.median(q)),
        min_quality=float(q.min()),
        switch_count=switch_count,
        mean_quality=float(q.mean()),
        std_quality=float(q.std()),
        # Uniform segment durations: weighting each quality value by its
        # share of presence time reduces to the arithmetic mean.
        weighted_quality_sum=float(q.mean()),
        mean_sq_down_amplitude=mean_sq_down,
        stall_duration_sum=float(sum(durations)),
        stall_count=len(durations),
    )


@dataclass(frozen=True)
class BaselineCoefficients:
    """Linear map from statistics to predicted MOS for one comparison model."""

    model: str
    coefficients: dict[str, float]
    intercept: float = 0.0

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "coefficients": dict(self.coefficients),
            "intercept": self.intercept,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BaselineCoefficients":
        if not isinstance(data, dict):
            raise UsageError("coefficients record must be an object")
        try:
            return cls(
                model=str(data["model"]),
                coefficients={str(k): float(v) for k, v in data["coefficients"].items()},
                intercept=float(data.get("intercept", 0.0)),
            )
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise UsageError(f"bad coefficients record: {exc!r}") from None


def baseline_predict(
    features: BaselineFeatures, coefficients: BaselineCoefficients
) -> float:
    """Linear combination of statistics, clamped to the MOS scale [1, 5]."""
    stats = features.as_dict()
    total = coefficients.intercept
    for name, coefficient in coefficients.coefficients.items():
        if name not in stats:
            raise UsageError(
                f"unknown statistic {name!r}; known statistics: {sorted(stats)}"
            )
        total += coefficient * stats[name]
    return min(max(float(total), MIN_MOS), MAX_MOS)


def fit_baseline_coefficients(
    dataset: LabeledDataset,
    model: str,
    config: BinningConfig = DEFAULT_BINNING,
) -> BaselineCoefficients:
    """Fit one comparison model's coefficients by OLS on a labeled dataset."""
    if model not in MODEL_STATISTICS:
        raise UsageError(
            f"unknown baseline model {model!r}; known models: {sorted(MODEL_STATISTICS)}"
        )
    names = MODEL_STATISTICS[model]
    rows = []
    for session in dataset.sessions:
        stats = extract_baseline_features(session, config).as_dict()
        rows.append([stats[name] for name in names] + [1.0])
    solution, _ = lstsq_min_norm(np.asarray(rows, dtype=float), dataset.labels())
    return BaselineCoefficients(
        model=model,
        coefficients=dict(zip(names, (float(v) for v in solution[:-1]))),
        intercept=float(solution[-1]),
    )


def baseline_runner(
    model: str,
    coefficients: BaselineCoefficients | None = None,
    config: BinningConfig = DEFAULT_BINNING,
):
    """A split-protocol model runner for a comparison model.

    With fixed ``coefficients`` the training set is ignored; otherwise
    coefficients are refit on each training set.
    """
    if model not in MODEL_STATISTICS:
        raise UsageError(
            f"unknown baseline model {model!r}; known models: {sorted(MODEL_STATISTICS)}"
        )

    def runner(train: LabeledDataset):
        fitted = coefficients or fit_baseline_coefficients(train, model, config)

        def predictor(sessions) -> np.ndarray:
            return np.array(
                [
                    baseline_predict(extract_baseline_features(s, config), fitted)
                    for s in sessions
                ],
                dtype=float,
            )

        return predictor

    return runner

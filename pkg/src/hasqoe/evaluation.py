"""Prediction-quality metrics and the repeated random train/test protocol.

A *model runner* is a callable taking a training :class:`LabeledDataset`
and returning a predictor, itself a callable mapping a sequence of
sessions to an array of predicted MOS.  ``refit_runner`` refits the
histogram model on every training set; ``fixed_weights_runner``
evaluates one frozen weight set and ignores the training data.

Split ``k`` of a protocol run draws its RNG substream from
``SeedSequence(rng_seed).spawn(n_repetitions)[k]``, so results are
bit-reproducible and independent of the order splits are executed in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateMetricError, UsageError
from .fitting import LabeledDataset, fit
from .model import DEFAULT_BINNING, BinningConfig, ModelWeights, SessionTrace, predict

ModelRunner = Callable[[LabeledDataset], Callable[[Sequence[SessionTrace]], np.ndarray]]


def _as_pair(predictions, truths, min_length: int) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(predictions, dtype=float)
    t = np.asarray(truths, dtype=float)
    if p.ndim != 1 or t.ndim != 1:
        raise UsageError("predictions and truths must be one-dimensional sequences")
    if p.shape != t.shape:
        raise UsageError(f"length mismatch: {p.size} predictions vs {t.size} truths")
    if p.size < min_length:
        raise UsageError(f"need at least {min_length} values, got {p.size}")
    return p, t


def pcc(predictions, truths) -> float:
    """Pearson correlation coefficient between predictions and truths.

    Raises :class:`DegenerateMetricError` when either sequence is
    constant — a silent 0 there would mask pipeline bugs.
    """
    p, t = _as_pair(predictions, truths, 2)
    for name, values in (("predictions", p), ("truths", t)):
        if np.all(values == values[0]):
            raise DegenerateMetricError(f"{name} are constant; correlation is undefined")
    pc = p - p.mean()
    tc = t - t.mean()
    return float(pc @ tc) / math.sqrt(float(pc @ pc) * float(tc @ tc))


def rmse(predictions, truths) -> float:
    """Root-mean-square error between predictions and truths."""
    p, t = _as_pair(predictions, truths, 1)
    return float(np.sqrt(np.mean((p - t) ** 2)))


def linear_compensate(predictions, truths) -> tuple[float, float, np.ndarray]:
    """First-order correction of systematic prediction bias.

    Fits ``truths ~ slope * predictions + intercept`` by OLS and returns
    ``(slope, intercept, adjusted_predictions)``.  The map preserves PCC
    (up to sign) and never increases RMSE.
    """
    p, t = _as_pair(predictions, truths, 2)
    if np.all(p == p[0]):
        raise DegenerateMetricError("predictions are constant; compensation is degenerate")
    pc = p - p.mean()
    slope = float(pc @ (t - t.mean())) / float(pc @ pc)
    intercept = float(t.mean()) - slope * float(p.mean())
    return slope, intercept, slope * p + intercept


@dataclass(frozen=True)
class SplitMetrics:
    """Metrics of one train/test repetition."""

    split: int
    pcc: float
    rmse: float
    slope: float | None = None
    intercept: float | None = None

    def to_dict(self) -> dict:
        data: dict = {"split": self.split, "pcc": self.pcc, "rmse": self.rmse}
        if self.slope is not None:
            data["slope"] = self.slope
            data["intercept"] = self.intercept
        return data


@dataclass(frozen=True)
class EvaluationReport:
    """PCC/RMSE of an evaluation; means over splits for protocol runs."""

    pcc: float
    rmse: float
    slope: float | None = None
    intercept: float | None = None
    per_split: tuple[SplitMetrics, ...] | None = None

    def to_dict(self) -> dict:
        data: dict = {"pcc": self.pcc, "rmse": self.rmse}
        if self.slope is not None:
            data["slope"] = self.slope
            data["intercept"] = self.intercept
        if self.per_split is not None:
            data["per_split"] = [m.to_dict() for m in self.per_split]
        return data


def evaluate_predictions(predictions, truths, *, compensate: bool = False) -> EvaluationReport:
    """Score predictions against truths, optionally after linear compensation."""
    p, t = _as_pair(predictions, truths, 2)
    slope = intercept = None
    if compensate:
        slope, intercept, p = linear_compensate(p, t)
    return EvaluationReport(pcc=pcc(p, t), rmse=rmse(p, t), slope=slope, intercept=intercept)


@dataclass(frozen=True)
class SplitProtocol:
    """Repeated random train/test split definition.

    ``test_pool`` selects which sessions may enter test sets: ``"all"``
    or a tag value that session traces carry.  Training sets are always
    the full complement of the drawn test set.
    """

    n_repetitions: int = 50
    test_size: int = 90
    test_pool: str = "multi-factor"
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.n_repetitions < 1:
            raise UsageError(f"n_repetitions {self.n_repetitions} must be >= 1")
        if self.test_size < 1:
            raise UsageError(f"test_size {self.test_size} must be >= 1")


def _weights_predictor(weights: ModelWeights, config: BinningConfig):
    def predictor(sessions) -> np.ndarray:
        return np.array([predict(s, weights, config) for s in sessions], dtype=float)

    return predictor


def refit_runner(
    config: BinningConfig = DEFAULT_BINNING, *, nonnegative: bool = False
) -> ModelRunner:
    """Model runner that refits the histogram model on each training set."""

    def runner(train: LabeledDataset):
        report = fit(train, config, nonnegative=nonnegative)
        return _weights_predictor(report.weights, config)

    return runner


def fixed_weights_runner(
    weights: ModelWeights, config: BinningConfig = DEFAULT_BINNING
) -> ModelRunner:
    """Model runner that evaluates one frozen weight set (training data ignored)."""

    def runner(train: LabeledDataset):
        return _weights_predictor(weights, config)

    return runner


def run_split_protocol(
    dataset: LabeledDataset,
    protocol: SplitProtocol,
    model: ModelRunner,
    *,
    compensate: bool = False,
    compensation_on: str = "train",
) -> EvaluationReport:
    """Run the repeated random train/test protocol.

    Each repetition draws ``test_size`` sessions without replacement
    from the test pool; the remaining sessions form the training set.
    With ``compensate=True`` a linear correction is fitted on the
    portion named by ``compensation_on`` ("train" or "test") and applied
    to the test predictions before scoring.
    """
    if compensation_on not in ("train", "test"):
        raise UsageError(f"compensation_on must be 'train' or 'test', got {compensation_on!r}")
    sessions = dataset.sessions
    pool = [
        k
        for k, s in enumerate(sessions)
        if protocol.test_pool == "all" or s.tag == protocol.test_pool
    ]
    if len(pool) < protocol.test_size:
        raise UsageError(
            f"test pool {protocol.test_pool!r} holds {len(pool)} sessions; "
            f"cannot draw test sets of {protocol.test_size}"
        )
    if protocol.test_size >= len(sessions):
        raise UsageError("test_size leaves no sessions to train on")

    substreams = np.random.SeedSequence(protocol.rng_seed).spawn(protocol.n_repetitions)
    per_split: list[SplitMetrics] = []
    for k, substream in enumerate(substreams):
        rng = np.random.default_rng(substream)
        drawn = rng.choice(pool, size=protocol.test_size, replace=False)
        test_indices = frozenset(int(i) for i in drawn)
        train_sessions = tuple(
            s for m, s in enumerate(sessions) if m not in test_indices
        )
        test_sessions = tuple(sessions[m] for m in sorted(test_indices))

        predictor = model(LabeledDataset(train_sessions))
        predictions = np.asarray(predictor(test_sessions), dtype=float)
        truths = np.array([s.ground_truth_mos for s in test_sessions], dtype=float)

        slope = intercept = None
        if compensate:
            if compensation_on == "train":
                reference = predictor(train_sessions)
                reference_truths = np.array(
                    [s.ground_truth_mos for s in train_sessions], dtype=float
                )
            else:
                reference = predictions
                reference_truths = truths
            slope, intercept, _ = linear_compensate(reference, reference_truths)
            predictions = slope * predictions + intercept

        per_split.append(
            SplitMetrics(
                split=k,
                pcc=pcc(predictions, truths),
                rmse=rmse(predictions, truths),
                slope=slope,
                intercept=intercept,
            )
        )

    mean = lambda values: float(np.mean(values))  # noqa: E731
    return EvaluationReport(
        pcc=mean([m.pcc for m in per_split]),
        rmse=mean([m.rmse for m in per_split]),
        slope=mean([m.slope for m in per_split]) if compensate else None,
        intercept=mean([m.intercept for m in per_split]) if compensate else None,
        per_split=tuple(per_split),
    )

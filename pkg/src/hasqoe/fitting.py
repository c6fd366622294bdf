"""Least-squares estimation of the 22 model weights.

The design matrix absorbs the sign convention of the prediction
equations: quality frequencies enter positively, down-switch, grouped
and interruption frequencies negatively.  Labels are then approximated
as ``X @ w`` and the solved ``w`` plugs straight into
:class:`~hasqoe.model.ModelWeights`.

The solve uses an orthogonal factorization (SVD) rather than normal
equations; with rarely populated bins the design can be ill-conditioned
or rank-deficient, in which case the minimum-norm solution is returned
and ``condition_warning`` is set.  The clamp at 1.0 MOS is *not*
applied while solving, only when reporting training metrics.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .model import (
    DEFAULT_BINNING,
    N_PARAMETERS,
    BinningConfig,
    ModelWeights,
    SessionTrace,
    extract_features,
)


@dataclass(frozen=True)
class LabeledDataset:
    """Sessions that all carry a ground-truth MOS."""

    sessions: tuple[SessionTrace, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "sessions", tuple(self.sessions))
        if not self.sessions:
            raise UsageError("dataset is empty")
        for k, session in enumerate(self.sessions):
            if session.ground_truth_mos is None:
                raise UsageError(f"session {k} has no ground-truth MOS label")

    def __len__(self) -> int:
        return len(self.sessions)

    def labels(self) -> np.ndarray:
        return np.array([s.ground_truth_mos for s in self.sessions], dtype=float)


@dataclass(frozen=True)
class FitReport:
    """Fitted weights plus training metrics of the clamped predictions."""

    weights: ModelWeights
    training_rmse: float
    training_pcc: float
    condition_warning: bool = False

    def to_dict(self) -> dict:
        return {
            "training_rmse": self.training_rmse,
            "training_pcc": self.training_pcc,
            "condition_warning": self.condition_warning,
        }


def design_matrix(sessions, config: BinningConfig = DEFAULT_BINNING) -> np.ndarray:
    """Signed feature rows, one session per row, 22 columns."""
    rows = np.array(
        [extract_features(s, config).as_vector() for s in sessions], dtype=float
    )
    rows[:, 5:] *= -1.0
    return rows


def lstsq_min_norm(matrix: np.ndarray, targets: np.ndarray) -> tuple[np.ndarray, int]:
    """Minimum-norm least-squares solution and the rank of the matrix."""
    solution, _, rank, _ = np.linalg.lstsq(matrix, targets, rcond=None)
    return solution, int(rank)


def _training_pcc(predictions: np.ndarray, labels: np.ndarray) -> float:
    # NaN (rather than an error) when the correlation is undefined, so a
    # degenerate training set still yields a usable report.
    p = predictions - predictions.mean()
    t = labels - labels.mean()
    denom = math.sqrt(float(p @ p) * float(t @ t))
    if denom == 0.0:
        return float("nan")
    return float(p @ t) / denom


def fit(
    dataset: LabeledDataset,
    config: BinningConfig = DEFAULT_BINNING,
    *,
    nonnegative: bool = False,
) -> FitReport:
    """Fit the 22 weights to a labeled dataset by least squares.

    With ``nonnegative=True`` the solve is constrained to w >= 0 using
    an active-set method; by default the solve is unconstrained.
    """
    if len(dataset) < N_PARAMETERS:
        warnings.warn(
            f"fitting {N_PARAMETERS} weights from only {len(dataset)} sessions; "
            "the solution will be underdetermined",
            stacklevel=2,
        )
    matrix = design_matrix(dataset.sessions, config)
    labels = dataset.labels()
    if nonnegative:
        from scipy.optimize import nnls

        solution, _ = nnls(matrix, labels)
        rank = int(np.linalg.matrix_rank(matrix))
    else:
        solution, rank = lstsq_min_norm(matrix, labels)
    deficient = rank < matrix.shape[1]
    if deficient:
        warnings.warn(
            f"design matrix is rank-deficient (rank {rank} of {matrix.shape[1]}); "
            "returning the minimum-norm solution",
            stacklevel=2,
        )
    clamped = np.maximum(matrix @ solution, 1.0)
    residual = clamped - labels
    return FitReport(
        weights=ModelWeights.from_vector(solution),
        training_rmse=float(np.sqrt(np.mean(residual**2))),
        training_pcc=_training_pcc(clamped, labels),
        condition_warning=deficient,
    )

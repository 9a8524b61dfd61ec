"""Regression with bounded convex losses on [0, 1]: averaging over level sets.

Built-in losses clamp the prediction into [0, 1] before evaluation so the
declared bound is exact rather than an over-estimate; clamping never increases
a loss that is monotone in distance when responses live in [0, 1].  Averaging
satisfies the aggregation stability condition for any loss convex in the
prediction, and the grid {M, 2M, ..., ceil(12 ln |H|) * M} guarantees a
three-quarters fraction of good levels with growth constant 2.
"""

from __future__ import annotations

import math

import numpy as np

from .audit import BoundCertificate
from .classification import GridMismatchError
from .core import (
    AggregationRule,
    LabeledSample,
    LossModel,
    MlsaOutput,
    PredictionTable,
    ToleranceGrid,
    loss_matrix,
)

__all__ = [
    "MEAN_AGGREGATE",
    "average_aggregate",
    "regression_grid",
    "builtin_losses",
    "scale_loss",
    "verify_regression_bound",
]


def average_aggregate(indices, table: PredictionTable, i: int) -> float:
    """Arithmetic mean of the selected hypotheses' predictions at row i."""
    indices = np.asarray(indices, dtype=int)
    if indices.size == 0:
        raise ValueError("cannot average an empty set")
    return float(table.values[i, indices].mean())


MEAN_AGGREGATE = AggregationRule(
    name="average",
    on_values=lambda v: float(v.mean()),
    combine=lambda counts, sums: sums / counts,
)


def regression_grid(M: float, class_size: int) -> ToleranceGrid:
    """Tolerances M, 2M, ..., ceil(12 ln |H|) * M with gap M."""
    if not M > 0:
        raise ValueError("loss bound M must be positive")
    if class_size < 2:
        raise ValueError(
            "degenerate grid: a single-hypothesis class has nothing to aggregate"
        )
    top = math.ceil(12 * math.log(class_size))
    return ToleranceGrid(levels=M * np.arange(1, top + 1, dtype=float), gap=M)


def _clip01(pred: np.ndarray) -> np.ndarray:
    return np.clip(pred, 0.0, 1.0)


def builtin_losses(scale: float = 1.0) -> dict[str, LossModel]:
    """Squared and absolute loss on [0, 1], optionally scaled to bound `scale`."""
    if not scale > 0:
        raise ValueError("scale must be positive")
    return {
        "squared": LossModel(
            pointwise=lambda p, y: scale * (_clip01(p) - y) ** 2,
            delta_bound=scale,
            monotonicity="in_distance",
            name="squared" if scale == 1.0 else f"squared*{scale:g}",
        ),
        "absolute": LossModel(
            pointwise=lambda p, y: scale * np.abs(_clip01(p) - y),
            delta_bound=scale,
            monotonicity="in_distance",
            name="absolute" if scale == 1.0 else f"absolute*{scale:g}",
        ),
    }


def scale_loss(name: str, M: float) -> LossModel:
    """A catalog loss rescaled so its declared bound is exactly M."""
    return builtin_losses(scale=M)[name]


def verify_regression_bound(
    output: MlsaOutput,
    table: PredictionTable,
    sample: LabeledSample,
    loss: LossModel,
    M: float,
) -> BoundCertificate:
    """Certify LOO <= (8/n) * best loss + (104/n) * M ln |H| for a finished run."""
    m = table.n_hypotheses
    expected = regression_grid(M, m)
    if not math.isclose(output.grid.gap, expected.gap) or not np.allclose(
        output.grid.levels, expected.levels
    ):
        raise GridMismatchError(
            "output grid does not match the regression grid for this (M, |H|)"
        )
    n = table.n_samples
    erm = float(loss_matrix(table, sample, loss).sum(axis=0).min())
    rhs = 8.0 * erm / n + 104.0 * M * math.log(m) / n
    return BoundCertificate(
        name="bounded-convex-oracle-bound",
        lhs=output.loo_error,
        rhs=rhs,
        components={"erm_loss": erm, "M": M, "class_size": m, "n": n},
    )

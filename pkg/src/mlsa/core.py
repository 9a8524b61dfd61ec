"""Generic median-of-level-set-aggregation engine over finite hypothesis classes.

A hypothesis class restricted to the n sample covariates is a plain n x m
evaluation matrix.  Empirical losses are unnormalized sums; the leave-one-out
(LOO) error is a mean.  For each sample index i and each tolerance t in a grid,
the engine forms the near-optimal level set of hypotheses on the sample with
index i removed, aggregates their predictions at row i, and finally reports the
lower median of the per-level predictions together with the resulting LOO error.

All operations are pure functions of their inputs with fixed reduction order,
so identical inputs produce identical outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "PredictionTable",
    "LossModel",
    "LabeledSample",
    "ToleranceGrid",
    "MlsaOutput",
    "AggregationRule",
    "LossBoundError",
    "empirical_loss",
    "level_set",
    "lower_median",
    "run_mlsa",
    "loo_error",
    "loss_matrix",
]

#: Tolerance used when validating declared loss bounds against evaluated losses.
#: Membership comparisons in level sets never use it; it only absorbs float error
#: in assertions that are exact in real arithmetic.
NUMERIC_TOL = 1e-9


class LossBoundError(ValueError):
    """Evaluated losses exceed the declared per-sample bound."""


def _dedupe_columns(values: np.ndarray) -> np.ndarray:
    """Drop duplicate columns, keeping the first occurrence of each labeling."""
    if values.size and np.all((values == 0.0) | (values == 1.0)):
        # binary labelings pack to bytes, much cheaper to compare
        packed = np.packbits(values.T.astype(bool), axis=1)
        _, first = np.unique(packed, axis=0, return_index=True)
    else:
        _, first = np.unique(values.T, axis=0, return_index=True)
    return values[:, np.sort(first)]


@dataclass(frozen=True)
class PredictionTable:
    """Finite hypothesis class restricted to the sample covariates.

    ``values[i, j]`` is the prediction of hypothesis j at covariate i.  Columns
    are deduplicated by default because a restricted class is a set of labelings
    and the counting measure must not double-count; pass ``keep_duplicates=True``
    for user-supplied classes where multiplicity is intentional.
    """

    values: np.ndarray
    keep_duplicates: bool = False

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError(f"prediction table must be 2-d, got shape {values.shape}")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError("prediction table needs at least one row and one column")
        if not self.keep_duplicates:
            values = _dedupe_columns(values)
        object.__setattr__(self, "values", values)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_hypotheses(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LabeledSample:
    """Observed responses, one per table row."""

    responses: np.ndarray

    def __post_init__(self) -> None:
        responses = np.asarray(self.responses, dtype=float)
        if responses.ndim != 1 or responses.size < 1:
            raise ValueError("responses must be a nonempty 1-d sequence")
        object.__setattr__(self, "responses", responses)

    def __len__(self) -> int:
        return self.responses.size


@dataclass(frozen=True)
class LossModel:
    """Pointwise loss with a declared per-sample bound and monotonicity tag.

    ``delta_bound`` is the gap used by tolerance grids.  With
    ``bound_is_range=False`` it bounds the loss itself (0 <= loss <= bound);
    with ``bound_is_range=True`` it bounds, for every row, the spread of losses
    across the class (the log-loss case, where the loss is unbounded but
    likelihood ratios are not).  Either form is enough for the level-set
    sandwich; the evaluated table is audited against the declared form.

    ``monotonicity`` is one of ``"in_distance"`` (farther predictions never cost
    less) or ``"in_first_argument"`` (loss is monotone in the prediction, one
    fixed direction per task).
    """

    pointwise: Callable[[np.ndarray, np.ndarray], np.ndarray]
    delta_bound: float
    monotonicity: str
    bound_is_range: bool = False
    name: str = ""

    def __post_init__(self) -> None:
        if self.monotonicity not in ("in_distance", "in_first_argument"):
            raise ValueError(f"unknown monotonicity tag {self.monotonicity!r}")
        if not self.delta_bound >= 0:
            raise ValueError("delta_bound must be nonnegative")

    def evaluate(self, predictions, responses) -> np.ndarray:
        """Vectorized loss evaluation with an elementwise fallback."""
        predictions = np.asarray(predictions, dtype=float)
        responses = np.asarray(responses, dtype=float)
        shape = np.broadcast_shapes(predictions.shape, responses.shape)
        try:
            out = np.asarray(self.pointwise(predictions, responses), dtype=float)
            if out.shape == shape:
                return out
        except (TypeError, ValueError):
            pass
        fn = np.vectorize(self.pointwise, otypes=[float])
        return fn(predictions, responses)


@dataclass(frozen=True)
class ToleranceGrid:
    """Ordered finite tolerance set with its gap (the per-sample loss bound)."""

    levels: np.ndarray
    gap: float

    def __post_init__(self) -> None:
        levels = np.asarray(self.levels, dtype=float)
        if levels.ndim != 1 or levels.size < 1:
            raise ValueError("tolerance grid must be a nonempty 1-d sequence")
        if np.any(levels < 0):
            raise ValueError("tolerances must be nonnegative")
        if levels.size > 1 and np.any(np.diff(levels) <= 0):
            raise ValueError("tolerances must be strictly increasing")
        if not self.gap > 0:
            raise ValueError("gap must be positive")
        object.__setattr__(self, "levels", levels)

    @property
    def t_max(self) -> float:
        return float(self.levels[-1])

    def __len__(self) -> int:
        return self.levels.size


@dataclass(frozen=True)
class MlsaOutput:
    """Per-level predictions, their per-index lower medians, and the LOO error."""

    per_level: np.ndarray  # |T| x n
    medians: np.ndarray  # n
    loo_error: float
    grid: ToleranceGrid


@dataclass(frozen=True)
class AggregationRule:
    """Aggregation of the predictions of a hypothesis subset at one row.

    ``on_values`` maps the selected prediction values to the aggregate.  When
    the rule depends only on the count and sum of the selected values (majority
    vote and averaging both do), ``combine`` supplies that reduction in
    vectorized form over whole tolerance grids; it must agree exactly with
    ``on_values`` and is cross-checked in the test suite.

    ``stability`` is the rule's provable constant c in
    loss(aggregate) <= c * (average loss over the subset): 1 for averaging
    under a loss convex in the prediction (Jensen), 2 for majority vote under
    the 0-1 loss (a wrong vote means at least half the subset is wrong, no
    better constant exists).
    """

    name: str
    on_values: Callable[[np.ndarray], float]
    combine: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    stability: float = 1.0

    def __call__(self, indices, table: PredictionTable, i: int) -> float:
        indices = np.asarray(indices, dtype=int)
        if indices.size == 0:
            raise ValueError("cannot aggregate an empty hypothesis set")
        return float(self.on_values(table.values[i, indices]))


def loss_matrix(table: PredictionTable, sample: LabeledSample, loss: LossModel) -> np.ndarray:
    """Evaluate the loss of every hypothesis at every row and audit the bound."""
    if len(sample) != table.n_samples:
        raise ValueError(
            f"sample has {len(sample)} responses but table has {table.n_samples} rows"
        )
    lm = loss.evaluate(table.values, sample.responses[:, None])
    if np.min(lm) < -NUMERIC_TOL:
        raise LossBoundError(f"negative loss encountered: {np.min(lm)}")
    if loss.bound_is_range:
        spread = float(np.max(np.max(lm, axis=1) - np.min(lm, axis=1)))
        if spread > loss.delta_bound + NUMERIC_TOL:
            raise LossBoundError(
                f"per-row loss spread {spread} exceeds declared bound {loss.delta_bound}"
            )
    else:
        worst = float(np.max(lm))
        if worst > loss.delta_bound + NUMERIC_TOL:
            raise LossBoundError(
                f"loss value {worst} exceeds declared bound {loss.delta_bound}"
            )
    return lm


def _column_losses(
    table: PredictionTable,
    sample: LabeledSample,
    loss: LossModel,
    exclude: Optional[int],
) -> np.ndarray:
    lm = loss_matrix(table, sample, loss)
    totals = lm.sum(axis=0)
    if exclude is not None:
        if not 0 <= exclude < table.n_samples:
            raise IndexError(f"exclude index {exclude} out of range [0, {table.n_samples})")
        totals = totals - lm[exclude]
    return totals


def empirical_loss(
    table: PredictionTable,
    sample: LabeledSample,
    loss: LossModel,
    j: int,
    exclude: Optional[int] = None,
) -> float:
    """Unnormalized loss sum of hypothesis j, optionally skipping one row."""
    if not 0 <= j < table.n_hypotheses:
        raise IndexError(f"hypothesis index {j} out of range [0, {table.n_hypotheses})")
    if exclude is not None and not 0 <= exclude < table.n_samples:
        raise IndexError(f"exclude index {exclude} out of range [0, {table.n_samples})")
    per_row = loss.evaluate(table.values[:, j], sample.responses)
    total = float(per_row.sum())
    if exclude is not None:
        total -= float(per_row[exclude])
    return total


def level_set(
    table: PredictionTable,
    sample: LabeledSample,
    loss: LossModel,
    t: float,
    exclude: Optional[int] = None,
) -> np.ndarray:
    """Indices of hypotheses within tolerance t of the best empirical loss.

    Never empty: the minimizer always qualifies.
    """
    if t < 0:
        raise ValueError("tolerance must be nonnegative")
    totals = _column_losses(table, sample, loss, exclude)
    members = np.flatnonzero(totals <= totals.min() + t)
    assert members.size > 0
    return members


def lower_median(values: Sequence[float]) -> float:
    """The ceil(k/2)-th order statistic of k values.

    This is always a minimizer of sum_t |v_t - y| over y; the lower of the two
    central values is returned for even k so results are reproducible.
    """
    arr = np.sort(np.asarray(values, dtype=float))
    if arr.size == 0:
        raise ValueError("median of an empty sequence")
    return float(arr[(arr.size + 1) // 2 - 1])


def run_mlsa(
    table: PredictionTable,
    sample: LabeledSample,
    loss: LossModel,
    grid: ToleranceGrid,
    agg: AggregationRule,
) -> MlsaOutput:
    """Median of level-set aggregation.

    For every index i and tolerance t, aggregates the predictions of the
    leave-one-out level set at row i, then takes the lower median across the
    grid and reports the mean loss of the medians.  The grid gap must equal the
    loss model's declared bound, which is what guarantees the level-set
    sandwich the method relies on.
    """
    if len(sample) != table.n_samples:
        raise ValueError("sample/table size mismatch")
    if not math.isclose(grid.gap, loss.delta_bound, rel_tol=1e-12, abs_tol=1e-12):
        raise ValueError(
            f"grid gap {grid.gap} must equal the loss bound {loss.delta_bound}"
        )
    lm = loss_matrix(table, sample, loss)
    totals = lm.sum(axis=0)
    levels = grid.levels
    n = table.n_samples
    n_levels = levels.size
    per_level = np.empty((n_levels, n))
    for i in range(n):
        excl = totals - lm[i]
        thresholds = excl.min() + levels
        if agg.combine is not None:
            order = np.argsort(excl, kind="stable")
            sorted_losses = excl[order]
            prefix = np.concatenate(([0.0], np.cumsum(table.values[i, order])))
            counts = np.searchsorted(sorted_losses, thresholds, side="right")
            per_level[:, i] = agg.combine(counts, prefix[counts])
        else:
            for k in range(n_levels):
                selected = np.flatnonzero(excl <= thresholds[k])
                per_level[k, i] = agg(selected, table, i)
    medians = np.sort(per_level, axis=0)[(n_levels + 1) // 2 - 1].copy()
    err = float(np.mean(loss.evaluate(medians, sample.responses)))
    return MlsaOutput(per_level=per_level, medians=medians, loo_error=err, grid=grid)


def loo_error(predictions, sample: LabeledSample, loss: LossModel) -> float:
    """Mean pointwise loss of one prediction per sample index."""
    predictions = np.asarray(predictions, dtype=float)
    if predictions.shape != (len(sample),):
        raise ValueError(
            f"expected {len(sample)} predictions, got shape {predictions.shape}"
        )
    return float(np.mean(loss.evaluate(predictions, sample.responses)))

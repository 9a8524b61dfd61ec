"""Deterministic synthetic instances for every task family.

Each generator is a pure function of a numpy Generator, so one seed pins the
whole instance.  Classification draws uniform covariates on [0, 1] (or the unit
square) and labels them with a planted member of the class plus optional flip
noise; regression plants a column of a random prediction table and adds bounded
noise clamped to [0, 1]; density draws i.i.d. points from a planted class
member; logistic renormalizes Gaussian covariates into the R-ball and labels
through the planted parameter's sigmoid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .classification import (
    MAJORITY_VOTE,
    classification_grid,
    restrict_class,
    zero_one_loss,
)
from .core import AggregationRule, LabeledSample, LossModel, PredictionTable, ToleranceGrid
from .density import DensityClass
from .logistic import LogisticProblem

__all__ = [
    "ClassificationInstance",
    "RegressionInstance",
    "DensityInstance",
    "make_classification_instance",
    "make_regression_instance",
    "make_density_instance",
    "make_logistic_problem",
    "make_linear_instance",
    "SyntheticTask",
    "threshold_task",
]


def _distinct_uniform(rng: np.random.Generator, n: int) -> np.ndarray:
    x = rng.random(n)
    while np.unique(x).size != n:  # pragma: no cover - measure-zero resample
        x = rng.random(n)
    return x


def _planted_labels(descriptor: str, x, rng: np.random.Generator, k: int) -> np.ndarray:
    if descriptor == "thresholds-1d":
        return (np.asarray(x) >= rng.random()).astype(float)
    if descriptor == "intervals-1d":
        a, b = np.sort(rng.random(2))
        return ((x >= a) & (x <= b)).astype(float)
    if descriptor == "unions-of-k-intervals":
        cuts = np.sort(rng.random(2 * k))
        lab = np.zeros(len(x))
        for lo, hi in zip(cuts[::2], cuts[1::2]):
            lab[(x >= lo) & (x <= hi)] = 1.0
        return lab
    if descriptor == "axis-rectangles-2d":
        pts = np.asarray(x)
        xs = np.sort(rng.random(2))
        ys = np.sort(rng.random(2))
        inside = (
            (pts[:, 0] >= xs[0])
            & (pts[:, 0] <= xs[1])
            & (pts[:, 1] >= ys[0])
            & (pts[:, 1] <= ys[1])
        )
        return inside.astype(float)
    raise ValueError(f"no planted member available for {descriptor!r}")


@dataclass(frozen=True)
class ClassificationInstance:
    table: PredictionTable
    sample: LabeledSample
    covariates: np.ndarray
    clean_labels: np.ndarray
    flip_fraction: float


def make_classification_instance(
    descriptor: str,
    n: int,
    noise: float,
    rng: np.random.Generator,
    k: int = 2,
) -> ClassificationInstance:
    """Uniform covariates labeled by a planted class member, with flip noise."""
    if not 0 <= noise <= 1:
        raise ValueError("noise must lie in [0, 1]")
    if descriptor == "axis-rectangles-2d":
        x = rng.random((n, 2))
    else:
        x = _distinct_uniform(rng, n)
    clean = _planted_labels(descriptor, x, rng, k)
    flips = rng.random(n) < noise
    labels = np.where(flips, 1.0 - clean, clean)
    table = restrict_class(descriptor, x, k=k)
    return ClassificationInstance(
        table=table,
        sample=LabeledSample(labels),
        covariates=x,
        clean_labels=clean,
        flip_fraction=float(flips.mean()),
    )


@dataclass(frozen=True)
class RegressionInstance:
    table: PredictionTable
    sample: LabeledSample
    planted_column: int


def make_regression_instance(
    n: int, class_size: int, noise: float, rng: np.random.Generator
) -> RegressionInstance:
    """Random finite class on [0, 1]; responses follow one planted column."""
    values = rng.random((n, class_size))
    planted = int(rng.integers(class_size))
    responses = np.clip(
        values[:, planted] + noise * rng.uniform(-1.0, 1.0, size=n), 0.0, 1.0
    )
    return RegressionInstance(
        table=PredictionTable(values, keep_duplicates=True),
        sample=LabeledSample(responses),
        planted_column=planted,
    )


@dataclass(frozen=True)
class DensityInstance:
    dclass: DensityClass
    observations: np.ndarray
    planted_row: int


def make_density_instance(
    class_size: int,
    space_size: int,
    n: int,
    rng: np.random.Generator,
    floor: float = 0.02,
) -> DensityInstance:
    """Random density class with a probability floor, observations from one row.

    The floor keeps every entry positive so the log-ratio bound stays moderate;
    classes meant for the smoothing path can pass floor=0.
    """
    raw = rng.dirichlet(np.ones(space_size), size=class_size) + floor
    probs = raw / raw.sum(axis=1, keepdims=True)
    planted = int(rng.integers(class_size))
    observations = rng.choice(space_size, size=n, p=probs[planted])
    return DensityInstance(
        dclass=DensityClass(probs), observations=observations, planted_row=planted
    )


def make_logistic_problem(
    n: int,
    d: int,
    r: float,
    R: float,
    rng: np.random.Generator,
    noise: float = 1.0,
) -> LogisticProblem:
    """Gaussian covariates renormalized into the R-ball, labels from a planted
    parameter.  noise=0 labels deterministically by the sign of the logit
    (separable); otherwise labels are drawn from the planted sigmoid.
    """
    x = rng.standard_normal((n, d))
    norms = np.linalg.norm(x, axis=1)
    x *= (R / np.maximum(norms, R))[:, None]
    direction = rng.standard_normal(d)
    direction /= max(np.linalg.norm(direction), 1e-300)
    theta0 = r * direction
    logits = x @ theta0
    if noise == 0:
        y = np.where(logits >= 0, 1.0, -1.0)
    else:
        p = 1.0 / (1.0 + np.exp(-logits))
        y = np.where(rng.random(n) < p, 1.0, -1.0)
    return LogisticProblem(covariates=x, labels=y, r=r, R=R)


def make_linear_instance(
    n: int, d: int, rng: np.random.Generator, rank_deficient: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """Random design and bounded responses for the shrinkage-LOO baseline."""
    X = rng.standard_normal((n, d))
    if rank_deficient and d >= 2:
        X[:, -1] = X[:, 0]
    beta = rng.standard_normal(d)
    y = X @ beta + 0.1 * rng.standard_normal(n)
    return X, y


@dataclass(frozen=True)
class SyntheticTask:
    """A task distribution bundled with everything the generalization check needs."""

    make_instance: Callable[[int, np.random.Generator], tuple[PredictionTable, LabeledSample]]
    loss: LossModel
    aggregator: AggregationRule
    grid_factory: Callable[[int], ToleranceGrid]
    complexity: Callable[[int], float]
    oracle_risk: float
    multiplier: float


def threshold_task(noise: float = 0.0) -> SyntheticTask:
    """Threshold classification with flip noise; the best-in-class risk is the
    noise rate itself since the planted threshold is in the class."""

    def make_instance(n_total: int, rng: np.random.Generator):
        inst = make_classification_instance("thresholds-1d", n_total, noise, rng)
        return inst.table, inst.sample

    # ln is floored at n=3 so degenerate smoke sizes still get a valid grid
    return SyntheticTask(
        make_instance=make_instance,
        loss=zero_one_loss(),
        aggregator=MAJORITY_VOTE,
        grid_factory=lambda n_total: classification_grid(1, max(n_total, 3)),
        complexity=lambda n_total: 200.0 * math.log(max(n_total, 3)),
        oracle_risk=noise,
        multiplier=8.0,
    )

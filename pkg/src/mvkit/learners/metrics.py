"""Evaluation metrics: classification error rate and regression RRSE."""

from __future__ import annotations

import math
from typing import Sequence

from .samples import LearnError


def error_rate(predicted: Sequence[int], actual: Sequence[int]) -> float:
    """Fraction of mismatching labels."""
    if len(predicted) != len(actual) or not actual:
        raise LearnError(
            "length mismatch",
            f"predicted has {len(predicted)} labels, actual has {len(actual)} (need equal, >= 1)",
        )
    wrong = sum(1 for p, a in zip(predicted, actual) if p != a)
    return wrong / len(actual)


def rrse(predicted: Sequence[float], actual: Sequence[float], train_mean: float) -> float:
    """Root relative squared error, in percent.

    100 * sqrt(sum (pred - actual)^2 / sum (train_mean - actual)^2). The
    normalizer is the error of always predicting the training mean, so a
    mean predictor scores exactly 100 and a perfect predictor 0.
    """
    if len(predicted) != len(actual) or not actual:
        raise LearnError(
            "length mismatch",
            f"predicted has {len(predicted)} values, actual has {len(actual)} (need equal, >= 1)",
        )
    numerator = sum((p - a) ** 2 for p, a in zip(predicted, actual))
    denominator = sum((train_mean - a) ** 2 for a in actual)
    if denominator == 0.0:
        raise LearnError("degenerate actuals", "actuals all equal the training mean")
    return 100.0 * math.sqrt(numerator / denominator)

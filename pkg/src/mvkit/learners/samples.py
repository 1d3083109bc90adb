"""Training-sample construction for both learner families."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..scenario import Scenario, SpeedupMatrix


class LearnError(ValueError):
    """Learner failure with a stable machine-checkable ``category``."""

    def __init__(self, category: str, message: str) -> None:
        super().__init__(f"{category}: {message}")
        self.category = category


@dataclass(frozen=True)
class LabeledSample:
    """Direct-classification pair: dataset features -> best version id."""

    features: tuple[float, ...]
    label: int


@dataclass(frozen=True)
class RegressionSample:
    """Performance-prediction pair: dataset features -> ln speedup of one version."""

    features: tuple[float, ...]
    target: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.target):
            raise LearnError("non-finite target", f"regression target is {self.target}")


def best_version(
    matrix: SpeedupMatrix,
    dataset_index: int,
    candidates: tuple[int, ...],
    code_sizes: dict[int, int],
) -> int:
    """Argmax-speedup version for one dataset column.

    ``candidates`` must include the baseline if it is eligible. Ties go to
    the smaller code_size, then the smaller id.
    """
    col = {v: float(matrix.entries[matrix._version_index[v], dataset_index]) for v in candidates}
    return min(candidates, key=lambda v: (-col[v], code_sizes.get(v, 0), v))


def make_dc_labels(
    scenario: Scenario,
    matrix: SpeedupMatrix,
    representative: set[int] | frozenset[int],
) -> list[LabeledSample]:
    """One labeled sample per dataset.

    The label is the speedup argmax over the representative set plus the
    always-available baseline (s = 1.0), tie-broken by smaller code_size
    then smaller id. Features come straight from the dataset table.
    """
    if matrix.dataset_ids != scenario.dataset_ids:
        raise LearnError("dataset mismatch", "matrix and scenario list different datasets")
    known = set(matrix.version_ids)
    for v in representative:
        if v not in known:
            raise LearnError("unknown version", f"representative version {v} not in matrix")
    pool = tuple(sorted(representative)) + (matrix.baseline_id,)
    sizes = scenario.code_sizes()
    samples: list[LabeledSample] = []
    for i, d in enumerate(scenario.datasets):
        label = best_version(matrix, i, pool, sizes)
        samples.append(LabeledSample(features=d.features, label=label))
    return samples


def make_ppm_samples(scenario: Scenario, matrix: SpeedupMatrix, version_id: int) -> list[RegressionSample]:
    """Per-version regression pairs: features -> ln s(version, d)."""
    if matrix.dataset_ids != scenario.dataset_ids:
        raise LearnError("dataset mismatch", "matrix and scenario list different datasets")
    if version_id not in matrix.version_ids:
        raise LearnError("unknown version", f"version {version_id} not in matrix")
    logs = matrix.log_row(version_id)
    return [
        RegressionSample(features=d.features, target=float(logs[i]))
        for i, d in enumerate(scenario.datasets)
    ]

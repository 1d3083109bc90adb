"""Shared fixtures: a tiny hand-checked scenario and a planted synthetic one."""

from __future__ import annotations

import numpy as np
import pytest

from mvkit import Scenario, SynthConfig, generate, speedups
from mvkit.scenario import DatasetRecord, Version

TOY_SPEEDUPS = {1: (2.0, 1.0, 1.0), 2: (1.0, 2.0, 1.0), 3: (1.5, 1.5, 1.0)}


def make_toy_scenario() -> Scenario:
    """Three datasets, three candidates with hand-computable speedups.

    v1 doubles d1, v2 doubles d2, v3 gives 1.5x on both d1 and d2;
    nothing helps d3. Runtimes are 1/speedup against a unit baseline.
    """
    versions = (
        Version(0, "baseline", 1000, True),
        Version(1, "v1", 100, False),
        Version(2, "v2", 100, False),
        Version(3, "v3", 100, False),
    )
    datasets = (
        DatasetRecord(1, (1.0,)),
        DatasetRecord(2, (2.0,)),
        DatasetRecord(3, (3.0,)),
    )
    runtimes = np.ones((3, 4))
    for j, v in enumerate(versions):
        if v.is_baseline:
            continue
        for i in range(3):
            runtimes[i, j] = 1.0 / TOY_SPEEDUPS[v.id][i]
    return Scenario(versions=versions, datasets=datasets, runtimes=runtimes)


@pytest.fixture
def toy_scenario() -> Scenario:
    return make_toy_scenario()


@pytest.fixture
def toy_matrix(toy_scenario):
    return speedups(toy_scenario)


@pytest.fixture
def useless_scenario() -> Scenario:
    """One candidate that never beats the baseline (speedups 0.5 and 0.8)."""
    versions = (Version(0, "baseline", 1000, True), Version(1, "slow", 50, False))
    datasets = (DatasetRecord(1, (1.0,)), DatasetRecord(2, (2.0,)))
    runtimes = np.array([[1.0, 2.0], [1.0, 1.25]])
    return Scenario(versions=versions, datasets=datasets, runtimes=runtimes)


PLANTED_CONFIG = SynthConfig(
    n_versions=5,
    n_datasets=320,
    feature_arity=2,
    n_regions=4,
    seed=1001,
    feature_range=(1, 16),
)
PLANTED_TEST_SEED = 10001


@pytest.fixture(scope="session")
def planted():
    """A noiseless planted scenario plus its ground truth, shared per session."""
    scenario, truth = generate(PLANTED_CONFIG)
    return PLANTED_CONFIG, scenario, truth

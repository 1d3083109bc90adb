"""Decision-tree classifier and CART-style regression tree.

Both trees share one induction skeleton: greedy top-down growth, split
candidates at midpoints of consecutive distinct sorted feature values
among the node's samples, "<=" routing left (inclusive), deterministic
tie-breaks (lower feature index, then lower threshold). The classifier
maximizes information gain with entropy in bits and optionally applies
reduced-error pruning against a stratified seeded holdout; the regressor
maximizes the reduction in the sum of squared deviations and predicts the
leaf mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from ..rng import Rng, mix_seed
from .samples import LabeledSample, LearnError, RegressionSample

CLASSIFIER = "classifier"
REGRESSOR = "regressor"


@dataclass(frozen=True)
class TreeConfig:
    """Induction hyperparameters; defaults differ per tree kind.

    ``prune`` selects reduced-error pruning for the classifier: a
    stratified ``prune_holdout`` fraction (seeded shuffle per class) is
    withheld from growth and subtrees are collapsed bottom-up whenever
    that does not increase holdout error. ``seed`` is required iff
    ``prune`` is set; the regressor ignores both.
    """

    min_split: int = 2
    max_depth: int = 64
    prune: bool = False
    prune_holdout: float = 0.2
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.min_split < 2:
            raise LearnError("invalid config", f"min_split must be >= 2, got {self.min_split}")
        if self.max_depth < 0:
            raise LearnError("invalid config", f"max_depth must be >= 0, got {self.max_depth}")
        if not 0.0 < self.prune_holdout < 1.0:
            raise LearnError(
                "invalid config", f"prune_holdout must be in (0, 1), got {self.prune_holdout}"
            )
        if self.prune and self.seed is None:
            raise LearnError("invalid config", "pruning requires a seed for the holdout split")


REGTREE_DEFAULTS = TreeConfig(min_split=4)


@dataclass(frozen=True)
class TreeBranch:
    """Internal node: feature[feature] <= threshold goes left, else right."""

    feature: int
    threshold: float
    left: int
    right: int


@dataclass(frozen=True)
class TreeLeaf:
    """Terminal node: a version id (classifier) or a mean target (regressor)."""

    value: float


@dataclass(frozen=True)
class TreeModel:
    """Flat binary tree; node 0 is the root.

    ``kind`` is "classifier" (integer leaf values) or "regressor" (mean
    target leaves). ``arity`` is the feature-vector length every
    prediction input must match.
    """

    kind: str
    arity: int
    nodes: tuple[TreeBranch | TreeLeaf, ...]
    depth: int
    config: TreeConfig

    @property
    def leaf_count(self) -> int:
        return sum(1 for n in self.nodes if isinstance(n, TreeLeaf))

    def leaf_values(self) -> tuple[float, ...]:
        return tuple(n.value for n in self.nodes if isinstance(n, TreeLeaf))


# --- shared induction machinery ----------------------------------------------


def _midpoints(values: Sequence[float]) -> list[float]:
    """Split candidates: midpoints of consecutive distinct sorted values."""
    distinct = sorted(set(values))
    return [(a + b) / 2.0 for a, b in zip(distinct, distinct[1:])]


def _entropy_bits(labels: Sequence[int]) -> float:
    n = len(labels)
    counts: dict[int, int] = {}
    for lab in labels:
        counts[lab] = counts.get(lab, 0) + 1
    h = 0.0
    for c in counts.values():
        p = c / n
        h -= p * math.log2(p)
    return h


def _majority(labels: Sequence[int]) -> int:
    counts: dict[int, int] = {}
    for lab in labels:
        counts[lab] = counts.get(lab, 0) + 1
    return min(counts, key=lambda lab: (-counts[lab], lab))


def _sse(targets: Sequence[float]) -> float:
    n = len(targets)
    mean = sum(targets) / n
    return sum((t - mean) ** 2 for t in targets)


def _check_samples(samples: Sequence[LabeledSample] | Sequence[RegressionSample]) -> int:
    if not samples:
        raise LearnError("no training data", "need at least one sample")
    arity = len(samples[0].features)
    for s in samples:
        if len(s.features) != arity:
            raise LearnError("feature arity", f"expected arity {arity}, got {len(s.features)}")
    return arity


@dataclass
class _Grown:
    """Mutable tree under construction; frozen into a TreeModel at the end."""

    nodes: list[TreeBranch | TreeLeaf] = field(default_factory=list)

    def add(self, node: TreeBranch | TreeLeaf) -> int:
        self.nodes.append(node)
        return len(self.nodes) - 1


def _grow(
    grown: _Grown,
    samples: list,
    depth: int,
    config: TreeConfig,
    score_split,
    make_leaf,
    is_pure,
) -> int:
    """Recursive induction shared by both tree kinds; returns node index."""
    if (
        is_pure(samples)
        or len(samples) < config.min_split
        or depth >= config.max_depth
    ):
        return grown.add(make_leaf(samples))

    arity = len(samples[0].features)
    best: tuple[float, int, float] | None = None  # (score, feature, threshold)
    for j in range(arity):
        for thr in _midpoints([s.features[j] for s in samples]):
            score = score_split(samples, j, thr)
            key = (score, j, thr)
            if best is None or score > best[0] or (score == best[0] and (j, thr) < (best[1], best[2])):
                best = key
    if best is None or best[0] <= 0.0:
        return grown.add(make_leaf(samples))

    _, feature, threshold = best
    left_samples = [s for s in samples if s.features[feature] <= threshold]
    right_samples = [s for s in samples if s.features[feature] > threshold]
    index = grown.add(TreeBranch(feature, threshold, -1, -1))  # children patched below
    left = _grow(grown, left_samples, depth + 1, config, score_split, make_leaf, is_pure)
    right = _grow(grown, right_samples, depth + 1, config, score_split, make_leaf, is_pure)
    grown.nodes[index] = TreeBranch(feature, threshold, left, right)
    return index


def _tree_depth(nodes: Sequence[TreeBranch | TreeLeaf], index: int = 0, depth: int = 0) -> int:
    node = nodes[index]
    if isinstance(node, TreeLeaf):
        return depth
    return max(
        _tree_depth(nodes, node.left, depth + 1),
        _tree_depth(nodes, node.right, depth + 1),
    )


# --- classifier ---------------------------------------------------------------


def _information_gain(samples: list[LabeledSample], feature: int, threshold: float) -> float:
    left = [s.label for s in samples if s.features[feature] <= threshold]
    right = [s.label for s in samples if s.features[feature] > threshold]
    if not left or not right:
        return 0.0
    n = len(samples)
    parent = _entropy_bits([s.label for s in samples])
    return parent - (len(left) / n) * _entropy_bits(left) - (len(right) / n) * _entropy_bits(right)


def train_tree_classifier(
    samples: Sequence[LabeledSample], config: TreeConfig = TreeConfig()
) -> TreeModel:
    """Greedy entropy-gain decision tree over version labels.

    Growth stops on purity, on nodes smaller than ``min_split``, at
    ``max_depth``, or when no split has positive information gain; leaf
    labels are the majority (ties to the smaller id). With
    ``config.prune`` the tree is grown on a stratified 80% subset and
    reduced-error pruned against the remaining holdout.
    """
    _check_samples(samples)
    samples = list(samples)
    if config.prune:
        # Every class keeps at least one grow sample, so grow_set is never empty.
        grow_set, holdout = _stratified_holdout(samples, config.prune_holdout, config.seed)
        model = _train_unpruned(grow_set, config)
        return _reduced_error_prune(model, grow_set, holdout, config)
    return _train_unpruned(samples, config)


def _train_unpruned(samples: list[LabeledSample], config: TreeConfig) -> TreeModel:
    arity = _check_samples(samples)
    grown = _Grown()
    _grow(
        grown,
        samples,
        0,
        config,
        _information_gain,
        lambda ss: TreeLeaf(_majority([s.label for s in ss])),
        lambda ss: len({s.label for s in ss}) == 1,
    )
    nodes = tuple(grown.nodes)
    return TreeModel(CLASSIFIER, arity, nodes, _tree_depth(nodes), config)


def _stratified_holdout(
    samples: list[LabeledSample], fraction: float, seed: int
) -> tuple[list[LabeledSample], list[LabeledSample]]:
    """Seeded per-class split; tiny classes stay whole in the grow set."""
    by_class: dict[int, list[int]] = {}
    for i, s in enumerate(samples):
        by_class.setdefault(s.label, []).append(i)
    holdout_idx: set[int] = set()
    for label in sorted(by_class):
        idx = list(by_class[label])
        rng = Rng(mix_seed(seed, label))
        rng.shuffle(idx)
        take = min(len(idx) - 1, math.floor(len(idx) * fraction + 0.5))
        holdout_idx.update(idx[: max(take, 0)])
    grow = [s for i, s in enumerate(samples) if i not in holdout_idx]
    hold = [s for i, s in enumerate(samples) if i in holdout_idx]
    return grow, hold


def _route(nodes: Sequence[TreeBranch | TreeLeaf], x: Sequence[float], index: int = 0) -> int:
    while isinstance(nodes[index], TreeBranch):
        node = nodes[index]
        index = node.left if x[node.feature] <= node.threshold else node.right
    return index


def _reduced_error_prune(
    model: TreeModel,
    grow_set: list[LabeledSample],
    holdout: list[LabeledSample],
    config: TreeConfig,
) -> TreeModel:
    """Bottom-up subtree collapse whenever holdout error does not increase."""
    nodes = list(model.nodes)

    grow_at: dict[int, list[LabeledSample]] = {0: list(grow_set)}
    hold_at: dict[int, list[LabeledSample]] = {0: list(holdout)}

    def distribute(index: int) -> None:
        node = nodes[index]
        if isinstance(node, TreeLeaf):
            return
        for store in (grow_at, hold_at):
            here = store.get(index, [])
            store[node.left] = [s for s in here if s.features[node.feature] <= node.threshold]
            store[node.right] = [s for s in here if s.features[node.feature] > node.threshold]
        distribute(node.left)
        distribute(node.right)

    distribute(0)

    def subtree_errors(index: int, samples: list[LabeledSample]) -> int:
        return sum(1 for s in samples if nodes[_route(nodes, s.features, index)].value != s.label)

    def prune(index: int) -> None:
        node = nodes[index]
        if isinstance(node, TreeLeaf):
            return
        prune(node.left)
        prune(node.right)
        here_hold = hold_at.get(index, [])
        here_grow = grow_at.get(index, [])
        majority = _majority([s.label for s in here_grow]) if here_grow else None
        if majority is None:
            return
        as_leaf_errors = sum(1 for s in here_hold if s.label != majority)
        if as_leaf_errors <= subtree_errors(index, here_hold):
            nodes[index] = TreeLeaf(majority)

    prune(0)
    compacted = _compact(nodes)
    return TreeModel(CLASSIFIER, model.arity, compacted, _tree_depth(compacted), config)


def _compact(nodes: list[TreeBranch | TreeLeaf]) -> tuple[TreeBranch | TreeLeaf, ...]:
    """Drop nodes unreachable after pruning; renumber pre-order from the root."""
    order: list[int] = []
    remap: dict[int, int] = {}

    def visit(index: int) -> None:
        remap[index] = len(order)
        order.append(index)
        node = nodes[index]
        if isinstance(node, TreeBranch):
            visit(node.left)
            visit(node.right)

    visit(0)
    out: list[TreeBranch | TreeLeaf] = []
    for old in order:
        node = nodes[old]
        if isinstance(node, TreeBranch):
            out.append(TreeBranch(node.feature, node.threshold, remap[node.left], remap[node.right]))
        else:
            out.append(node)
    return tuple(out)


def predict_tree(model: TreeModel, x: Sequence[float]) -> tuple[float, int]:
    """Route a feature vector to its leaf; returns (value, comparisons)."""
    if len(x) != model.arity:
        raise LearnError("feature arity", f"expected arity {model.arity}, got {len(x)}")
    index = 0
    comparisons = 0
    while isinstance(model.nodes[index], TreeBranch):
        node = model.nodes[index]
        comparisons += 1
        index = node.left if x[node.feature] <= node.threshold else node.right
    leaf = model.nodes[index]
    value = leaf.value
    return (int(value) if model.kind == CLASSIFIER else float(value)), comparisons


# --- regression tree ----------------------------------------------------------


def _sse_reduction(samples: list[RegressionSample], feature: int, threshold: float) -> float:
    left = [s.target for s in samples if s.features[feature] <= threshold]
    right = [s.target for s in samples if s.features[feature] > threshold]
    if not left or not right:
        return 0.0
    return _sse([s.target for s in samples]) - _sse(left) - _sse(right)


def train_regression_tree(
    samples: Sequence[RegressionSample], config: TreeConfig = REGTREE_DEFAULTS
) -> TreeModel:
    """CART-style regression tree: SSE-reduction splits, mean-target leaves.

    Growth stops on zero variance, nodes smaller than ``min_split``,
    ``max_depth``, or when no split reduces the squared error.
    """
    arity = _check_samples(samples)
    samples = list(samples)
    grown = _Grown()
    _grow(
        grown,
        samples,
        0,
        config,
        _sse_reduction,
        lambda ss: TreeLeaf(sum(s.target for s in ss) / len(ss)),
        lambda ss: len({s.target for s in ss}) == 1,
    )
    nodes = tuple(grown.nodes)
    return TreeModel(REGRESSOR, arity, nodes, _tree_depth(nodes), config)

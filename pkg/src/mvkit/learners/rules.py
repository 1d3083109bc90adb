"""Ordered rule-list classifier via sequential covering.

Classes are handled in ascending frequency so rare versions get rules
first and the common case falls through to the default label. Each rule
grows greedily: among midpoint thresholds over the still-uncovered
samples, append the (feature, direction, threshold) condition that
maximizes the rule's precision for the target class, until precision hits
1.0 or stops improving. A finished rule is kept only when it covers at
least ``min_cover`` samples at precision ``min_precision`` or better;
covered samples then leave the pool.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .samples import LabeledSample, LearnError

LE = "le"  # feature <= threshold
GT = "gt"  # feature > threshold


@dataclass(frozen=True)
class Condition:
    """One comparison: feature <= threshold (le) or feature > threshold (gt)."""

    feature: int
    op: str
    threshold: float

    def holds(self, x: Sequence[float]) -> bool:
        value = x[self.feature]
        return value <= self.threshold if self.op == LE else value > self.threshold


@dataclass(frozen=True)
class Rule:
    """Conjunction of conditions concluding a version label."""

    conditions: tuple[Condition, ...]
    label: int

    def matches(self, x: Sequence[float]) -> bool:
        return all(c.holds(x) for c in self.conditions)


@dataclass(frozen=True)
class RuleConfig:
    min_cover: int = 2
    min_precision: float = 0.7
    seed: int | None = None  # reserved; growth itself is deterministic

    def __post_init__(self) -> None:
        if self.min_cover < 1:
            raise LearnError("invalid config", f"min_cover must be >= 1, got {self.min_cover}")
        if not 0.0 < self.min_precision <= 1.0:
            raise LearnError(
                "invalid config", f"min_precision must be in (0, 1], got {self.min_precision}"
            )


@dataclass(frozen=True)
class RuleListModel:
    """First-match ordered rules with a default label fallback."""

    rules: tuple[Rule, ...]
    default_label: int
    arity: int
    config: RuleConfig


def _majority(labels: Sequence[int]) -> int:
    counts: dict[int, int] = {}
    for lab in labels:
        counts[lab] = counts.get(lab, 0) + 1
    return min(counts, key=lambda lab: (-counts[lab], lab))


def _midpoints(values: Sequence[float]) -> list[float]:
    distinct = sorted(set(values))
    return [(a + b) / 2.0 for a, b in zip(distinct, distinct[1:])]


def _grow_rule(pool: list[LabeledSample], target: int, arity: int) -> tuple[Rule, list[int]]:
    """Greedily conjoin precision-maximizing conditions for one class.

    Returns the rule and the pool indices it covers. Ties go to higher
    coverage, then lower feature index, lower threshold, and "<=" before
    ">". A rule that never improves on the empty conjunction comes back
    with zero conditions; the caller rejects it.
    """
    conditions: list[Condition] = []
    covered = list(range(len(pool)))

    def precision(indices: list[int]) -> float:
        return sum(1 for i in indices if pool[i].label == target) / len(indices)

    current = precision(covered)
    while current < 1.0:
        best: tuple[float, int, int, float, int] | None = None
        best_cond: Condition | None = None
        best_covered: list[int] | None = None
        for feature in range(arity):
            for threshold in _midpoints([pool[i].features[feature] for i in covered]):
                for op_rank, op in enumerate((LE, GT)):
                    cond = Condition(feature, op, threshold)
                    kept = [i for i in covered if cond.holds(pool[i].features)]
                    if not kept:
                        continue
                    key = (-precision(kept), -len(kept), feature, threshold, op_rank)
                    if best is None or key < best:
                        best, best_cond, best_covered = key, cond, kept
        if best is None or -best[0] <= current:
            break
        conditions.append(best_cond)
        covered = best_covered
        current = -best[0]
    return Rule(tuple(conditions), target), covered


def train_rule_list(
    samples: Sequence[LabeledSample], config: RuleConfig = RuleConfig()
) -> RuleListModel:
    """Sequential covering over version labels; see module docstring."""
    if not samples:
        raise LearnError("no training data", "need at least one sample")
    arity = len(samples[0].features)
    for s in samples:
        if len(s.features) != arity:
            raise LearnError("feature arity", f"expected arity {arity}, got {len(s.features)}")

    counts: dict[int, int] = {}
    for s in samples:
        counts[s.label] = counts.get(s.label, 0) + 1
    classes = sorted(counts, key=lambda lab: (counts[lab], lab))

    pool = list(samples)
    rules: list[Rule] = []
    for target in classes:
        while any(s.label == target for s in pool):
            rule, covered = _grow_rule(pool, target, arity)
            kept = len(covered)
            hits = sum(1 for i in covered if pool[i].label == target)
            ok = (
                rule.conditions
                and kept >= config.min_cover
                and hits / kept >= config.min_precision
            )
            if not ok:
                break
            rules.append(rule)
            covered_set = set(covered)
            pool = [s for i, s in enumerate(pool) if i not in covered_set]

    default = _majority([s.label for s in pool]) if pool else _majority([s.label for s in samples])
    return RuleListModel(tuple(rules), default, arity, config)


def predict_rules(model: RuleListModel, x: Sequence[float]) -> tuple[int, int]:
    """First matching rule wins, else the default label.

    Returns (label, conditions evaluated); evaluation of a rule stops at
    its first failing condition.
    """
    if len(x) != model.arity:
        raise LearnError("feature arity", f"expected arity {model.arity}, got {len(x)}")
    evaluated = 0
    for rule in model.rules:
        matched = True
        for cond in rule.conditions:
            evaluated += 1
            if not cond.holds(x):
                matched = False
                break
        if matched:
            return rule.label, evaluated
    return model.default_label, evaluated

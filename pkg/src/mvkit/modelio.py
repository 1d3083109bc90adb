"""Trained-model persistence so CLI stages compose through files.

One text format (`MVMODEL v1`) covers all four learner families:
classifier trees, rule lists, and per-version regressor bundles
(regression trees or linear models). Thresholds, targets, and
coefficients print with 17 significant digits, so save -> load -> save is
byte-stable.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

from .learners.linear import LinearModel
from .learners.rules import Condition, GT, LE, Rule, RuleConfig, RuleListModel
from .learners.trees import CLASSIFIER, REGRESSOR, TreeBranch, TreeConfig, TreeLeaf, TreeModel

HEADER_PREFIX = "MVMODEL v1"

AnyModel = TreeModel | RuleListModel | dict[int, TreeModel] | dict[int, LinearModel]


class ModelIOError(ValueError):
    """Model document failure with a stable ``category``."""

    def __init__(self, category: str, message: str) -> None:
        super().__init__(f"{category}: {message}")
        self.category = category


def _g17(value: float) -> str:
    return format(value, ".17g")


def _header(algorithm: str, arity: int, extra: dict[str, str]) -> str:
    parts = [HEADER_PREFIX, f"algorithm={algorithm}", f"arity={arity}"]
    parts.extend(f"{k}={v}" for k, v in extra.items())
    return "; ".join(parts)


def _tree_lines(model: TreeModel) -> list[str]:
    lines: list[str] = []
    for node in model.nodes:
        if isinstance(node, TreeBranch):
            lines.append(f"B {node.feature} {_g17(node.threshold)} {node.left} {node.right}")
        elif model.kind == CLASSIFIER:
            lines.append(f"L {int(node.value)}")
        else:
            lines.append(f"L {_g17(float(node.value))}")
    return lines


def _tree_config_extra(config: TreeConfig) -> dict[str, str]:
    return {
        "min_split": str(config.min_split),
        "max_depth": str(config.max_depth),
        "prune": "1" if config.prune else "0",
        "prune_holdout": repr(config.prune_holdout),
        "seed": "-" if config.seed is None else str(config.seed),
    }


def dumps(model: AnyModel) -> str:
    """Serialize any supported model to the MVMODEL text form."""
    if isinstance(model, TreeModel):
        if model.kind != CLASSIFIER:
            raise ModelIOError(
                "model kind", "a lone regression tree is not a dispatch model; save a bundle"
            )
        extra = {"nodes": str(len(model.nodes))} | _tree_config_extra(model.config)
        return "\n".join([_header("tree", model.arity, extra), *_tree_lines(model)]) + "\n"
    if isinstance(model, RuleListModel):
        cfg = model.config
        extra = {
            "rules": str(len(model.rules)),
            "min_cover": str(cfg.min_cover),
            "min_precision": repr(cfg.min_precision),
            "seed": "-" if cfg.seed is None else str(cfg.seed),
        }
        lines = [_header("rules", model.arity, extra)]
        for rule in model.rules:
            parts = [f"R {rule.label} {len(rule.conditions)}"]
            for cond in rule.conditions:
                parts.append(f"{cond.feature} {cond.op} {_g17(cond.threshold)}")
            lines.append(" ".join(parts))
        lines.append(f"D {model.default_label}")
        return "\n".join(lines) + "\n"
    if isinstance(model, Mapping):
        if not model:
            raise ModelIOError("empty bundle", "a PPM bundle needs at least one version model")
        versions = sorted(model)
        first = model[versions[0]]
        if isinstance(first, TreeModel):
            arity = first.arity
            extra = {"versions": str(len(versions))} | _tree_config_extra(first.config)
            lines = [_header("regtree-bundle", arity, extra)]
            for v in versions:
                sub = model[v]
                if not isinstance(sub, TreeModel) or sub.kind != REGRESSOR:
                    raise ModelIOError("model kind", "regtree bundle must hold regression trees only")
                lines.append(f"V {v}; nodes={len(sub.nodes)}")
                lines.extend(_tree_lines(sub))
            return "\n".join(lines) + "\n"
        arity = first.arity
        lines = [_header("linreg-bundle", arity, {"versions": str(len(versions))})]
        for v in versions:
            sub = model[v]
            if not isinstance(sub, LinearModel):
                raise ModelIOError("model kind", "linreg bundle must hold linear models only")
            coeffs = " ".join(_g17(c) for c in sub.coefficients)
            lines.append(f"V {v}")
            lines.append(f"C {_g17(sub.intercept)} {coeffs}".rstrip())
        return "\n".join(lines) + "\n"
    raise ModelIOError("model kind", f"cannot serialize {type(model).__name__}")


def _parse_header(line: str) -> dict[str, str]:
    parts = [p.strip() for p in line.split(";")]
    if not parts or parts[0] != HEADER_PREFIX:
        raise ModelIOError("parse error", f"line 1: expected {HEADER_PREFIX!r} header")
    attrs: dict[str, str] = {}
    for part in parts[1:]:
        key, eq, value = part.partition("=")
        if not eq:
            raise ModelIOError("parse error", f"line 1: malformed header attribute {part!r}")
        attrs[key] = value
    return attrs


def _attr_int(attrs: dict[str, str], key: str) -> int:
    try:
        return int(attrs[key])
    except KeyError:
        raise ModelIOError("parse error", f"line 1: header missing {key}") from None
    except ValueError:
        raise ModelIOError("parse error", f"line 1: {key} must be an integer") from None


def _tree_config_from(attrs: dict[str, str]) -> TreeConfig:
    try:
        return TreeConfig(
            min_split=int(attrs.get("min_split", "2")),
            max_depth=int(attrs.get("max_depth", "64")),
            prune=attrs.get("prune", "0") == "1",
            prune_holdout=float(attrs.get("prune_holdout", "0.2")),
            seed=None if attrs.get("seed", "-") == "-" else int(attrs["seed"]),
        )
    except ValueError as exc:
        raise ModelIOError("parse error", f"line 1: bad tree config ({exc})") from None


def _parse_tree_nodes(
    lines: list[str], start: int, count: int, arity: int, kind: str
) -> tuple[TreeBranch | TreeLeaf, ...]:
    nodes: list[TreeBranch | TreeLeaf] = []
    for offset in range(count):
        lineno = start + offset + 1
        if start + offset >= len(lines):
            raise ModelIOError("parse error", f"line {lineno}: expected {count} nodes, text ended")
        parts = lines[start + offset].split()
        try:
            if parts and parts[0] == "B" and len(parts) == 5:
                feature, threshold = int(parts[1]), float(parts[2])
                left, right = int(parts[3]), int(parts[4])
                if not 0 <= feature < arity:
                    raise ModelIOError(
                        "parse error", f"line {lineno}: feature {feature} outside arity {arity}"
                    )
                if not (0 <= left < count and 0 <= right < count):
                    raise ModelIOError("parse error", f"line {lineno}: child index out of range")
                nodes.append(TreeBranch(feature, threshold, left, right))
            elif parts and parts[0] == "L" and len(parts) == 2:
                value = int(parts[1]) if kind == CLASSIFIER else float(parts[1])
                nodes.append(TreeLeaf(value))
            else:
                raise ModelIOError(
                    "parse error", f"line {lineno}: unrecognized node {lines[start + offset]!r}"
                )
        except ValueError:
            raise ModelIOError(
                "parse error", f"line {lineno}: malformed node {lines[start + offset]!r}"
            ) from None
    return tuple(nodes)


def _tree_depth(nodes: tuple[TreeBranch | TreeLeaf, ...], index: int = 0, depth: int = 0, seen: frozenset[int] = frozenset()) -> int:
    if index in seen or not 0 <= index < len(nodes):
        raise ModelIOError("parse error", f"node graph is cyclic or out of range at {index}")
    node = nodes[index]
    if isinstance(node, TreeLeaf):
        return depth
    return max(
        _tree_depth(nodes, node.left, depth + 1, seen | {index}),
        _tree_depth(nodes, node.right, depth + 1, seen | {index}),
    )


def loads(text: str) -> AnyModel:
    """Parse an MVMODEL document back into its model object."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ModelIOError("parse error", "line 1: empty model document")
    attrs = _parse_header(lines[0])
    algorithm = attrs.get("algorithm")
    arity = _attr_int(attrs, "arity")
    if arity < 1:
        raise ModelIOError("parse error", "line 1: arity must be >= 1")

    if algorithm == "tree":
        count = _attr_int(attrs, "nodes")
        nodes = _parse_tree_nodes(lines, 1, count, arity, CLASSIFIER)
        if len(lines) != 1 + count:
            raise ModelIOError("parse error", f"line {count + 2}: trailing content after nodes")
        return TreeModel(CLASSIFIER, arity, nodes, _tree_depth(nodes), _tree_config_from(attrs))

    if algorithm == "rules":
        n_rules = _attr_int(attrs, "rules")
        try:
            config = RuleConfig(
                min_cover=int(attrs.get("min_cover", "2")),
                min_precision=float(attrs.get("min_precision", "0.7")),
                seed=None if attrs.get("seed", "-") == "-" else int(attrs["seed"]),
            )
        except ValueError as exc:
            raise ModelIOError("parse error", f"line 1: bad rule config ({exc})") from None
        rules: list[Rule] = []
        lineno = 2
        for i in range(n_rules):
            if i + 1 >= len(lines):
                raise ModelIOError("parse error", f"line {lineno}: expected {n_rules} rules, text ended")
            parts = lines[i + 1].split()
            if len(parts) < 3 or parts[0] != "R":
                raise ModelIOError("parse error", f"line {lineno}: malformed rule {lines[i + 1]!r}")
            try:
                label, n_conditions = int(parts[1]), int(parts[2])
                if len(parts) != 3 + 3 * n_conditions:
                    raise ValueError
                conditions = []
                for c in range(n_conditions):
                    feature = int(parts[3 + 3 * c])
                    op = parts[4 + 3 * c]
                    threshold = float(parts[5 + 3 * c])
                    if op not in (LE, GT) or not 0 <= feature < arity:
                        raise ValueError
                    conditions.append(Condition(feature, op, threshold))
            except ValueError:
                raise ModelIOError("parse error", f"line {lineno}: malformed rule {lines[i + 1]!r}") from None
            rules.append(Rule(tuple(conditions), label))
            lineno += 1
        if n_rules + 1 >= len(lines) or not lines[n_rules + 1].startswith("D "):
            raise ModelIOError("parse error", f"line {lineno}: missing default label line")
        try:
            default = int(lines[n_rules + 1].split()[1])
        except (IndexError, ValueError):
            raise ModelIOError("parse error", f"line {lineno}: malformed default {lines[n_rules + 1]!r}") from None
        return RuleListModel(tuple(rules), default, arity, config)

    if algorithm == "regtree-bundle":
        n_versions = _attr_int(attrs, "versions")
        config = _tree_config_from(attrs)
        bundle: dict[int, TreeModel] = {}
        at = 1
        for _ in range(n_versions):
            if at >= len(lines) or not lines[at].startswith("V "):
                raise ModelIOError("parse error", f"line {at + 1}: expected version header")
            head = lines[at].split(";")
            try:
                version = int(head[0].split()[1])
                count = int(head[1].strip().partition("=")[2])
            except (IndexError, ValueError):
                raise ModelIOError("parse error", f"line {at + 1}: malformed version header {lines[at]!r}") from None
            nodes = _parse_tree_nodes(lines, at + 1, count, arity, REGRESSOR)
            bundle[version] = TreeModel(REGRESSOR, arity, nodes, _tree_depth(nodes), config)
            at += 1 + count
        if at != len(lines):
            raise ModelIOError("parse error", f"line {at + 1}: trailing content after bundle")
        return bundle

    if algorithm == "linreg-bundle":
        n_versions = _attr_int(attrs, "versions")
        bundle_lin: dict[int, LinearModel] = {}
        at = 1
        for _ in range(n_versions):
            if at + 1 >= len(lines) or not lines[at].startswith("V ") or not lines[at + 1].startswith("C "):
                raise ModelIOError("parse error", f"line {at + 1}: expected V/C line pair")
            try:
                version = int(lines[at].split()[1])
                numbers = [float(x) for x in lines[at + 1].split()[1:]]
            except (IndexError, ValueError):
                raise ModelIOError("parse error", f"line {at + 2}: malformed coefficients") from None
            if len(numbers) != arity + 1:
                raise ModelIOError(
                    "parse error", f"line {at + 2}: expected {arity + 1} numbers, got {len(numbers)}"
                )
            bundle_lin[version] = LinearModel(numbers[0], tuple(numbers[1:]))
            at += 2
        if at != len(lines):
            raise ModelIOError("parse error", f"line {at + 1}: trailing content after bundle")
        return bundle_lin

    raise ModelIOError("parse error", f"line 1: unknown algorithm {algorithm!r}")


def save_model(model: AnyModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(model))


def load_model(path: str | Path):
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())

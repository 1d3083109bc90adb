"""Dispatcher compilation, serialization, templating, and size accounting.

A dispatcher is the portable artifact that picks a version at run time: a
flat array of branch nodes (feature <= threshold goes left) ending in
version-id leaves. Decision trees map to it one to one; rule lists are
lowered to an equivalent strict tree by turning each rule into a chain of
branches whose failure edges each receive their own copy of the
fall-through logic (no shared subtrees, so the node array is a tree, not
a DAG).

The canonical text form (`MVDISPATCH v1`) lists nodes in pre-order from
the entry, one per line, with thresholds at 17 significant digits; it is
byte-stable and serves as the dispatcher's size measure. A rendered
source-code view is produced from a fragment template, and a reference
interpreter for the default C-like template closes the loop in tests.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from .learners.rules import GT, LE, RuleListModel
from .learners.trees import CLASSIFIER, TreeBranch, TreeLeaf, TreeModel

KIND_TREE = "tree"
KIND_RULES = "rules-lowered-to-tree"

HEADER_PREFIX = "MVDISPATCH v1"


class DispatchError(ValueError):
    """Dispatcher failure with a stable machine-checkable ``category``."""

    def __init__(self, category: str, message: str) -> None:
        super().__init__(f"{category}: {message}")
        self.category = category


@dataclass(frozen=True)
class Branch:
    """features[feature] <= threshold routes to left, else to right."""

    feature: int
    threshold: float
    left: int
    right: int


@dataclass(frozen=True)
class Leaf:
    version_id: int


@dataclass(frozen=True)
class DispatcherSpec:
    """Immutable compiled dispatcher; ``entry_index`` starts evaluation.

    ``byte_size`` is the length of the canonical serialization and stands
    in for the selection mechanism's code-size cost.
    """

    feature_arity: int
    nodes: tuple[Branch | Leaf, ...]
    entry_index: int
    model_kind: str

    @cached_property
    def byte_size(self) -> int:
        return len(serialize(self).encode("utf-8"))

    @cached_property
    def leaf_count(self) -> int:
        return sum(1 for n in self.nodes if isinstance(n, Leaf))

    @cached_property
    def depth(self) -> int:
        return _depth_from(self.nodes, self.entry_index, set())

    def leaf_versions(self) -> frozenset[int]:
        return frozenset(n.version_id for n in self.nodes if isinstance(n, Leaf))


def _depth_from(nodes: Sequence[Branch | Leaf], index: int, seen: set[int]) -> int:
    if index < 0 or index >= len(nodes) or index in seen:
        raise DispatchError("invalid dispatcher", f"node index {index} out of range or cyclic")
    node = nodes[index]
    if isinstance(node, Leaf):
        return 0
    return 1 + max(
        _depth_from(nodes, node.left, seen | {index}),
        _depth_from(nodes, node.right, seen | {index}),
    )


# --- compilation ---------------------------------------------------------------


def compile_dispatcher(model: TreeModel | RuleListModel) -> DispatcherSpec:
    """Lower a trained DC model to a dispatcher with identical predictions."""
    if isinstance(model, TreeModel):
        if model.kind != CLASSIFIER:
            raise DispatchError("model kind", "only classifier trees compile to dispatchers")
        nodes: list[Branch | Leaf] = []
        for node in model.nodes:
            if isinstance(node, TreeBranch):
                if not 0 <= node.feature < model.arity:
                    raise DispatchError(
                        "feature range", f"feature index {node.feature} outside arity {model.arity}"
                    )
                nodes.append(Branch(node.feature, node.threshold, node.left, node.right))
            else:
                nodes.append(Leaf(int(node.value)))
        return _canonical(DispatcherSpec(model.arity, tuple(nodes), 0, KIND_TREE))
    if isinstance(model, RuleListModel):
        return _compile_rules(model)
    raise DispatchError("model kind", f"cannot compile {type(model).__name__}")


def _compile_rules(model: RuleListModel) -> DispatcherSpec:
    """Each rule becomes a chain of branches; every failed condition falls
    through to a private copy of the remaining rules, ending at the
    default leaf, so the result is a strict tree."""
    nodes: list[Branch | Leaf] = []

    def emit(rule_index: int) -> int:
        if rule_index == len(model.rules):
            nodes.append(Leaf(model.default_label))
            return len(nodes) - 1
        rule = model.rules[rule_index]
        success = len(nodes)
        nodes.append(Leaf(rule.label))
        # Build the chain back to front: the last condition points at the
        # success leaf, earlier conditions point at the next link.
        next_on_pass = success
        for cond in reversed(rule.conditions):
            if not 0 <= cond.feature < model.arity:
                raise DispatchError(
                    "feature range", f"feature index {cond.feature} outside arity {model.arity}"
                )
            fail = emit(rule_index + 1)
            if cond.op == LE:
                nodes.append(Branch(cond.feature, cond.threshold, next_on_pass, fail))
            elif cond.op == GT:
                nodes.append(Branch(cond.feature, cond.threshold, fail, next_on_pass))
            else:
                raise DispatchError("model kind", f"unknown condition op {cond.op!r}")
            next_on_pass = len(nodes) - 1
        return next_on_pass

    entry = emit(0)
    return _canonical(DispatcherSpec(model.arity, tuple(nodes), entry, KIND_RULES))


def _canonical(spec: DispatcherSpec) -> DispatcherSpec:
    """Renumber nodes in pre-order from the entry; entry becomes index 0.

    Also validates reachability bookkeeping: every walked index must be in
    range and visited at most once (strict tree).
    """
    order: list[int] = []
    remap: dict[int, int] = {}

    def visit(index: int) -> None:
        if not 0 <= index < len(spec.nodes):
            raise DispatchError("invalid dispatcher", f"node index {index} out of range")
        if index in remap:
            raise DispatchError("invalid dispatcher", f"node {index} reached twice; not a tree")
        remap[index] = len(order)
        order.append(index)
        node = spec.nodes[index]
        if isinstance(node, Branch):
            visit(node.left)
            visit(node.right)

    visit(spec.entry_index)
    out: list[Branch | Leaf] = []
    for old in order:
        node = spec.nodes[old]
        if isinstance(node, Branch):
            out.append(Branch(node.feature, node.threshold, remap[node.left], remap[node.right]))
        else:
            out.append(node)
    return DispatcherSpec(spec.feature_arity, tuple(out), 0, spec.model_kind)


# --- evaluation ----------------------------------------------------------------


def eval_dispatcher(spec: DispatcherSpec, x: Sequence[float]) -> tuple[int, int]:
    """Route a feature vector; returns (version id, comparisons made).

    Walks at most node-count steps; running past that, or hitting an
    out-of-range index, reports "invalid dispatcher" rather than looping.
    """
    if len(x) != spec.feature_arity:
        raise DispatchError(
            "feature arity", f"expected arity {spec.feature_arity}, got {len(x)}"
        )
    index = spec.entry_index
    comparisons = 0
    for _ in range(len(spec.nodes) + 1):
        if not 0 <= index < len(spec.nodes):
            raise DispatchError("invalid dispatcher", f"node index {index} out of range")
        node = spec.nodes[index]
        if isinstance(node, Leaf):
            return node.version_id, comparisons
        if not 0 <= node.feature < spec.feature_arity:
            raise DispatchError("invalid dispatcher", f"feature index {node.feature} out of range")
        comparisons += 1
        index = node.left if x[node.feature] <= node.threshold else node.right
    raise DispatchError("invalid dispatcher", "evaluation exceeded node count; cycle suspected")


# --- canonical text form --------------------------------------------------------


def _format_threshold(value: float) -> str:
    return format(value, ".17g")


def serialize(spec: DispatcherSpec) -> str:
    """Canonical text: pre-order nodes, LF line ends, 17-digit thresholds.

    Serializing a deserialized document reproduces it byte for byte.
    """
    canon = spec if _is_canonical(spec) else _canonical(spec)
    lines = [f"{HEADER_PREFIX}; arity={canon.feature_arity}; nodes={len(canon.nodes)}"]
    for node in canon.nodes:
        if isinstance(node, Branch):
            lines.append(
                f"B {node.feature} {_format_threshold(node.threshold)} {node.left} {node.right}"
            )
        else:
            lines.append(f"L {node.version_id}")
    return "\n".join(lines) + "\n"


def _is_canonical(spec: DispatcherSpec) -> bool:
    if spec.entry_index != 0:
        return False
    expected = 0

    def visit(index: int) -> bool:
        nonlocal expected
        if index != expected:
            return False
        expected += 1
        node = spec.nodes[index]
        if isinstance(node, Branch):
            if not (0 <= node.left < len(spec.nodes) and 0 <= node.right < len(spec.nodes)):
                raise DispatchError("invalid dispatcher", f"child index out of range at node {index}")
            return visit(node.left) and visit(node.right)
        return True

    return visit(0) and expected == len(spec.nodes)


def deserialize(text: str) -> DispatcherSpec:
    """Parse the canonical text form; errors name the offending line."""
    lines = text.splitlines()
    if not lines:
        raise DispatchError("parse error", "line 1: empty dispatcher document")
    header = re.fullmatch(
        re.escape(HEADER_PREFIX) + r"; arity=(\d+); nodes=(\d+)", lines[0].strip()
    )
    if not header:
        raise DispatchError("parse error", f"line 1: malformed header {lines[0]!r}")
    arity, count = int(header.group(1)), int(header.group(2))
    if arity < 1:
        raise DispatchError("parse error", "line 1: arity must be >= 1")
    body = [ln for ln in lines[1:]]
    if len(body) != count:
        raise DispatchError(
            "parse error", f"line 1: header promises {count} nodes, found {len(body)}"
        )
    nodes: list[Branch | Leaf] = []
    for offset, line in enumerate(body, start=2):
        parts = line.split()
        if parts and parts[0] == "B" and len(parts) == 5:
            try:
                feature = int(parts[1])
                threshold = float(parts[2])
                left, right = int(parts[3]), int(parts[4])
            except ValueError:
                raise DispatchError("parse error", f"line {offset}: malformed branch {line!r}") from None
            if not 0 <= feature < arity:
                raise DispatchError("parse error", f"line {offset}: feature {feature} outside arity {arity}")
            if not (0 <= left < count and 0 <= right < count):
                raise DispatchError("parse error", f"line {offset}: child index out of range")
            nodes.append(Branch(feature, threshold, left, right))
        elif parts and parts[0] == "L" and len(parts) == 2:
            try:
                nodes.append(Leaf(int(parts[1])))
            except ValueError:
                raise DispatchError("parse error", f"line {offset}: malformed leaf {line!r}") from None
        else:
            raise DispatchError("parse error", f"line {offset}: unrecognized node {line!r}")
    spec = DispatcherSpec(arity, tuple(nodes), 0, KIND_TREE)
    _depth_from(spec.nodes, 0, set())  # rejects cycles and unreachable-entry malformations
    return spec


# --- template rendering ----------------------------------------------------------

FRAGMENT_NAMES = ("BRANCH", "FEAT", "VER", "CMP_LE")
DISPATCH_MARK = "{{DISPATCH}}"

DEFAULT_TEMPLATE = """\
{{BRANCH cond then else}}
if ({{cond}}) {
    {{then}}
} else {
    {{else}}
}
{{END}}
{{VER id}}
return {{id}};
{{END}}
{{FEAT i}}
x[{{i}}]
{{END}}
{{CMP_LE}}
<=
{{END}}
int select_version(const double *x) {
    {{DISPATCH}}
}
"""


def _parse_template(template: str) -> tuple[dict[str, str], str]:
    """Split fragment definition blocks from the surrounding body text.

    A block starts at a line `{{NAME ...}}` (NAME one of BRANCH, FEAT,
    VER, CMP_LE) and runs to the next `{{END}}` line; everything else is
    body. Fragment bodies keep internal newlines, minus one trailing one.
    """
    fragments: dict[str, str] = {}
    body_lines: list[str] = []
    lines = template.splitlines()
    i = 0
    opener = re.compile(r"\{\{(" + "|".join(FRAGMENT_NAMES) + r")(\s[^}]*)?\}\}\s*$")
    while i < len(lines):
        m = opener.fullmatch(lines[i].strip()) if lines[i].strip().startswith("{{") else None
        if m and m.group(1) in FRAGMENT_NAMES:
            name = m.group(1)
            block: list[str] = []
            i += 1
            while i < len(lines) and lines[i].strip() != "{{END}}":
                block.append(lines[i])
                i += 1
            if i == len(lines):
                raise DispatchError("template error", f"fragment {name} not closed with {{{{END}}}}")
            fragments[name] = "\n".join(block)
            i += 1
        else:
            body_lines.append(lines[i])
            i += 1
    return fragments, "\n".join(body_lines)


def _substitute(fragment: str, slots: dict[str, str]) -> str:
    """Replace {{slot}} markers, indenting multi-line values to the
    marker's column so nested conditionals stay readable."""
    out = fragment
    for slot, value in slots.items():
        marker = "{{" + slot + "}}"
        while marker in out:
            at = out.index(marker)
            line_start = out.rfind("\n", 0, at) + 1
            prefix = out[line_start:at]
            indent = prefix if prefix.strip() == "" else ""
            indented = value.replace("\n", "\n" + indent)
            out = out[:at] + indented + out[at + len(marker):]
    return out


def render_template(spec: DispatcherSpec, template: str = DEFAULT_TEMPLATE) -> str:
    """Expand the dispatcher into source text shaped by the template.

    The template must define all four fragments (BRANCH with cond/then/
    else slots, VER with an id slot, FEAT with an i slot, CMP_LE with no
    slots) and place one {{DISPATCH}} marker in its body.
    """
    fragments, body = _parse_template(template)
    for name in FRAGMENT_NAMES:
        if name not in fragments:
            raise DispatchError("template error", f"template missing required fragment {name}")
    if DISPATCH_MARK not in body:
        raise DispatchError("template error", "template missing required placeholder {{DISPATCH}}")

    def render_node(index: int) -> str:
        node = spec.nodes[index]
        if isinstance(node, Leaf):
            return _substitute(fragments["VER"], {"id": str(node.version_id)})
        feat = _substitute(fragments["FEAT"], {"i": str(node.feature)})
        cond = f"{feat} {fragments['CMP_LE']} {_format_threshold(node.threshold)}"
        return _substitute(
            fragments["BRANCH"],
            {"cond": cond, "then": render_node(node.left), "else": render_node(node.right)},
        )

    return _substitute(body, {"DISPATCH": render_node(spec.entry_index)}) + (
        "" if body.endswith("\n") else "\n"
    )


# --- reference interpreter for the default template's output ---------------------


def interpret_rendered(rendered: str, x: Sequence[float]) -> int:
    """Evaluate C-like rendered text (default template shape) at x.

    This is a test oracle, not a C parser: it understands exactly the
    `if (x[i] <= t) { ... } else { ... }` / `return id;` nesting the
    default template produces.
    """
    tokens = re.findall(
        r"x\[\d+\]|<=|[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[(){};]|if|else|return|\w+",
        rendered,
    )
    pos = 0

    def peek() -> str | None:
        return tokens[pos] if pos < len(tokens) else None

    def take(expected: str | None = None) -> str:
        nonlocal pos
        if pos >= len(tokens):
            raise DispatchError("interpret error", "unexpected end of rendered text")
        tok = tokens[pos]
        if expected is not None and tok != expected:
            raise DispatchError("interpret error", f"expected {expected!r}, got {tok!r}")
        pos += 1
        return tok

    def statement() -> int:
        tok = peek()
        if tok == "if":
            take("if")
            take("(")
            feat_tok = take()
            m = re.fullmatch(r"x\[(\d+)\]", feat_tok)
            if not m:
                raise DispatchError("interpret error", f"expected feature reference, got {feat_tok!r}")
            feature = int(m.group(1))
            take("<=")
            threshold = float(take())
            take(")")
            take("{")
            if x[feature] <= threshold:
                result = statement()
                _skip_block_tail()
                take("}")
                take("else")
                take("{")
                _skip_statement()
                take("}")
            else:
                _skip_statement()
                take("}")
                take("else")
                take("{")
                result = statement()
                _skip_block_tail()
                take("}")
            return result
        if tok == "return":
            take("return")
            value = int(take())
            take(";")
            return value
        raise DispatchError("interpret error", f"unexpected token {tok!r}")

    def _skip_block_tail() -> None:
        pass  # statements are single; nothing trails them inside a block

    def _skip_statement() -> None:
        nonlocal pos
        depth = 0
        while pos < len(tokens):
            tok = tokens[pos]
            if tok == "{":
                depth += 1
            elif tok == "}":
                if depth == 0:
                    return
                depth -= 1
            elif tok == ";" and depth == 0 and tokens[pos - 1] != "}":
                # a bare return-statement ends at its semicolon
                pos += 1
                return
            pos += 1

    # Seek the function body: interpret from the first 'if' or 'return'.
    while peek() is not None and peek() not in ("if", "return"):
        take()
    return statement()


# --- code growth ------------------------------------------------------------------


@dataclass(frozen=True)
class CodeGrowth:
    """Binary-size cost split into its two sources, as fractions of the
    baseline binary: the dispatcher itself and the extra versions."""

    selector_growth: float
    multiversioning_growth: float


def code_growth(
    representative: set[int] | frozenset[int] | Sequence[int],
    code_sizes: dict[int, int],
    baseline_binary_size: int,
    spec: DispatcherSpec | None,
) -> CodeGrowth:
    """Size fractions for a selected set plus its selection mechanism.

    A PPM-style selector has no dispatcher document; pass None and its
    growth is reported as 0.
    """
    if baseline_binary_size <= 0:
        raise DispatchError(
            "non-positive measurement", f"baseline binary size must be > 0, got {baseline_binary_size}"
        )
    members = sorted(set(representative))
    for v in members:
        if v not in code_sizes:
            raise DispatchError("unknown version", f"code size missing for version {v}")
    total = sum(code_sizes[v] for v in members)
    selector = spec.byte_size if spec is not None else 0
    return CodeGrowth(
        selector_growth=selector / baseline_binary_size,
        multiversioning_growth=total / baseline_binary_size,
    )

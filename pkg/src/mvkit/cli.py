"""Command-line front end: gen, select, train, cv, emit, simulate.

Each command reads/writes plain files so any stage's output feeds the
next with no editing: `gen` emits scenario CSVs, `select` a selection
report, `train` a model document, `emit` a dispatcher document (plus an
optional rendered source view), and `cv`/`simulate` structured reports.

Exit codes: 0 success, 2 invalid input or configuration (including
usage errors), 1 unexpected internal failure. A config file given with
--config supplies `key=value` defaults using option dest names
(e.g. `max_versions=3`); explicit command-line flags always win.
Reports default to machine mode, which is byte-identical across runs for
identical inputs and seeds; human mode only rounds the numbers.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import modelio, report as reportmod
from .dispatch import (
    DEFAULT_TEMPLATE,
    compile_dispatcher,
    deserialize,
    render_template,
    serialize,
)
from .learners.cv import LearnerSpec, cross_validate, train_model
from .learners.ppm import train_ppm_models
from .learners.rules import RuleListModel
from .learners.samples import make_dc_labels, make_ppm_samples
from .learners.trees import TreeModel
from .report import HUMAN, MACHINE, ReportBuilder, render
from .rng import mix_seed
from .scenario import Scenario, load_scenario, save_scenario, speedups
from .selection import Constraints, evaluate_set, greedy_select
from .simulate import simulate
from .synthgen import SynthConfig, generate, generate_test, save_ground_truth

SCENARIO_FILES = ("versions.csv", "datasets.csv", "runtimes.csv")

MODE_NAMES = {"perf": "perf_priority", "size": "size_priority"}


class CliError(ValueError):
    """User-facing validation failure; maps to exit code 2."""


def _pair(text: str, caster=float) -> tuple:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected lo,hi pair, got {text!r}")
    try:
        return (caster(parts[0]), caster(parts[1]))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numeric pair, got {text!r}") from None


def _int_pair(text: str) -> tuple[int, int]:
    return _pair(text, int)


def _id_list(text: str) -> tuple[int, ...]:
    if not text.strip():
        return ()
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ids, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mvkit",
        description="Representative-set selection and runtime version dispatch "
        "for adaptive multiversioned binaries.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file of option defaults (dest names)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=argparse.ArgumentParser)

    gen = sub.add_parser("gen", parents=[common], help="generate a seeded synthetic scenario")
    gen.add_argument("--versions", type=int, help="version count including the baseline")
    gen.add_argument("--datasets", type=int, help="dataset count")
    gen.add_argument("--features", type=int, help="feature arity")
    gen.add_argument("--regions", type=int, help="planted regions (default versions - 1)")
    gen.add_argument("--seed", type=int, help="generator seed (required)")
    gen.add_argument("--noise-sigma", dest="noise_sigma", type=float)
    gen.add_argument("--winner-range", dest="winner_range", type=_pair)
    gen.add_argument("--loser-range", dest="loser_range", type=_pair)
    gen.add_argument("--base-range", dest="base_range", type=_pair)
    gen.add_argument("--size-range", dest="size_range", type=_int_pair)
    gen.add_argument("--feature-range", dest="feature_range", type=_int_pair)
    gen.add_argument("--test-seed", dest="test_seed", type=int, help="also emit a held-out test scenario under <out-dir>/test")
    gen.add_argument("--test-datasets", dest="test_datasets", type=int)
    gen.add_argument("--out-dir", dest="out_dir", help="output directory (required)")

    sel = sub.add_parser("select", parents=[common], help="pick a representative version set")
    _scenario_arg(sel)
    sel.add_argument("--max-versions", dest="max_versions", type=int)
    sel.add_argument("--size-budget", dest="size_budget", type=float)
    sel.add_argument("--loss-tol", dest="loss_tol", type=float)
    sel.add_argument("--min-gain", dest="min_gain", type=float)
    sel.add_argument("--mode", choices=sorted(MODE_NAMES))
    _report_args(sel)

    train = sub.add_parser("train", parents=[common], help="train a version-mapping model")
    _scenario_arg(train)
    _representative_args(train)
    _learner_args(train)
    train.add_argument("--seed", type=int, help="required when training needs randomness")
    train.add_argument("--out", help="model file to write (required)")

    cv = sub.add_parser("cv", parents=[common], help="cross-validate a learner")
    _scenario_arg(cv)
    _representative_args(cv)
    _learner_args(cv)
    cv.add_argument("--k", type=int, help="fold count (default 10)")
    cv.add_argument("--seed", type=int, help="fold shuffle seed (required)")
    _report_args(cv)

    emit = sub.add_parser("emit", parents=[common], help="compile a model into a dispatcher document")
    emit.add_argument("--model", help="trained model file (from train)")
    emit.add_argument("--out", help="dispatcher file to write (required)")
    emit.add_argument(
        "--template",
        nargs="?",
        const="-",
        help="render source text too; path to a template file, or bare for the built-in C-like template",
    )
    emit.add_argument("--rendered-out", dest="rendered_out", help="rendered text path (default <out>.rendered)")

    sim = sub.add_parser("simulate", parents=[common], help="run a selector over a test scenario")
    _scenario_arg(sim)
    _representative_args(sim)
    sim.add_argument("--dispatcher", help="dispatcher document to evaluate")
    sim.add_argument("--model", help="PPM model bundle to evaluate")
    sim.add_argument("--selector", choices=["oracle", "baseline"], help="built-in reference selector")
    sim.add_argument("--train-scenario", dest="train_scenario", help="training scenario dir, for the id-overlap check")
    _report_args(sim)
    return parser


def _scenario_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", help="directory holding versions.csv, datasets.csv, runtimes.csv")


def _report_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--report-mode", dest="report_mode", choices=[MACHINE, HUMAN])
    p.add_argument("--out", help="report file (default: stdout)")


def _representative_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--selection", help="selection report from `select`")
    p.add_argument("--select-ids", dest="select_ids", type=_id_list, help="explicit representative ids, comma-separated")


def _learner_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algorithm", choices=["tree", "rules", "regtree", "linreg"])
    p.add_argument("--min-split", dest="min_split", type=int)
    p.add_argument("--max-depth", dest="max_depth", type=int)
    p.add_argument("--prune", action="store_const", const=True)
    p.add_argument("--prune-holdout", dest="prune_holdout", type=float)
    p.add_argument("--min-cover", dest="min_cover", type=int)
    p.add_argument("--min-precision", dest="min_precision", type=float)


# Converters for config-file values, keyed by argparse dest.
_CONFIG_TYPES = {
    "versions": int,
    "datasets": int,
    "features": int,
    "regions": int,
    "seed": int,
    "noise_sigma": float,
    "winner_range": _pair,
    "loser_range": _pair,
    "base_range": _pair,
    "size_range": _int_pair,
    "feature_range": _int_pair,
    "test_seed": int,
    "test_datasets": int,
    "out_dir": str,
    "scenario": str,
    "max_versions": int,
    "size_budget": float,
    "loss_tol": float,
    "min_gain": float,
    "mode": str,
    "report_mode": str,
    "out": str,
    "selection": str,
    "select_ids": _id_list,
    "algorithm": str,
    "min_split": int,
    "max_depth": int,
    "prune": lambda s: s.strip() == "1",
    "prune_holdout": float,
    "min_cover": int,
    "min_precision": float,
    "k": int,
    "model": str,
    "template": str,
    "rendered_out": str,
    "dispatcher": str,
    "selector": str,
    "train_scenario": str,
}


def _load_config_file(path: str) -> dict[str, object]:
    values: dict[str, object] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read config file {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, eq, value = stripped.partition("=")
        key = key.strip()
        if not eq or key not in _CONFIG_TYPES:
            raise CliError(f"{path}:{lineno}: unknown config entry {stripped!r}")
        try:
            values[key] = _CONFIG_TYPES[key](value.strip())
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise CliError(f"{path}:{lineno}: {exc}") from None
    return values


def _merge_config(args: argparse.Namespace, config: dict[str, object]) -> argparse.Namespace:
    for key, value in config.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, value)
    return args


def _require(args: argparse.Namespace, names: list[str]) -> None:
    for name in names:
        if getattr(args, name, None) is None:
            raise CliError(f"missing required option --{name.replace('_', '-')}")


def _load_scenario_dir(path: str) -> Scenario:
    base = Path(path)
    return load_scenario(*(base / name for name in SCENARIO_FILES))


def _check_collisions(inputs: list[str | None], outputs: list[str | None]) -> None:
    resolved_in = {Path(p).resolve() for p in inputs if p}
    for out in outputs:
        if out and Path(out).resolve() in resolved_in:
            raise CliError(f"output path {out} collides with an input path")


def _representative_ids(args: argparse.Namespace) -> tuple[int, ...]:
    if args.select_ids is not None and args.selection is not None:
        raise CliError("give either --selection or --select-ids, not both")
    if args.select_ids is not None:
        return tuple(sorted(set(args.select_ids)))
    if args.selection is not None:
        try:
            doc = reportmod.parse(Path(args.selection).read_text(encoding="utf-8"))
        except OSError as exc:
            raise CliError(f"cannot read selection report: {exc}") from None
        ids = doc.get("selected")
        return tuple(sorted(set(_id_list(ids)))) if ids else ()
    raise CliError("missing required option --selection or --select-ids")


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _learner_spec(args: argparse.Namespace) -> LearnerSpec:
    _require(args, ["algorithm"])
    return LearnerSpec(
        algorithm=args.algorithm,
        min_split=args.min_split,
        max_depth=args.max_depth,
        prune=bool(args.prune),
        prune_holdout=args.prune_holdout,
        min_cover=args.min_cover,
        min_precision=args.min_precision,
    )


# --- commands ----------------------------------------------------------------


def cmd_gen(args: argparse.Namespace) -> int:
    _require(args, ["versions", "datasets", "features", "seed", "out_dir"])
    kwargs = dict(
        n_versions=args.versions,
        n_datasets=args.datasets,
        feature_arity=args.features,
        n_regions=args.regions if args.regions is not None else max(args.versions - 1, 1),
        seed=args.seed,
    )
    for attr, key in (
        ("noise_sigma", "noise_sigma"),
        ("winner_range", "winner_speedup_range"),
        ("loser_range", "loser_speedup_range"),
        ("base_range", "base_runtime_range"),
        ("size_range", "code_size_range"),
        ("feature_range", "feature_range"),
    ):
        value = getattr(args, attr)
        if value is not None:
            kwargs[key] = value
    config = SynthConfig(**kwargs)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scenario, truth = generate(config)
    save_scenario(scenario, *(out / name for name in SCENARIO_FILES))
    save_ground_truth(truth, scenario, out / "ground_truth.csv")

    if args.test_seed is not None:
        test_dir = out / "test"
        test_dir.mkdir(parents=True, exist_ok=True)
        test_scenario, test_truth = generate_test(config, args.test_seed, args.test_datasets)
        save_scenario(test_scenario, *(test_dir / name for name in SCENARIO_FILES))
        save_ground_truth(test_truth, test_scenario, test_dir / "ground_truth.csv")
    return 0


def cmd_select(args: argparse.Namespace) -> int:
    _require(args, ["scenario", "max_versions"])
    scenario = _load_scenario_dir(args.scenario)
    _check_collisions(
        [str(Path(args.scenario) / n) for n in SCENARIO_FILES], [args.out]
    )
    constraints = Constraints(
        max_versions=args.max_versions,
        size_budget=args.size_budget if args.size_budget is not None else math.inf,
        loss_tolerance=args.loss_tol if args.loss_tol is not None else 0.0,
        min_gain=args.min_gain if args.min_gain is not None else 1e-9,
        mode=MODE_NAMES[args.mode] if args.mode is not None else "perf_priority",
    )
    matrix = speedups(scenario)
    result = greedy_select(matrix, scenario.code_sizes(), scenario.baseline_binary_size, constraints)
    metrics = evaluate_set(matrix, set(result.selected))

    mode = args.report_mode or MACHINE
    b = ReportBuilder("selection", mode)
    b.add("mode", constraints.mode)
    b.add("max_versions", constraints.max_versions)
    b.add("size_budget", constraints.size_budget)
    b.add("loss_tolerance", constraints.loss_tolerance)
    b.add("min_gain", constraints.min_gain)
    b.add("baseline_id", matrix.baseline_id)
    b.add("baseline_binary_size", scenario.baseline_binary_size)
    b.add("n_candidates", len(matrix.candidate_ids))
    b.add("n_datasets", matrix.n_datasets)
    b.add("selected", ",".join(str(v) for v in result.selected))
    b.add("n_selected", len(result.selected))
    b.add("n_selected_with_baseline", len(result.selected) + 1)
    b.add("objective_value", result.objective_value)
    b.add("geomean_speedup", result.geomean_speedup)
    b.add("oracle_geomean", metrics.oracle_geomean)
    b.add("max_dataset_loss", result.max_dataset_loss)
    b.add("size_used", result.size_used)
    b.add("covered_count", metrics.covered_count)
    b.add_table(
        "trace",
        ["step", "picked", "gain", "objective_after"],
        [(i + 1, s.picked, s.gain, s.objective_after) for i, s in enumerate(result.trace)],
    )
    b.add_table(
        "prune",
        ["step", "removed", "decrease", "objective_after"],
        [(i + 1, s.removed, s.decrease, s.objective_after) for i, s in enumerate(result.pruned)],
    )
    b.add_table(
        "losses",
        ["dataset_id", "loss"],
        list(zip(matrix.dataset_ids, metrics.per_dataset_loss)),
    )
    _write_or_print(render(b.build()), args.out)
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    _require(args, ["scenario", "out"])
    spec = _learner_spec(args)
    scenario = _load_scenario_dir(args.scenario)
    _check_collisions(
        [str(Path(args.scenario) / n) for n in SCENARIO_FILES], [args.out]
    )
    representative = _representative_ids(args)
    matrix = speedups(scenario)
    if spec.is_dc:
        samples = make_dc_labels(scenario, matrix, set(representative))
        if spec.prune and args.seed is None:
            raise CliError("missing required option --seed (pruning uses a seeded holdout)")
        model = train_model(spec, samples, seed=args.seed)
    else:
        model = train_ppm_models(
            scenario,
            matrix,
            set(representative),
            algorithm=spec.algorithm,
            tree_config=spec.tree_config(args.seed),
        )
        if not model:
            raise CliError("PPM training needs a non-empty representative set")
    modelio.save_model(model, args.out)
    return 0


def cmd_cv(args: argparse.Namespace) -> int:
    _require(args, ["scenario", "seed"])
    spec = _learner_spec(args)
    k = args.k if args.k is not None else 10
    scenario = _load_scenario_dir(args.scenario)
    representative = _representative_ids(args)
    matrix = speedups(scenario)

    mode = args.report_mode or MACHINE
    b = ReportBuilder("cv", mode)
    b.add("algorithm", spec.algorithm)
    b.add("k", k)
    b.add("seed", args.seed)
    b.add("representative", ",".join(str(v) for v in representative))

    if spec.is_dc:
        samples = make_dc_labels(scenario, matrix, set(representative))
        result = cross_validate(spec, samples, k=k, seed=args.seed)
        b.add("n_samples", len(samples))
        b.add("metric", result.metric_name)
        b.add("aggregate", result.aggregate)
        b.add_table(
            "folds",
            ["fold", "size", "metric"],
            [(i, result.fold_sizes[i], result.per_fold[i]) for i in range(k)],
        )
        b.add_table(
            "confusion",
            ["actual", "predicted", "count"],
            list(result.confusion),
        )
    else:
        if not representative:
            raise CliError("PPM cross-validation needs a non-empty representative set")
        per_version: list[tuple[int, float]] = []
        fold_rows: list[tuple[int, int, int, float]] = []
        for v in representative:
            samples = make_ppm_samples(scenario, matrix, v)
            result = cross_validate(spec, samples, k=k, seed=mix_seed(args.seed, v))
            per_version.append((v, result.aggregate))
            fold_rows.extend(
                (v, i, result.fold_sizes[i], result.per_fold[i]) for i in range(k)
            )
        b.add("n_samples", matrix.n_datasets)
        b.add("metric", "rrse_percent")
        b.add("aggregate", sum(a for _, a in per_version) / len(per_version))
        b.add_table("versions", ["version", "rrse_percent"], per_version)
        b.add_table("folds", ["version", "fold", "size", "metric"], fold_rows)

    _write_or_print(render(b.build()), args.out)
    return 0


def cmd_emit(args: argparse.Namespace) -> int:
    _require(args, ["model", "out"])
    _check_collisions([args.model], [args.out, args.rendered_out])
    model = modelio.load_model(args.model)
    if not isinstance(model, (TreeModel, RuleListModel)):
        raise CliError("only classifier models compile to dispatchers; PPM bundles drive `simulate --model`")
    spec = compile_dispatcher(model)
    Path(args.out).write_text(serialize(spec), encoding="utf-8", newline="\n")
    if args.template is not None:
        template = (
            DEFAULT_TEMPLATE
            if args.template == "-"
            else Path(args.template).read_text(encoding="utf-8")
        )
        rendered = render_template(spec, template)
        rendered_path = args.rendered_out or f"{args.out}.rendered"
        Path(rendered_path).write_text(rendered, encoding="utf-8", newline="\n")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    _require(args, ["scenario"])
    chosen = [name for name in ("dispatcher", "model", "selector") if getattr(args, name) is not None]
    if len(chosen) != 1:
        raise CliError("give exactly one of --dispatcher, --model, --selector")
    scenario = _load_scenario_dir(args.scenario)
    representative = _representative_ids(args)

    if args.dispatcher is not None:
        selector = deserialize(Path(args.dispatcher).read_text(encoding="utf-8"))
    elif args.model is not None:
        loaded = modelio.load_model(args.model)
        if isinstance(loaded, (TreeModel, RuleListModel)):
            selector = compile_dispatcher(loaded)
        else:
            selector = loaded
    else:
        selector = args.selector

    train_ids: set[int] | None = None
    if args.train_scenario is not None:
        train_ids = set(_load_scenario_dir(args.train_scenario).dataset_ids)

    result = simulate(scenario, selector, representative, train_dataset_ids=train_ids)

    mode = args.report_mode or MACHINE
    b = ReportBuilder("simulation", mode)
    b.add("selector_kind", result.selector_kind)
    b.add("representative", ",".join(str(v) for v in representative))
    b.add("n_test_datasets", len(result.outcomes))
    b.add("geomean_realized", result.geomean_realized)
    b.add("representative_geomean", result.representative_geomean)
    b.add("full_oracle_geomean", result.full_oracle_geomean)
    b.add("fraction_of_representative_oracle", result.fraction_of_representative_oracle)
    b.add("fraction_of_full_oracle", result.fraction_of_full_oracle)
    b.add("mispick_rate", result.mispick_rate)
    b.add("mean_comparisons", result.mean_comparisons)
    b.add("selector_growth", result.growth.selector_growth)
    b.add("multiversioning_growth", result.growth.multiversioning_growth)
    b.add("train_overlap_count", len(result.train_overlap))
    b.add("train_overlap_ids", ",".join(str(i) for i in result.train_overlap))
    b.add_table(
        "outcomes",
        ["dataset_id", "chosen", "realized_speedup", "comparisons"],
        [(o.dataset_id, o.chosen, o.realized_speedup, o.comparisons) for o in result.outcomes],
    )
    _write_or_print(render(b.build()), args.out)
    return 0


_COMMANDS = {
    "gen": cmd_gen,
    "select": cmd_select,
    "train": cmd_train,
    "cv": cmd_cv,
    "emit": cmd_emit,
    "simulate": cmd_simulate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            _merge_config(args, _load_config_file(args.config))
        return _COMMANDS[args.command](args)
    except CliError as exc:
        print(f"mvkit {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"mvkit {args.command}: invalid input: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - internal failures
        print(f"mvkit {args.command}: internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

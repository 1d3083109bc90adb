"""Acceptance gate: one test and one printed verdict line per criterion.

Each criterion prints `[criterion N] <name>: PASS|FAIL` so the pytest
log shows the whole gate at a glance. Tolerances are pinned here and
nowhere else.
"""

import math
import subprocess
import sys
import time
from collections import Counter

import numpy as np

from mvkit import (
    Constraints,
    DEFAULT_TEMPLATE,
    LearnerSpec,
    SynthConfig,
    compile_dispatcher,
    cross_validate,
    deserialize,
    error_rate,
    eval_dispatcher,
    exhaustive_select,
    generate,
    generate_test,
    greedy_select,
    interpret_rendered,
    make_dc_labels,
    predict_tree,
    render_template,
    rrse,
    serialize,
    simulate,
    speedups,
    train_model,
)
from mvkit.learners import LabeledSample
from mvkit.rng import Rng, mix_seed
from mvkit.scenario import SpeedupMatrix

from conftest import PLANTED_CONFIG, PLANTED_TEST_SEED, make_toy_scenario

GREEDY_BOUND = 1.0 - 1.0 / math.e


def verdict(n: int, name: str, ok: bool, detail: str = "") -> None:
    line = f"[criterion {n}] {name}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def random_instance(seed: int) -> SpeedupMatrix:
    rng = Rng(mix_seed(4242, seed))
    n_cand = rng.randint(2, 8)
    n_data = rng.randint(2, 10)
    entries = np.ones((n_cand + 1, n_data))
    for vi in range(1, n_cand + 1):
        for di in range(n_data):
            entries[vi, di] = rng.uniform(0.5, 3.0)
    return SpeedupMatrix(
        baseline_id=0,
        version_ids=tuple(range(n_cand + 1)),
        dataset_ids=tuple(range(n_data)),
        entries=entries,
    )


def planted_artifacts(planted):
    cfg, scenario, _ = planted
    matrix = speedups(scenario)
    selection = greedy_select(
        matrix, scenario.code_sizes(), scenario.baseline_binary_size, Constraints(max_versions=4)
    )
    samples = make_dc_labels(scenario, matrix, set(selection.selected))
    model = train_model(LearnerSpec("tree"), samples)
    spec = compile_dispatcher(model)
    return cfg, scenario, matrix, selection, samples, model, spec


def test_criterion_1_greedy_matches_oracle_within_bound():
    t0 = time.perf_counter()
    instances = 0
    worst = 1.0
    for seed in range(210):
        matrix = random_instance(seed)
        sizes = {v: 100 for v in matrix.version_ids}
        for k in (1, 2, 3):
            _, f_star = exhaustive_select(matrix, k)
            result = greedy_select(
                matrix, sizes, 1000, Constraints(max_versions=k, min_gain=0.0)
            )
            ok_bound = result.objective_value >= GREEDY_BOUND * f_star - 1e-12
            ok_exact = k != 1 or abs(result.objective_value - f_star) <= 1e-12
            if not (ok_bound and ok_exact):
                verdict(1, "greedy vs oracle", False, f"seed={seed} k={k}")
            if f_star > 0:
                worst = min(worst, result.objective_value / f_star)
        instances += 1
    elapsed = time.perf_counter() - t0
    verdict(
        1,
        "greedy vs oracle",
        instances >= 200 and elapsed < 10.0,
        f"{instances} instances, worst ratio {worst:.4f} >= {GREEDY_BOUND:.4f}, {elapsed:.2f}s",
    )


def test_criterion_2_toy_trace_prune_and_objective():
    scenario = make_toy_scenario()
    matrix = speedups(scenario)
    result = greedy_select(
        matrix, scenario.code_sizes(), scenario.baseline_binary_size, Constraints(max_versions=3)
    )
    picks = tuple(s.picked for s in result.trace)
    ok = (
        picks[:2] == (3, 1)
        and tuple(p.removed for p in result.pruned) == (3,)
        and set(result.selected) == {1, 2}
        and abs(result.objective_value - math.log(4.0)) <= 1e-9
    )
    verdict(
        2,
        "toy greedy trace",
        ok,
        f"picks={picks} pruned={tuple(p.removed for p in result.pruned)} "
        f"f={result.objective_value:.12f}",
    )


def test_criterion_3_planted_pipeline_noise_free_and_noisy(planted):
    t0 = time.perf_counter()
    # noise-free: exact recovery
    cfg, _, matrix, selection, samples, model, spec = planted_artifacts(planted)
    cv = cross_validate(LearnerSpec("tree"), samples, k=10, seed=5)
    test_scenario, _ = generate_test(cfg, PLANTED_TEST_SEED, 160)
    report = simulate(test_scenario, spec, selection.selected)
    ok_clean = report.fraction_of_representative_oracle == 1.0 and cv.aggregate == 0.0

    # noisy: held-out fraction stays high with a pruned tree
    noisy_cfg = SynthConfig(
        n_versions=5,
        n_datasets=320,
        feature_arity=2,
        n_regions=4,
        seed=1002,
        noise_sigma=0.05,
        feature_range=(1, 16),
    )
    noisy, _ = generate(noisy_cfg)
    noisy_matrix = speedups(noisy)
    noisy_selection = greedy_select(
        noisy_matrix, noisy.code_sizes(), noisy.baseline_binary_size, Constraints(max_versions=4)
    )
    noisy_samples = make_dc_labels(noisy, noisy_matrix, set(noisy_selection.selected))
    noisy_model = train_model(LearnerSpec("tree", prune=True), noisy_samples, seed=17)
    noisy_spec = compile_dispatcher(noisy_model)
    noisy_test, _ = generate_test(noisy_cfg, 10002, 160)
    noisy_report = simulate(noisy_test, noisy_spec, noisy_selection.selected)
    ok_noisy = noisy_report.fraction_of_representative_oracle >= 0.95
    elapsed = time.perf_counter() - t0
    verdict(
        3,
        "planted scenario recovery",
        ok_clean and ok_noisy and elapsed < 30.0,
        f"clean fraction={report.fraction_of_representative_oracle} cv={cv.aggregate} "
        f"noisy fraction={noisy_report.fraction_of_representative_oracle:.4f} {elapsed:.1f}s",
    )


def test_criterion_4_metric_identities():
    checks = [
        abs(rrse([1.0, 2.0], [2.0, 4.0], 3.0) - 100.0 * math.sqrt(2.5)) <= 1e-9,
        rrse([2.0, 4.0], [2.0, 4.0], 3.0) == 0.0,
        abs(rrse([3.0, 3.0], [2.0, 4.0], 3.0) - 100.0) <= 1e-9,
        error_rate([1, 2, 3, 4], [1, 2, 0, 0]) == 0.5,
        error_rate([1, 1], [1, 1]) == 0.0,
    ]
    verdict(4, "metric identities", all(checks), f"{sum(checks)}/{len(checks)} identities hold")


def test_criterion_5_model_dispatcher_template_equivalence(planted):
    _, scenario, _, _, _, model, spec = planted_artifacts(planted)
    round_trip = deserialize(serialize(spec))
    rendered = render_template(spec, DEFAULT_TEMPLATE)
    lo, hi = 0.0, float(PLANTED_CONFIG.feature_range[1] + 1)
    rng = Rng(777)
    mismatches = 0
    for _ in range(10_000):
        x = (rng.uniform(lo, hi), rng.uniform(lo, hi))
        a = predict_tree(model, x)[0]
        b = eval_dispatcher(spec, x)[0]
        c = eval_dispatcher(round_trip, x)[0]
        d = interpret_rendered(rendered, x)
        if not (a == b == c == d):
            mismatches += 1
    verdict(5, "model/dispatcher/template equivalence", mismatches == 0,
            f"10000 vectors, {mismatches} mismatches")


def test_criterion_6_dispatch_overhead(planted):
    cfg, _, _, selection, _, _, spec = planted_artifacts(planted)
    test_scenario, _ = generate_test(cfg, PLANTED_TEST_SEED, 160)
    report = simulate(test_scenario, spec, selection.selected)
    bound = math.ceil(math.log2(spec.leaf_count)) + 3
    ok = report.mean_comparisons <= bound and spec.byte_size < 10 * 1024
    verdict(
        6,
        "dispatch overhead",
        ok,
        f"mean comparisons {report.mean_comparisons:.2f} <= {bound}, "
        f"{spec.byte_size} bytes < 10240",
    )


def test_criterion_7_byte_determinism(tmp_path):
    def run(*args, cwd):
        r = subprocess.run(
            [sys.executable, "-m", "mvkit", *[str(a) for a in args]],
            cwd=cwd, capture_output=True, text=True,
        )
        assert r.returncode == 0, r.stderr
        return r.stdout

    outputs = []
    for tag in ("a", "b"):
        base = tmp_path / tag
        base.mkdir()
        run("gen", "--versions", "4", "--datasets", "60", "--features", "2",
            "--regions", "3", "--seed", "31", "--feature-range", "1,10",
            "--test-seed", "32", "--test-datasets", "30", "--out-dir", base / "scen",
            cwd=tmp_path)
        sel = run("select", "--scenario", base / "scen", "--max-versions", "3", cwd=tmp_path)
        (base / "sel.txt").write_text(sel)
        run("train", "--scenario", base / "scen", "--selection", base / "sel.txt",
            "--algorithm", "tree", "--out", base / "model.txt", cwd=tmp_path)
        run("emit", "--model", base / "model.txt", "--out", base / "disp.txt", cwd=tmp_path)
        cv = run("cv", "--scenario", base / "scen", "--selection", base / "sel.txt",
                 "--algorithm", "tree", "--seed", "5", cwd=tmp_path)
        sim = run("simulate", "--scenario", base / "scen" / "test",
                  "--selection", base / "sel.txt", "--dispatcher", base / "disp.txt",
                  cwd=tmp_path)
        files = b"".join(
            (base / "scen" / name).read_bytes()
            for name in ("versions.csv", "datasets.csv", "runtimes.csv", "ground_truth.csv")
        )
        artifacts = (base / "model.txt").read_bytes() + (base / "disp.txt").read_bytes()
        outputs.append((files, sel, cv, sim, artifacts))
    ok = outputs[0] == outputs[1]
    verdict(7, "machine-mode byte determinism", ok,
            "gen/select/train/emit/cv/simulate byte-identical across runs")


def test_criterion_8_cv_protocol(planted):
    _, _, _, _, samples, _, _ = planted_artifacts(planted)
    report = cross_validate(LearnerSpec("tree"), samples, k=10, seed=5)
    sizes_ok = max(report.fold_sizes) - min(report.fold_sizes) <= 1
    counts = Counter(report.fold_of_sample)
    once_ok = (
        len(report.fold_of_sample) == len(samples)
        and sum(counts.values()) == len(samples)
        and all(counts[f] == report.fold_sizes[f] for f in range(10))
    )
    per_class: dict[int, Counter] = {}
    for idx, fold in enumerate(report.fold_of_sample):
        per_class.setdefault(samples[idx].label, Counter())[fold] += 1
    strat_ok = all(
        max(c.get(f, 0) for f in range(10)) - min(c.get(f, 0) for f in range(10)) <= 1
        for c in per_class.values()
    )
    # the same holds on an awkward size/class mix
    awkward = [LabeledSample((float(i), float(i % 5)), i % 3) for i in range(23)]
    rep2 = cross_validate(LearnerSpec("tree"), awkward, k=5, seed=9)
    sizes2_ok = max(rep2.fold_sizes) - min(rep2.fold_sizes) <= 1
    verdict(
        8,
        "cross-validation protocol",
        sizes_ok and once_ok and strat_ok and sizes2_ok,
        f"fold sizes {report.fold_sizes}, stratified within 1 per class",
    )

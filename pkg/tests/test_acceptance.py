"""Acceptance suite: one test per criterion, each printing a PASS line.

Criteria 1-10 cover the core package; criterion 11 covers the HTTP
service equivalence (its browser-console half lives in frontend/).
Heavy artifacts (the seed-7 dataset, clustering, the budget-200 oracle
session, and a 2,000-CP set) are built once per session and shared.
"""

from __future__ import annotations

import json
import subprocess
import sys
import threading

import numpy as np
import pytest

from conftest import grid
from cpforge import clustering
from cpforge.active import init_session, oracle_label, run_with_oracle, submit_label
from cpforge.dda import PlayerSim, run_adaptive, converged_difficulty, tail_summary
from cpforge.levels import generate_level, read_level, write_level
from cpforge.pipeline import generate_cps, is_cp, rule_filter
from cpforge.quality import Hyper, gradient, load_model, loss, predict, save_model, train
from cpforge.rng import Rng, sub_seed
from cpforge.sampler import (
    SamplerParams,
    sample_dataset,
    sample_segment,
)
from cpforge.segments import (
    ControlParams,
    decode_segment,
    difficulty_bin,
    difficulty_score,
    encode_segment,
    extract_features,
)
from fixtures_rules import RULE_FIXTURES
from test_pipeline import independent_reachability
from test_quality import enemy_toy_set, random_features


@pytest.fixture(scope="module")
def dataset5000():
    return sample_dataset(5_000, SamplerParams(seed=7))


@pytest.fixture(scope="module")
def clusters(dataset5000):
    X = np.array([r.features.to_vector() for r in dataset5000])
    return clustering.select_k(
        clustering.Standardization.fit(X).apply(X), (4, 12), seed=7
    )


@pytest.fixture(scope="module")
def oracle_run(dataset5000, clusters):
    return run_with_oracle(dataset5000, clusters, budget=200, seed=7)


@pytest.fixture(scope="module")
def cpset2000(oracle_run):
    model, _, _ = oracle_run
    return generate_cps(model, 2_000, SamplerParams(seed=99), theta=0.5)


def _ok(n: int, title: str):
    print(f"ACCEPTANCE {n} ({title}): PASS")


def test_criterion_1_round_trips(oracle_run, cpset2000, tmp_path):
    params = SamplerParams(seed=1)
    for i in range(10_000):
        g = sample_segment(params, Rng(sub_seed(1, i)))
        text = encode_segment(g)
        assert decode_segment(text) == g
        assert encode_segment(decode_segment(text)) == text

    model, _, _ = oracle_run
    path = tmp_path / "model.txt"
    save_model(model, path)
    loaded = load_model(path)
    rng = np.random.default_rng(0)
    for f in random_features(rng, 200):
        assert predict(loaded, f) == predict(model, f)

    for seed in range(20):
        level = generate_level(cpset2000, 8, ControlParams(), seed=seed)
        lp = tmp_path / f"level{seed}.txt"
        write_level(level, lp)
        assert read_level(lp) == level
    _ok(1, "round-trips")


PIPELINE_STEPS = [
    ["sample", "--count", "2000", "--seed", "7", "--out", "data.jsonl"],
    ["cluster", "--in", "data.jsonl", "--out", "clusters.json", "--seed", "7"],
    [
        "annotate", "--oracle", "--in", "data.jsonl", "--clusters", "clusters.json",
        "--budget", "100", "--seed", "7", "--out", "labeled.jsonl", "--curve", "curve.csv",
    ],
    ["train", "--in", "labeled.jsonl", "--out", "model.txt"],
    ["gen-cps", "--model", "model.txt", "--count", "500", "--seed", "7", "--out", "cps.jsonl"],
    ["gen-level", "--cps", "cps.jsonl", "--length", "12", "--seed", "7", "--out", "level.txt"],
    [
        "adapt", "--cps", "cps.jsonl", "--player", "0.5", "--episodes", "300",
        "--seed", "7", "--out", "trace.csv", "--summary", "summary.json",
    ],
]

ARTIFACTS = [
    "data.jsonl", "clusters.json", "labeled.jsonl", "curve.csv",
    "model.txt", "cps.jsonl", "level.txt", "trace.csv", "summary.json",
]


def _run_pipeline(workdir):
    from cpforge.cli import main

    import os

    cwd = os.getcwd()
    os.chdir(workdir)
    try:
        for step in PIPELINE_STEPS:
            assert main(list(step)) == 0, step
    finally:
        os.chdir(cwd)


def test_criterion_2_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    _run_pipeline(a)
    _run_pipeline(b)
    for name in ARTIFACTS:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
    _ok(2, "determinism")


def test_criterion_3_active_learning_efficacy(dataset5000, clusters, oracle_run):
    _, _, session = oracle_run
    assert len(session.holdout) == 1_000
    assert session.queries_made == 200
    assert session.holdout_accuracy >= 0.90

    wins = 0
    for s in range(10):
        _, _, active = run_with_oracle(dataset5000, clusters, budget=200, seed=100 + s)
        _, _, baseline = run_with_oracle(
            dataset5000, clusters, budget=200, seed=100 + s, strategy="random"
        )
        if active.holdout_accuracy >= baseline.holdout_accuracy:
            wins += 1
    assert wins >= 8
    _ok(3, f"active learning: acc={session.holdout_accuracy:.3f}, wins {wins}/10")


def test_criterion_4_rule_fixture_corpus():
    assert len(RULE_FIXTURES) >= 14
    for name, lines, expected in RULE_FIXTURES:
        verdict = rule_filter(grid(lines))
        assert set(verdict.violations) == expected, name
    _ok(4, "rule filter fixtures")


def test_criterion_5_reachability_oracle_equivalence():
    from cpforge.pipeline import reachable_left_to_right

    params = SamplerParams(seed=123)
    matches = 0
    for i in range(500):
        g = sample_segment(params, Rng(sub_seed(123, i)))
        assert reachable_left_to_right(g) == independent_reachability(g)
        matches += 1
    assert matches == 500
    _ok(5, "reachability equivalence 500/500")


def test_criterion_6_level_soundness(cpset2000, oracle_run):
    model, _, _ = oracle_run
    band = ControlParams(enemy_density_band=(0.2, 0.4))
    for control in (ControlParams(), band):
        for seed in range(1000):
            level = generate_level(cpset2000, 12, control, seed=seed)
            feats = [extract_features(s) for s in level.segments]
            for a, b in zip(feats, feats[1:]):
                assert abs(a.elev_end - b.elev_start) <= 2
            for seg, f in zip(level.segments, feats):
                assert is_cp(model, seg, cpset2000.theta)
                if control.enemy_density_band:
                    assert 0.2 <= f.enemy_count / 16 <= 0.4
    _ok(6, "level soundness: 1000 open + 1000 band-constrained levels")


def test_criterion_7_dda_convergence_and_ordering(cpset2000):
    ordered = 0
    mid_tail_perfs = []
    for s in range(10):
        tails = []
        for skill in (0.2, 0.5, 0.8):
            trace = run_adaptive(
                cpset2000, PlayerSim(skill=skill, seed=3000 + s), 500, seed=4000 + s
            )
            tails.append(converged_difficulty(trace))
            if skill == 0.5:
                mid_tail_perfs.append(tail_summary(trace)["tail_mean_perf"])
        if tails[0] < tails[1] < tails[2]:
            ordered += 1
    pooled = float(np.mean(mid_tail_perfs))
    assert 0.45 <= pooled <= 0.75
    assert ordered >= 9
    _ok(7, f"DDA: ordering {ordered}/10, mid-player perf {pooled:.3f}")


def test_criterion_8_difficulty_spread(dataset5000):
    scores = [difficulty_score(r.features) for r in dataset5000]
    assert min(scores) == 0.0
    assert max(scores) >= 0.7
    counts = np.bincount([difficulty_bin(d) for d in scores], minlength=5)
    for b in range(5):
        assert counts[b] / len(scores) >= 0.02, f"bin {b}"
    _ok(8, "difficulty spread over all 5 bins")


def test_criterion_9_classifier_numerics():
    rng = np.random.default_rng(3)
    from cpforge.clustering import Standardization
    from cpforge.segments import FEATURE_COUNT

    X = Standardization.fit(rng.normal(0, 2, (60, FEATURE_COUNT))).apply(
        rng.normal(0, 2, (60, FEATURE_COUNT))
    )
    y = rng.integers(0, 2, 60).astype(float)
    h = 1e-5
    for _ in range(20):
        w = rng.normal(0, 1, FEATURE_COUNT)
        b = float(rng.normal())
        l2 = float(rng.uniform(0, 0.5))
        grad_w, grad_b = gradient(X, y, w, b, l2)
        for j in range(FEATURE_COUNT):
            e = np.zeros(FEATURE_COUNT)
            e[j] = h
            fd = (loss(X, y, w + e, b, l2) - loss(X, y, w - e, b, l2)) / (2 * h)
            assert np.isclose(grad_w[j], fd, rtol=1e-4, atol=1e-8)
        fd_b = (loss(X, y, w, b + h, l2) - loss(X, y, w, b - h, l2)) / (2 * h)
        assert np.isclose(grad_b, fd_b, rtol=1e-4, atol=1e-8)

    for seed in range(3):
        rng2 = np.random.default_rng(seed)
        feats = random_features(rng2, 100)
        labels = ["accept" if rng2.uniform() < 0.5 else "reject" for _ in feats]
        if len(set(labels)) < 2:
            labels[0] = "accept" if labels[1] == "reject" else "reject"
        model = train(list(zip(feats, labels)), Hyper())
        assert np.all(np.diff(model.loss_history) <= 1e-12)
    model = train(enemy_toy_set(), Hyper())
    assert np.all(np.diff(model.loss_history) <= 1e-12)
    _ok(9, "gradient check and monotone loss")


def test_criterion_10_cli_end_to_end(tmp_path):
    def cli(*args):
        return subprocess.run(
            [sys.executable, "-m", "cpforge.cli", *args],
            cwd=tmp_path,
            capture_output=True,
            text=True,
            timeout=300,
        )

    steps = [
        ["sample", "--count", "3000", "--seed", "7", "--out", "data.jsonl"],
        ["cluster", "--in", "data.jsonl", "--out", "clusters.json", "--seed", "7"],
        [
            "annotate", "--oracle", "--in", "data.jsonl", "--clusters", "clusters.json",
            "--budget", "150", "--seed", "7", "--out", "labeled.jsonl", "--curve", "curve.csv",
        ],
        ["train", "--in", "labeled.jsonl", "--out", "model.txt"],
        ["gen-cps", "--model", "model.txt", "--count", "600", "--seed", "11", "--out", "cps.jsonl"],
        [
            "gen-level", "--cps", "cps.jsonl", "--length", "12", "--seed", "3",
            "--enemy-density", "0.0:0.5", "--out", "level.txt",
        ],
        [
            "adapt", "--cps", "cps.jsonl", "--player", "0.5", "--episodes", "500",
            "--seed", "5", "--out", "trace.csv", "--summary", "summary.json",
        ],
        ["validate", "data.jsonl"],
        ["validate", "labeled.jsonl"],
        ["validate", "model.txt"],
        ["validate", "cps.jsonl", "--model", "model.txt"],
        ["validate", "level.txt", "--model", "model.txt"],
    ]
    for step in steps:
        result = cli(*step)
        assert result.returncode == 0, f"{step}: {result.stderr}"
    _ok(10, "CLI pipeline end-to-end")


def test_criterion_11_server_replay_equivalence(tmp_path):
    """SECONDARY half A: an HTTP client replaying 20 labels produces the
    byte-identical model file of the in-process loop on the same pairs."""
    import requests

    from cpforge.cli import main as cli_main
    from cpforge.clustering import read_cluster_report
    from cpforge.config import Config
    from cpforge.sampler import read_dataset
    from cpforge.server import serve_annotation

    assert cli_main(["sample", "--count", "400", "--seed", "17", "--out", str(tmp_path / "d.jsonl")]) == 0
    assert cli_main([
        "cluster", "--in", str(tmp_path / "d.jsonl"),
        "--out", str(tmp_path / "c.json"), "--seed", "17",
    ]) == 0

    config = Config(
        dataset_path=str(tmp_path / "d.jsonl"),
        clusters_path=str(tmp_path / "c.json"),
        out_dir=str(tmp_path),
    )
    srv = serve_annotation(config, port=0)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    try:
        base = f"http://127.0.0.1:{srv.server_address[1]}"
        sid = requests.post(
            f"{base}/sessions",
            json={"dataset": str(tmp_path / "d.jsonl"), "clusters": str(tmp_path / "c.json"),
                  "budget": 20, "seed": 17},
            timeout=10,
        ).json()["session_id"]
        dataset = read_dataset(tmp_path / "d.jsonl")
        by_id = {r.id: r for r in dataset}
        pairs = []
        for _ in range(20):
            q = requests.get(f"{base}/sessions/{sid}/query", timeout=10).json()
            label, _ = oracle_label(by_id[q["segment_id"]].grid)
            pairs.append((q["segment_id"], label))
            requests.post(
                f"{base}/sessions/{sid}/labels",
                json={"segment_id": q["segment_id"], "label": label},
                timeout=10,
            ).raise_for_status()
        finish = requests.post(f"{base}/sessions/{sid}/finish", timeout=10).json()
    finally:
        srv.shutdown()
        srv.server_close()

    report = read_cluster_report(tmp_path / "c.json")
    session = init_session(dataset, [int(i) for i in report["medoid_ids"]], budget=20, seed=17)
    for segment_id, label in pairs:
        submit_label(session, segment_id, label)
    local = tmp_path / "local.txt"
    save_model(session.model, local)
    from pathlib import Path

    assert Path(finish["model_path"]).read_bytes() == local.read_bytes()
    _ok(11, "server replay equivalence (UI half in frontend tests)")

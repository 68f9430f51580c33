"""Acceptance criteria, one test per criterion.

Each test records a single ``[PASS]``/``[FAIL]`` line; ``conftest.py``
prints them in the terminal summary.
"""
import itertools
import random
import shutil
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from spatialqa.captioner import render_clip_captions
from spatialqa.cli import main as cli_main
from spatialqa.ingest import parse_annotation_file, segment_into_clips
from spatialqa.instances import extract_instances
from spatialqa.loss_checks import check_gradients
from spatialqa.loss_ref import encode_ideal_scores, ideal_ranking_loss, l1_loss, ranking_loss
from spatialqa.qa_generator import LEFT_POSITIVE, RIGHT_POSITIVE, QaOptions, generate_clip_qa
from spatialqa.scene_model import ClassVocabulary, StaticTolerances
from spatialqa.scoring import mrr_mod, score_dataset
from spatialqa.synth import brute_force_answers, generate_clip, random_scene_spec

FIXTURES = Path(__file__).parent / "fixtures"
VOCAB = ClassVocabulary.default()

pytestmark = pytest.mark.acceptance


VERDICTS = []


def _verdict(number, name, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {name}" + (f" ({detail})" if detail else "")
    VERDICTS.append(line)
    assert ok, line


def test_criterion_1_worked_example():
    start = time.perf_counter()
    rec = parse_annotation_file(FIXTURES / "worked_example.csv", VOCAB)
    clip = segment_into_clips(rec)[0]
    inst = next(i for i in extract_instances(clip) if i.class_idx == VOCAB.index("man speaking"))
    caption = next(c for c in render_clip_captions(clip, StaticTolerances(), VOCAB) if c.source_id == 2)
    facts = {
        "onset": inst.onset_s, "offset": inst.offset_s,
        "initial": inst.azimuth.initial.value, "final": inst.azimuth.final.value,
        "max": inst.azimuth.max.value, "min": inst.azimuth.min.value,
        "elevation": inst.elevation.approx, "distance": inst.distance.approx,
        "source": inst.source_id,
    }
    want = {"onset": 0.2, "offset": 1.4, "initial": -70, "final": -95, "max": -70, "min": -95,
            "elevation": -46, "distance": 97, "source": 2}
    text = caption.text_rule
    phrases = ["From 0.2s to 1.4s", "azimuth angle of -70 degrees", "azimuth of -95 degrees",
               "maximum azimuth angle of -70", "minimum azimuth angle of -95",
               "approximately -46 degrees", "approximately 97cm", "Source id: 2"]
    elapsed = time.perf_counter() - start
    ok = facts == want and all(p in text for p in phrases) and elapsed < 1.0
    _verdict(1, "worked-example caption facts", ok, f"{elapsed * 1000:.0f} ms")


def test_criterion_2_oracle_equivalence():
    start = time.perf_counter()
    tol = StaticTolerances()
    n_clips = n_answers = mismatches = 0
    for seed in range(1000):
        clip = generate_clip(random_scene_spec(seed))
        instances = extract_instances(clip, tol)
        for convention in (LEFT_POSITIVE, RIGHT_POSITIVE):
            options = QaOptions(azimuth_convention=convention, seed=seed)
            produced = {(q.qtype, q.subtype): q.answer
                        for q in generate_clip_qa(clip, VOCAB, tol, options, instances)}
            expected = brute_force_answers(clip, VOCAB, tol, convention)
            if produced != expected:
                mismatches += 1
            n_answers += len(expected)
        n_clips += 1
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and n_clips >= 1000 and elapsed < 30.0
    _verdict(2, "QA answers equal brute-force oracle", ok,
             f"{n_clips} clips, {n_answers} answers, {mismatches} mismatches, {elapsed:.1f} s")


def test_criterion_3_metric_identities():
    rng = random.Random(3)
    identity = all(
        mrr_mod(t, t) == 1.0
        for t in (rng.sample(range(13), rng.randint(1, 13)) for _ in range(500))
    )
    empty = all(mrr_mod(rng.sample(range(13), k), []) == 0.0 for k in range(1, 14))
    hand = abs(mrr_mod("ABC", "BAC") - 2 / 3) <= 1e-12 and abs(mrr_mod("AB", "B") - 0.25) <= 1e-12
    _verdict(3, "MRR_mod identities", identity and empty and hand)


def test_criterion_4_scorer_fixture():
    report = score_dataset(FIXTURES / "score_gt.jsonl", FIXTURES / "score_pred.jsonl")
    want = {"precision": 5 / 6, "recall": 20 / 27, "f1": 40 / 51,
            "spatial_mrr_mod": 41 / 72, "temporal_mrr_mod": 0.5}
    got = {k: getattr(report, k) for k in want}
    fixture_ok = all(abs(got[k] - want[k]) <= 1e-12 for k in want)

    perfect = score_dataset(FIXTURES / "score_gt.jsonl", FIXTURES / "score_perfect.jsonl")
    row = perfect.render_table("reference").splitlines()[2]
    perfect_ok = [c.strip() for c in row.split("|")[1:]] == ["1.00"] * 5
    _verdict(4, "scorer fixture and perfect submission", fixture_ok and perfect_ok)


def test_criterion_5_loss_closed_forms():
    one = encode_ideal_scores([0], 3)
    hand = [
        ranking_loss([0.8, 0.1, 0.0], one) - 0.0,
        ranking_loss([0.4, 0.2, 0.3], one) - 0.3,
        l1_loss([0.8, 0.1, 0.0], one) - 0.3,
        l1_loss([0.0, 0.0, 0.0], encode_ideal_scores([0, 1], 3)) - 1.5,
    ]
    hand_ok = max(abs(x) for x in hand) <= 1e-12

    n_small = 0
    small_ok = True
    for M in range(4):
        for order in itertools.permutations(range(13), M):
            t = encode_ideal_scores(order, 13)
            small_ok &= ranking_loss(t.ideal, t) <= 1e-12
            n_small += 1

    rng = np.random.default_rng(5)
    large_ok = abs(ideal_ranking_loss(4, 13) - 0.6) <= 1e-12
    for M in range(4, 14):
        closed = ideal_ranking_loss(M, 13)
        large_ok &= closed > 0
        for _ in range(50):
            t = encode_ideal_scores(rng.permutation(13)[:M].tolist(), 13)
            large_ok &= abs(ranking_loss(t.ideal, t) - closed) <= 1e-12
    _verdict(5, "loss closed forms", hand_ok and small_ok and large_ok,
             f"{n_small} exhaustive orders with M<=3")


def test_criterion_6_gradient_checks():
    start = time.perf_counter()
    results = check_gradients(seed=6, trials=1000)
    elapsed = time.perf_counter() - start
    ok = all(r.passed for r in results) and elapsed < 10.0
    _verdict(6, "gradient checks", ok, "; ".join(r.detail for r in results) + f"; {elapsed:.1f} s")


def _run_pipeline(data, out):
    assert cli_main(["caption", str(data), "--out", str(out), "--offline", "--seed", "7"]) == 0
    assert cli_main(["qa", str(data), "--out", str(out), "--offline", "--seed", "7"]) == 0
    return {p.name: p.read_bytes() for p in sorted(out.iterdir())}


def test_criterion_7_determinism(tmp_path, capsys):
    data = tmp_path / "data"
    assert cli_main(["synth", "--seed", "7", "--recordings", "3", "--clips", "4", "--out", str(data)]) == 0
    shutil.copy(FIXTURES / "worked_example.csv", data / "worked.csv")
    first = _run_pipeline(data, tmp_path / "a")
    second = _run_pipeline(data, tmp_path / "b")
    capsys.readouterr()
    _verdict(7, "byte-identical caption and QA outputs", first == second and len(first) == 5)


def test_criterion_8_throughput(tmp_path, capsys):
    data = tmp_path / "data"
    # 48 recordings x 60 clips x 100 frames = 288,000 frames (8 hours)
    assert cli_main(["synth", "--seed", "8", "--recordings", "48", "--clips", "60", "--out", str(data)]) == 0
    start = time.perf_counter()
    _run_pipeline(data, tmp_path / "out")
    elapsed = time.perf_counter() - start
    n_rows = sum(1 for p in data.glob("*.csv") for _ in p.open())
    n_items = sum(1 for _ in (tmp_path / "out" / "qa.jsonl").open())
    capsys.readouterr()
    _verdict(8, "8-hour corpus through caption + QA", elapsed < 60.0,
             f"{n_rows} annotation rows, {n_items} QA items, {elapsed:.1f} s")


def test_criterion_9_not_reproducible():
    # Trained-model scores need GPU training on real audio; nothing to run here.
    VERDICTS.append("[SKIP] criterion 9: trained-model benchmark scores are out of scope")
    pytest.skip("trained-model benchmark scores need audio and GPU training")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))

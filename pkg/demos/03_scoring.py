"""Score a model's answers against a generated QA set.

We fake a model that gets every detection right but swaps the first two
classes of each ordering answer, then show how each metric reacts.
"""
import json
import tempfile
from pathlib import Path

from spatialqa import ClassVocabulary, QaOptions, generate_clip_qa, mrr_mod, score_dataset
from spatialqa.synth import generate_clip, random_scene_spec

print("MRR_mod on toy orderings:")
for truth, guess in [("ABC", "ABC"), ("ABC", "BAC"), ("ABC", "CBA"), ("AB", "B"), ("AB", "")]:
    print(f"  truth={truth:<4} guess={guess:<4} -> {mrr_mod(truth, guess):.3f}")

vocab = ClassVocabulary.default()
gt_records, predictions = [], []
for seed in range(40):
    clip = generate_clip(random_scene_spec(seed, clip_id=f"demo_clip{seed:03d}"))
    for item in generate_clip_qa(clip, vocab, options=QaOptions(seed=seed)):
        rec = item.to_record(vocab)
        gt_records.append(rec)
        value = rec["answer"]["value"]
        if rec["answer"]["kind"] == "class_ranking" and len(value) > 1:
            value = [value[1], value[0], *value[2:]]
        predictions.append({"question_id": rec["question_id"], "answer": value})

with tempfile.TemporaryDirectory() as tmp:
    gt, pred = Path(tmp) / "gt.jsonl", Path(tmp) / "pred.jsonl"
    gt.write_text("".join(json.dumps(r) + "\n" for r in gt_records))
    pred.write_text("".join(json.dumps(r) + "\n" for r in predictions))
    report = score_dataset(gt, pred)

print(f"\n{report.n_questions} questions over 40 clips\n")
print(report.render_table("swapped-top-two"))

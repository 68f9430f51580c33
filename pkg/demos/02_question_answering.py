"""Generate the five question types for a synthetic scene.

The scene is built from a seed, so the printed answers are reproducible.
The brute-force oracle recomputes every answer straight from the frames.
"""
from spatialqa import ClassVocabulary, QaOptions, generate_clip_qa
from spatialqa.synth import brute_force_answers, generate_clip, random_scene_spec

vocab = ClassVocabulary.default()
clip = generate_clip(random_scene_spec(seed=4))
active = sorted({vocab.label(fa.class_idx) for fa in clip.frames})
print("active classes:", ", ".join(active), "\n")

items = generate_clip_qa(clip, vocab, options=QaOptions(seed=0))
for item in items:
    if item.qtype == "I" and not item.answer.yes_no:
        continue  # skip the long tail of "no" detection questions
    value = item.answer.to_value(vocab)
    print(f"{item.qtype:>3} {item.subtype:<16} {item.question_text}")
    print(f"    -> {value}")
    print(f"       e.g. \"{item.variants[0]}\"")

oracle = brute_force_answers(clip, vocab)
agree = all(oracle[(i.qtype, i.subtype)] == i.answer for i in items)
print(f"\n{len(items)} questions; oracle agrees on all of them: {agree}")

"""Turn a short annotation CSV into per-instance captions.

A man speaks from frame 2 to frame 14 while sweeping from -70 to -95
degrees azimuth; footsteps follow later from a fixed position.
"""
import tempfile
from pathlib import Path

from spatialqa import ClassVocabulary, parse_annotation_file, render_clip_captions, segment_into_clips
from spatialqa.captioner import attach_rephrasings

AZIMUTHS = [-70, -70, -72, -75, -78, -80, -83, -86, -88, -90, -93, -95, -95]

vocab = ClassVocabulary.default()
rows = [f"{2 + i},1,2,{az},-46,97" for i, az in enumerate(AZIMUTHS)]
rows += [f"{f},6,0,40,-20,150" for f in range(30, 40)]

with tempfile.TemporaryDirectory() as tmp:
    csv = Path(tmp) / "demo_room.csv"
    csv.write_text("\n".join(rows) + "\n")
    recording = parse_annotation_file(csv, vocab)

clip = segment_into_clips(recording)[0]
print(f"{clip.clip_id}: {len(clip.frames)} annotated frames, {clip.duration_s}s long\n")

# Rule-based text first, then an offline paraphrase (no network needed).
for cap in attach_rephrasings(render_clip_captions(clip, vocab=vocab)):
    print(f"[{vocab.label(cap.class_idx)} / source {cap.source_id}]")
    print(" rule:     ", cap.text_rule)
    print(" rephrased:", cap.text_rephrased)
    print()

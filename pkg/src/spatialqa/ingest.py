"""Annotation CSV parsing and 10-second clip segmentation.

Each recording is one headerless CSV with six integer columns::

    frame,class_idx,source_id,azimuth,elevation,distance
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import groupby
from pathlib import Path

from .scene_model import (
    CLIP_FRAMES,
    AnnotationError,
    ClassVocabulary,
    Clip,
    FrameAnnotation,
    VocabularyError,
    check_unique_keys,
)

N_COLUMNS = 6


class ParseError(AnnotationError):
    def __init__(self, message: str, path=None, lineno: int | None = None):
        self.path = path
        self.lineno = lineno
        where = f"{path}:{lineno}: " if path is not None and lineno is not None else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class RecordingAnnotations:
    recording_id: str
    rows: tuple[FrameAnnotation, ...]

    def __post_init__(self):
        rows = tuple(sorted(self.rows, key=lambda fa: fa.key))
        check_unique_keys(rows)
        object.__setattr__(self, "rows", rows)


def parse_rows(lines, vocab: ClassVocabulary, path="<string>") -> list[FrameAnnotation]:
    rows = []
    for lineno, fields in enumerate(csv.reader(lines), start=1):
        if not fields or all(not f.strip() for f in fields):
            continue
        if len(fields) != N_COLUMNS:
            raise ParseError(f"expected {N_COLUMNS} fields, got {len(fields)}", path, lineno)
        try:
            values = [int(f.strip()) for f in fields]
        except ValueError:
            raise ParseError(f"non-integer field in {fields!r}", path, lineno) from None
        if values[1] >= vocab.N:
            raise VocabularyError(
                f"{path}:{lineno}: class index {values[1]} outside vocabulary of size {vocab.N}"
            )
        try:
            rows.append(FrameAnnotation(*values))
        except AnnotationError as exc:
            raise type(exc)(f"{path}:{lineno}: {exc}") from None
    return rows


def parse_annotation_file(path, vocab: ClassVocabulary) -> RecordingAnnotations:
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        rows = parse_rows(fh, vocab, path)
    try:
        return RecordingAnnotations(path.stem, tuple(rows))
    except AnnotationError as exc:
        raise ParseError(str(exc), path) from None


def segment_into_clips(rec: RecordingAnnotations) -> list[Clip]:
    """Cut a recording into consecutive 100-frame clips.

    Clips are numbered from absolute frame 0 so clip ``k`` always covers
    frames ``[100k, 100k + 99]``. Intermediate clips without annotations
    are still emitted; the final clip stops at the last annotated frame.
    """
    if not rec.rows:
        return []
    last_frame = max(fa.frame for fa in rec.rows)
    n_clips = last_frame // CLIP_FRAMES + 1
    by_clip = {
        k: list(group) for k, group in groupby(rec.rows, key=lambda fa: fa.frame // CLIP_FRAMES)
    }
    clips = []
    for k in range(n_clips):
        start = k * CLIP_FRAMES
        length = CLIP_FRAMES if k < n_clips - 1 else last_frame - start + 1
        local = tuple(
            FrameAnnotation(
                fa.frame - start, fa.class_idx, fa.source_id,
                fa.azimuth_deg, fa.elevation_deg, fa.distance_cm,
            )
            for fa in by_clip.get(k, ())
        )
        clips.append(Clip(f"{rec.recording_id}_clip{k:03d}", rec.recording_id, start, length, local))
    return clips


def write_annotation_file(path, rows) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for fa in rows:
            writer.writerow(
                [fa.frame, fa.class_idx, fa.source_id, fa.azimuth_deg, fa.elevation_deg, fa.distance_cm]
            )

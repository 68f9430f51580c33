"""Seeded synthetic scenes and a naive answer oracle for end-to-end testing.

:func:`brute_force_answers` recomputes every QA answer by scanning raw
frames. It shares no code with the instance pipeline on purpose.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .scene_model import (
    CLIP_FRAMES,
    ClassVocabulary,
    Clip,
    FrameAnnotation,
    StaticTolerances,
    slugify,
)
from .qa_generator import LEFT_POSITIVE, Answer

STATIC = "static"
AZIMUTH_SWEEP = "azimuth_sweep"
DISTANCE_SWEEP = "distance_sweep"
MOTIONS = (STATIC, AZIMUTH_SWEEP, DISTANCE_SWEEP)


class SceneSpecError(ValueError):
    pass


def round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


@dataclass(frozen=True)
class SourceSpec:
    source_id: int
    class_idx: int
    instances: tuple[tuple[int, int], ...]  # inclusive (onset, offset) frames
    motion: str = STATIC
    azimuth: int = 0
    elevation: int = 0
    distance: int = 100
    azimuth_end: Optional[int] = None
    distance_end: Optional[int] = None

    def __post_init__(self):
        if self.motion not in MOTIONS:
            raise SceneSpecError(f"unknown motion profile {self.motion!r}")
        spans = sorted(self.instances)
        for on, off in spans:
            if off < on:
                raise SceneSpecError(f"instance offset {off} before onset {on}")
            if on < 0:
                raise SceneSpecError("negative onset frame")
        for (_, off), (on, _) in zip(spans, spans[1:]):
            if on <= off:
                raise SceneSpecError("instances of one source overlap")

    def values_at(self, frame: int, onset: int, offset: int) -> tuple[int, int, int]:
        frac = 0.0 if offset == onset else (frame - onset) / (offset - onset)
        az, dist = self.azimuth, self.distance
        if self.motion == AZIMUTH_SWEEP:
            az = round_half_up(self.azimuth + (self.azimuth_end - self.azimuth) * frac)
        elif self.motion == DISTANCE_SWEEP:
            dist = round_half_up(self.distance + (self.distance_end - self.distance) * frac)
        return az, self.elevation, dist


@dataclass(frozen=True)
class SceneSpec:
    seed: int
    sources: tuple[SourceSpec, ...] = ()
    clip_len_frames: int = CLIP_FRAMES
    jitter: int = 0  # +/- integer noise on static values, drawn from the seed
    clip_id: str = "synth_clip000"

    def __post_init__(self):
        ids = [s.source_id for s in self.sources]
        if len(set(ids)) != len(ids):
            raise SceneSpecError("duplicate source ids")
        for src in self.sources:
            for _, off in src.instances:
                if off >= self.clip_len_frames:
                    raise SceneSpecError(f"instance offset {off} beyond clip length {self.clip_len_frames}")


def generate_clip(spec: SceneSpec) -> Clip:
    rng = np.random.default_rng(spec.seed)
    frames = []
    for src in spec.sources:
        for on, off in sorted(src.instances):
            for f in range(on, off + 1):
                az, el, dist = src.values_at(f, on, off)
                if spec.jitter and src.motion == STATIC:
                    az_j, el_j, d_j = rng.integers(-spec.jitter, spec.jitter + 1, size=3)
                    az = min(179, max(-180, az + int(az_j)))
                    el = min(90, max(-90, el + int(el_j)))
                    dist = max(0, dist + int(d_j))
                frames.append(FrameAnnotation(f, src.class_idx, src.source_id, az, el, dist))
    frames.sort(key=lambda fa: fa.key)
    return Clip(spec.clip_id, spec.clip_id.rsplit("_clip", 1)[0], 0, spec.clip_len_frames, tuple(frames))


def random_scene_spec(
    seed: int,
    n_classes: int = 13,
    max_sources: int = 6,
    max_classes: int = 4,
    clip_len_frames: int = CLIP_FRAMES,
    clip_id: str = "synth_clip000",
) -> SceneSpec:
    """Random scene built on coarse value grids so ties happen often."""
    rng = np.random.default_rng(seed)
    n_sources = int(rng.integers(0, max_sources + 1))
    pool = rng.choice(n_classes, size=int(rng.integers(1, max_classes + 1)), replace=False)
    sources = []
    for sid in range(n_sources):
        n_inst = int(rng.integers(1, 4))
        cuts = np.sort(rng.choice(np.arange(clip_len_frames), size=2 * n_inst, replace=False))
        spans, last_off = [], -2
        for on, off in zip(cuts[0::2], cuts[1::2]):
            on, off = int(on), int(off)
            if on <= last_off + 1:  # keep at least one silent frame between instances
                continue
            spans.append((on, off))
            last_off = off
        motion = MOTIONS[int(rng.integers(0, 3))]
        az = int(rng.integers(-17, 18)) * 10
        dist = int(rng.integers(1, 8)) * 50
        # sweep sizes straddle the default tolerances (5 degrees, 10 cm)
        az_end = min(170, max(-170, az + int(rng.choice([-40, -5, 3, 5, 6, 25]))))
        dist_end = max(0, dist + int(rng.choice([-60, -10, 4, 10, 11, 80])))
        sources.append(
            SourceSpec(
                source_id=int(rng.integers(0, 3)) * 10 + sid,
                class_idx=int(rng.choice(pool)),
                instances=tuple(spans),
                motion=motion,
                azimuth=az,
                elevation=int(rng.integers(-4, 5)) * 10,
                distance=dist,
                azimuth_end=az_end,
                distance_end=dist_end,
            )
        )
    return SceneSpec(seed, tuple(sources), clip_len_frames, clip_id=clip_id)


# ---------------------------------------------------------------------------
# Naive oracle

@dataclass
class _FirstSeen:
    class_idx: int
    frame: int
    source_id: int
    az: int
    el: int
    dist: int
    moving: bool = field(default=False)


def brute_force_answers(
    clip: Clip,
    vocab: ClassVocabulary,
    tol: StaticTolerances = StaticTolerances(),
    azimuth_convention: str = LEFT_POSITIVE,
) -> dict[tuple[str, str], Answer]:
    """Every QA answer for ``clip`` keyed by ``(qtype, subtype)``."""
    lookup = {(fa.frame, fa.class_idx, fa.source_id): fa for fa in clip.frames}

    first: dict[int, _FirstSeen] = {}
    for fa in clip.frames:
        cur = first.get(fa.class_idx)
        if cur is None or (fa.frame, fa.source_id) < (cur.frame, cur.source_id):
            first[fa.class_idx] = _FirstSeen(
                fa.class_idx, fa.frame, fa.source_id, fa.azimuth_deg, fa.elevation_deg, fa.distance_cm
            )

    for rec in first.values():
        azs, els, dists = [], [], []
        f = rec.frame
        while (f, rec.class_idx, rec.source_id) in lookup:
            fa = lookup[(f, rec.class_idx, rec.source_id)]
            azs.append(fa.azimuth_deg)
            els.append(fa.elevation_deg)
            dists.append(fa.distance_cm)
            f += 1
        rec.moving = (
            max(azs) - min(azs) > tol.azimuth_deg
            or max(els) - min(els) > tol.elevation_deg
            or max(dists) - min(dists) > tol.distance_cm
        )

    answers: dict[tuple[str, str], Answer] = {}
    for c in range(vocab.N):
        answers[("I", slugify(vocab.label(c)))] = Answer.yes(c in first)

    recs = [first[c] for c in sorted(first)]
    by_onset = sorted(recs, key=lambda r: (r.frame, r.class_idx))
    answers[("II", "active")] = Answer.class_set([r.class_idx for r in by_onset])
    answers[("III", "stationary")] = Answer.class_set([r.class_idx for r in by_onset if not r.moving])
    answers[("III", "moving")] = Answer.class_set([r.class_idx for r in by_onset if r.moving])

    left_sign = 1 if azimuth_convention == LEFT_POSITIVE else -1
    if recs:
        extremes = {
            "leftmost": lambda r: left_sign * r.az,
            "rightmost": lambda r: -left_sign * r.az,
            "topmost": lambda r: r.el,
            "bottommost": lambda r: -r.el,
            "nearest": lambda r: -r.dist,
            "farthest": lambda r: r.dist,
        }
        for name, score in extremes.items():
            best = None
            for r in recs:  # ascending class index; strict '>' keeps the smaller index on ties
                if best is None or score(r) > score(best):
                    best = r
            answers[("III", name)] = Answer.ranking([best.class_idx])

    if len(recs) >= 2:
        for dim, attr in (("azimuth", "az"), ("elevation", "el"), ("distance", "dist")):
            asc = sorted(recs, key=lambda r: (getattr(r, attr), r.class_idx))
            desc = sorted(recs, key=lambda r: (-getattr(r, attr), r.class_idx))
            answers[("IV", f"{dim}_asc")] = Answer.ranking([r.class_idx for r in asc])
            answers[("IV", f"{dim}_desc")] = Answer.ranking([r.class_idx for r in desc])
        answers[("V", "onset")] = Answer.ranking([r.class_idx for r in by_onset])
    return answers


def synth_corpus(
    seed: int,
    n_recordings: int,
    clips_per_recording: int,
    n_classes: int = 13,
) -> dict[str, list[FrameAnnotation]]:
    """Recording id -> absolute-frame annotation rows, built from random clips."""
    corpus = {}
    rng = np.random.default_rng(seed)
    for r in range(n_recordings):
        rec_id = f"synth{r:03d}"
        rows = []
        for k in range(clips_per_recording):
            spec = random_scene_spec(int(rng.integers(0, 2**31)), n_classes=n_classes)
            clip = generate_clip(spec)
            start = k * CLIP_FRAMES
            rows.extend(
                FrameAnnotation(fa.frame + start, fa.class_idx, fa.source_id,
                                fa.azimuth_deg, fa.elevation_deg, fa.distance_cm)
                for fa in clip.frames
            )
        corpus[rec_id] = rows
    return corpus

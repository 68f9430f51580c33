"""Core domain types shared by the whole toolkit.

Annotations live on a 100 ms frame grid. Angles are signed degrees,
distances are centimeters, times are seconds with one decimal place.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

FRAME_SECONDS = 0.1
CLIP_FRAMES = 100


class AnnotationError(ValueError):
    """Base class for invalid annotation content."""


class VocabularyError(AnnotationError):
    pass


class RangeError(AnnotationError):
    pass


def frame_to_seconds(frame: int) -> float:
    # round() keeps 0.1 * 3 == 0.3 exactly comparable
    return round(frame * FRAME_SECONDS, 1)


def format_seconds(t: float) -> str:
    return f"{t:.1f}s"


def slugify(label: str) -> str:
    out = "".join(ch.lower() if ch.isalnum() else "_" for ch in label)
    return "_".join(part for part in out.split("_") if part)


STARSS23_LABELS = (
    "woman speaking",
    "man speaking",
    "clapping",
    "telephone ringing",
    "laughing",
    "domestic sounds",
    "footsteps",
    "door open or close",
    "music",
    "musical instrument",
    "water tap",
    "bell",
    "knock",
)


@dataclass(frozen=True)
class ClassVocabulary:
    """Ordered list of class display labels; index ``i`` is class ``i``."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        for lab in labels:
            if not isinstance(lab, str) or not lab.strip():
                raise VocabularyError(f"empty or non-string class label: {lab!r}")
            if lab != lab.strip():
                raise VocabularyError(f"class label has surrounding whitespace: {lab!r}")
        if len(set(labels)) != len(labels):
            raise VocabularyError("class labels must be unique")
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(labels)})

    @property
    def N(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def label(self, class_idx: int) -> str:
        if not 0 <= class_idx < self.N:
            raise VocabularyError(f"class index {class_idx} outside vocabulary of size {self.N}")
        return self.labels[class_idx]

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise VocabularyError(f"unknown class label {label!r}") from None

    @classmethod
    def default(cls) -> "ClassVocabulary":
        return cls(STARSS23_LABELS)

    # File format: one "index,label" pair per line; blank lines and
    # lines starting with '#' are ignored. Indices must be 0..N-1.
    def dumps(self) -> str:
        return "".join(f"{i},{lab}\n" for i, lab in enumerate(self.labels))

    @classmethod
    def loads(cls, text: str) -> "ClassVocabulary":
        entries = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            idx_text, sep, label = line.partition(",")
            if not sep:
                raise VocabularyError(f"line {lineno}: expected 'index,label'")
            try:
                idx = int(idx_text)
            except ValueError:
                raise VocabularyError(f"line {lineno}: non-integer class index {idx_text!r}") from None
            if idx in entries:
                raise VocabularyError(f"line {lineno}: duplicate class index {idx}")
            entries[idx] = label.strip()
        if sorted(entries) != list(range(len(entries))):
            raise VocabularyError("class indices must be contiguous from 0")
        return cls(tuple(entries[i] for i in range(len(entries))))

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "ClassVocabulary":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True, order=True)
class FrameAnnotation:
    """One annotated 100 ms frame of one (class, source) pair."""

    frame: int
    class_idx: int
    source_id: int
    azimuth_deg: int
    elevation_deg: int
    distance_cm: int

    def __post_init__(self):
        if self.frame < 0:
            raise RangeError(f"negative frame index {self.frame}")
        if self.class_idx < 0:
            raise VocabularyError(f"negative class index {self.class_idx}")
        if self.source_id < 0:
            raise RangeError(f"negative source id {self.source_id}")
        if not -180 <= self.azimuth_deg < 180:
            raise RangeError(f"azimuth {self.azimuth_deg} outside [-180, 180)")
        if not -90 <= self.elevation_deg <= 90:
            raise RangeError(f"elevation {self.elevation_deg} outside [-90, 90]")
        if self.distance_cm < 0:
            raise RangeError(f"negative distance {self.distance_cm}")

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.frame, self.class_idx, self.source_id)

    @property
    def time_s(self) -> float:
        return frame_to_seconds(self.frame)


def check_unique_keys(frames: Iterable[FrameAnnotation]) -> None:
    seen = set()
    for fa in frames:
        if fa.key in seen:
            raise AnnotationError(
                f"duplicate annotation for frame={fa.frame} class={fa.class_idx} source={fa.source_id}"
            )
        seen.add(fa.key)


@dataclass(frozen=True)
class Clip:
    clip_id: str
    recording_id: str
    start_frame: int
    length_frames: int
    frames: tuple[FrameAnnotation, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        if not 0 < self.length_frames <= CLIP_FRAMES:
            raise RangeError(f"clip length {self.length_frames} outside (0, {CLIP_FRAMES}]")
        for fa in self.frames:
            if not 0 <= fa.frame < self.length_frames:
                raise RangeError(
                    f"clip {self.clip_id}: local frame {fa.frame} outside [0, {self.length_frames})"
                )
        check_unique_keys(self.frames)

    @property
    def duration_s(self) -> float:
        return frame_to_seconds(self.length_frames)


@dataclass(frozen=True)
class TimedValue:
    value: float
    time_s: float


@dataclass(frozen=True)
class TrajectoryStat:
    """Start/end/extreme values of one spatial dimension over an instance."""

    initial: TimedValue
    final: TimedValue
    min: TimedValue
    max: TimedValue
    is_static: bool
    mean: float

    def __post_init__(self):
        lo, hi = self.min.value, self.max.value
        if not (lo <= self.initial.value <= hi and lo <= self.final.value <= hi):
            raise AnnotationError("trajectory initial/final values must lie within [min, max]")

    @property
    def span(self) -> float:
        return self.max.value - self.min.value

    @property
    def approx(self) -> int:
        """Mean value rounded half-up, used for 'approximately X' phrasing."""
        return math.floor(self.mean + 0.5)


@dataclass(frozen=True)
class EventInstance:
    clip_id: str
    class_idx: int
    source_id: int
    instance_idx: int
    onset_s: float
    offset_s: float
    azimuth: TrajectoryStat
    elevation: TrajectoryStat
    distance: TrajectoryStat
    frame_indices: tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.onset_s > self.offset_s:
            raise AnnotationError(f"onset {self.onset_s} after offset {self.offset_s}")
        fr = self.frame_indices
        if any(b - a != 1 for a, b in zip(fr, fr[1:])):
            raise AnnotationError("instance frames must be contiguous")

    @property
    def is_moving(self) -> bool:
        return not (self.azimuth.is_static and self.elevation.is_static and self.distance.is_static)

    @property
    def onset_frame(self) -> int:
        return round(self.onset_s / FRAME_SECONDS)


@dataclass(frozen=True)
class StaticTolerances:
    """Largest per-dimension range still considered stationary."""

    azimuth_deg: float = 5.0
    elevation_deg: float = 5.0
    distance_cm: float = 10.0

    def __post_init__(self):
        for name in ("azimuth_deg", "elevation_deg", "distance_cm"):
            if getattr(self, name) < 0:
                raise ValueError(f"tolerance {name} must be non-negative")




"""Rule-based instance captions and their paraphrases."""
from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

from .instances import extract_instances
from .rephrase import CAPTION_PROMPT, RephraseClient, RephraseError, check_numerals
from .scene_model import (
    ClassVocabulary,
    Clip,
    EventInstance,
    FrameAnnotation,
    StaticTolerances,
    TrajectoryStat,
    format_seconds,
)

OFFLINE_PROVIDER = "offline"


@dataclass(frozen=True)
class _Dimension:
    attr: str
    article: str
    noun: str  # "azimuth angle"
    short_noun: str  # "azimuth"
    unit: str  # appended directly to the number

    def fmt(self, value) -> str:
        return f"{int(round(value))}{self.unit}"


DIMENSIONS = (
    _Dimension("azimuth", "an", "azimuth angle", "azimuth", " degrees"),
    _Dimension("elevation", "an", "elevation angle", "elevation", " degrees"),
    _Dimension("distance", "a", "distance", "distance", "cm"),
)


@dataclass(frozen=True)
class InstanceCaption:
    clip_id: str
    source_id: int
    class_idx: int
    instance_idx: int
    text_rule: str
    text_rephrased: Optional[str] = None
    rephrase_provider: Optional[str] = None

    def to_record(self, vocab: ClassVocabulary) -> dict:
        rec = {
            "clip_id": self.clip_id,
            "source_id": self.source_id,
            "class": vocab.label(self.class_idx),
            "instance_idx": self.instance_idx,
            "text_rule": self.text_rule,
        }
        if self.text_rephrased is not None:
            rec["text_rephrased"] = self.text_rephrased
            rec["rephrase_provider"] = self.rephrase_provider
        return rec


def render_frame_description(fa: FrameAnnotation, vocab: ClassVocabulary) -> str:
    """Single-frame description covering one 100 ms step."""
    start = fa.time_s
    return (
        f"From {format_seconds(start)} to {format_seconds(round(start + 0.1, 1))}, "
        f"a {vocab.label(fa.class_idx)} is heard. Horizontal angle {fa.azimuth_deg}, "
        f"vertical angle {fa.elevation_deg}, distance {fa.distance_cm}, source ID: {fa.source_id}."
    )


def _dimension_sentences(dim: _Dimension, stat: TrajectoryStat) -> list[str]:
    if stat.is_static:
        return [
            f"The sound was coming throughout from {dim.article} {dim.noun} of approximately "
            f"{dim.fmt(stat.approx)}."
        ]
    return [
        f"It is initially at {dim.article} {dim.noun} of {dim.fmt(stat.initial.value)} and moved finally "
        f"to {dim.article} {dim.short_noun} of {dim.fmt(stat.final.value)}.",
        f"During this time, the sound source moved to a maximum {dim.noun} of {dim.fmt(stat.max.value)} "
        f"at {format_seconds(stat.max.time_s)} and to a minimum {dim.noun} of {dim.fmt(stat.min.value)} "
        f"at {format_seconds(stat.min.time_s)}.",
    ]


def render_instance_caption(inst: EventInstance, vocab: ClassVocabulary) -> str:
    sentences = [
        f"From {format_seconds(inst.onset_s)} to {format_seconds(inst.offset_s)}, "
        f"{vocab.label(inst.class_idx)} is heard."
    ]
    for dim in DIMENSIONS:
        sentences.extend(_dimension_sentences(dim, getattr(inst, dim.attr)))
    sentences.append(f"Source id: {inst.source_id}")
    return " ".join(sentences)


# Offline paraphrase bank: each rule rewrites one sentence shape of the
# rule-based template. Rules never touch numbers.
_NUM = r"(-?\d+(?:\.\d+)?)"
_OFFLINE_RULES = (
    (
        re.compile(rf"From {_NUM}s to {_NUM}s, (.+?) is heard\."),
        r"Between \1s and \2s, the sound of \3 is heard.",
    ),
    (
        re.compile(rf"It is initially at an? ([a-z]+(?: angle)?) of {_NUM}( degrees|cm) and moved finally to an? [a-z]+ of {_NUM}( degrees|cm)\."),
        r"Its \1 begins at \2\3 and ends at \4\5.",
    ),
    (
        re.compile(
            rf"During this time, the sound source moved to a maximum ([a-z]+(?: angle)?) of {_NUM}( degrees|cm) at {_NUM}s "
            rf"and to a minimum [a-z]+(?: angle)? of {_NUM}( degrees|cm) at {_NUM}s\."
        ),
        r"Along the way its \1 peaks at \2\3 at \4s, while the lowest value, \5\6, occurs at \7s.",
    ),
    (
        re.compile(rf"The sound was coming throughout from an? ([a-z]+(?: angle)?) of approximately {_NUM}( degrees|cm)\."),
        r"Its \1 holds steady at roughly \2\3 the whole time.",
    ),
    (re.compile(rf"Source id: {_NUM}$"), r"Source ID: \1"),
)


def offline_paraphrase(text: str) -> str:
    out = text
    for pattern, repl in _OFFLINE_RULES:
        out = pattern.sub(repl, out)
    return out


def rephrase(text: str, client: Optional[RephraseClient] = None) -> str:
    """Paraphrase a caption, keeping every numeral intact.

    With ``client=None`` the deterministic offline bank is used. Remote
    output that drops or changes a numeral raises
    :class:`~spatialqa.rephrase.RephraseValidationError`; transport
    failures raise :class:`~spatialqa.rephrase.RephraseTransportError`.
    """
    if client is None:
        out = offline_paraphrase(text)
    else:
        out = client.complete(CAPTION_PROMPT.format(text=text))
    check_numerals(text, out)
    return out


def caption_instances(instances, vocab: ClassVocabulary) -> list[InstanceCaption]:
    return [
        InstanceCaption(
            clip_id=inst.clip_id,
            source_id=inst.source_id,
            class_idx=inst.class_idx,
            instance_idx=inst.instance_idx,
            text_rule=render_instance_caption(inst, vocab),
        )
        for inst in instances
    ]


def render_clip_captions(
    clip: Clip, tol: StaticTolerances = StaticTolerances(), vocab: Optional[ClassVocabulary] = None
) -> list[InstanceCaption]:
    return caption_instances(extract_instances(clip, tol), vocab or ClassVocabulary.default())


def attach_rephrasings(captions, client: Optional[RephraseClient] = None, fallback: bool = True,
                       workers: int = 1) -> list[InstanceCaption]:
    """Return copies of ``captions`` with ``text_rephrased`` filled in.

    Rejected remote paraphrases fall back to the offline bank when
    ``fallback`` is set; otherwise the error propagates. With
    ``workers > 1`` requests run concurrently but results keep input order.
    """

    def one(cap: InstanceCaption) -> InstanceCaption:
        provider = OFFLINE_PROVIDER if client is None else client.name
        try:
            text = rephrase(cap.text_rule, client)
        except RephraseError:
            if not fallback or client is None:
                raise
            text, provider = rephrase(cap.text_rule, None), OFFLINE_PROVIDER
        return replace(cap, text_rephrased=text, rephrase_provider=provider)

    if workers > 1 and client is not None:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, captions))
    return [one(cap) for cap in captions]

"""Question/answer generation for the five question types.

Every answer is derived from each class's *first appearance* in the clip:
the earliest instance of that class (ties: smaller source id, then
smaller instance index), read at its initial frame.
"""
from __future__ import annotations

import functools
import itertools
import random
import re
from dataclasses import dataclass, field
from typing import Hashable, Optional, Sequence

from .instances import extract_instances
from .rephrase import QUESTION_PROMPT, RephraseClient, RephraseError, RephraseValidationError, check_terms
from .scene_model import ClassVocabulary, Clip, EventInstance, StaticTolerances, slugify

N_VARIANTS = 10
QTYPES = ("I", "II", "III", "IV", "V")

LEFT_POSITIVE = "left-positive"
RIGHT_POSITIVE = "right-positive"

YES_NO = "yes_no"
CLASS_SET = "class_set"
CLASS_RANKING = "class_ranking"
ANSWER_KINDS = (YES_NO, CLASS_SET, CLASS_RANKING)


@dataclass(frozen=True)
class Answer:
    """Ground-truth or predicted answer.

    ``classes`` holds class identifiers, normally vocabulary indices; the
    scorer also uses labels directly.
    """

    kind: str
    yes_no: Optional[bool] = None
    classes: Optional[tuple[Hashable, ...]] = None

    def __post_init__(self):
        if self.kind not in ANSWER_KINDS:
            raise ValueError(f"unknown answer kind {self.kind!r}")
        if self.kind == YES_NO:
            if self.classes is not None:
                raise ValueError("yes/no answers carry no class list")
        else:
            if self.yes_no is not None or self.classes is None:
                raise ValueError(f"{self.kind} answers need a class list and no yes/no value")
            classes = tuple(self.classes)
            if len(set(classes)) != len(classes):
                raise ValueError(f"duplicate classes in answer: {classes}")
            object.__setattr__(self, "classes", classes)

    @classmethod
    def yes(cls, flag: bool) -> "Answer":
        return cls(YES_NO, yes_no=bool(flag))

    @classmethod
    def class_set(cls, classes) -> "Answer":
        return cls(CLASS_SET, classes=tuple(classes))

    @classmethod
    def ranking(cls, classes) -> "Answer":
        return cls(CLASS_RANKING, classes=tuple(classes))

    def to_value(self, vocab: Optional[ClassVocabulary] = None):
        if self.kind == YES_NO:
            return None if self.yes_no is None else ("yes" if self.yes_no else "no")
        if vocab is None:
            return list(self.classes)
        return [vocab.label(c) for c in self.classes]

    def to_record(self, vocab: Optional[ClassVocabulary] = None) -> dict:
        return {"kind": self.kind, "value": self.to_value(vocab)}

    @classmethod
    def from_record(cls, rec: dict, vocab: Optional[ClassVocabulary] = None) -> "Answer":
        kind, value = rec["kind"], rec["value"]
        if kind == YES_NO:
            return cls(YES_NO, yes_no=None if value is None else _parse_yes_no(value))
        classes = [vocab.index(v) for v in value] if vocab is not None else list(value)
        return cls(kind, classes=tuple(classes))


def _parse_yes_no(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("yes", "true"):
        return True
    if text in ("no", "false"):
        return False
    raise ValueError(f"not a yes/no value: {value!r}")


@dataclass(frozen=True)
class QaItem:
    question_id: str
    clip_id: str
    qtype: str
    subtype: str
    question_text: str
    variants: tuple[str, ...]
    answer: Answer

    def __post_init__(self):
        object.__setattr__(self, "variants", tuple(self.variants))
        if len(self.variants) != N_VARIANTS:
            raise ValueError(f"expected {N_VARIANTS} variants, got {len(self.variants)}")
        if self.qtype not in QTYPES:
            raise ValueError(f"unknown question type {self.qtype!r}")

    @property
    def key(self) -> tuple[str, str]:
        return (self.qtype, self.subtype)

    def to_record(self, vocab: ClassVocabulary) -> dict:
        return {
            "question_id": self.question_id,
            "clip_id": self.clip_id,
            "type": self.qtype,
            "subtype": self.subtype,
            "question_text": self.question_text,
            "variants": list(self.variants),
            "answer": self.answer.to_record(vocab),
        }


@dataclass(frozen=True)
class ClassFirstAppearance:
    class_idx: int
    onset_s: float
    azimuth_deg: float
    elevation_deg: float
    distance_cm: float
    is_moving: bool = False
    source_id: int = 0


@dataclass(frozen=True)
class QaOptions:
    azimuth_convention: str = LEFT_POSITIVE
    seed: int = 0
    balance_type1: bool = False
    client: Optional[RephraseClient] = field(default=None, compare=False)
    fallback: bool = True  # use the offline bank when a remote rephrase is rejected

    def __post_init__(self):
        if self.azimuth_convention not in (LEFT_POSITIVE, RIGHT_POSITIVE):
            raise ValueError(f"unknown azimuth convention {self.azimuth_convention!r}")


# ---------------------------------------------------------------------------
# Question text banks. Offline variants are drawn from the full product of
# openers and phrasings; the canonical text is stored separately.

@dataclass(frozen=True)
class _Bank:
    canonical: str
    openers: tuple[str, ...]
    bodies: tuple[str, ...]

    @functools.lru_cache(maxsize=None)
    def candidates(self) -> tuple[str, ...]:
        out = []
        for opener, body in itertools.product(self.openers, self.bodies):
            text = f"{opener} {body}".strip()
            text = text[0].upper() + text[1:]
            if text not in out:
                out.append(text)
        return tuple(out)


_WHICH = ("Which sound event is", "What sound is", "Which sound source is", "Which audio event is")
_SORT = ("Order the audio events", "Sort the sound events", "Arrange the sound sources", "Rank the sounds in the scene")
_WHAT = ("What", "Which")

BANKS = {
    ("I", None): _Bank(
        "Is there a sound event of {a_label} in the scene?",
        ("Is there", "Can you hear", "Does the scene contain", "Do we hear"),
        ("a sound event of {a_label} in the scene?", "any {label} in this clip?", "the sound of {label} anywhere?"),
    ),
    ("II", "active"): _Bank(
        "Which sound sources are active?",
        ("Which", "What"),
        (
            "sound sources are active?", "sound events occur in the clip?", "sounds can be heard in this scene?",
            "sound events are present in the recording?", "audio events take place in this clip?",
            "sources are producing sound here?",
        ),
    ),
    ("III", "stationary"): _Bank(
        "What sound sources remain stationary in this scene?",
        _WHAT,
        (
            "sound sources remain stationary in this scene?", "sound events stay in one place?",
            "sounds do not move during the clip?", "sources keep a fixed position?",
            "audio events are static?", "sounds come from a fixed location?",
        ),
    ),
    ("III", "moving"): _Bank(
        "What sound sources are moving in this scene?",
        _WHAT,
        (
            "sound sources are moving in this scene?", "sound events change position?",
            "sounds travel through the scene?", "sources move around during the clip?",
            "audio events are in motion?", "sounds shift their location?",
        ),
    ),
    ("III", "leftmost"): _Bank(
        "Which sound event is the leftmost in the scene?",
        _WHICH,
        ("the leftmost in the scene?", "located furthest to the left?", "positioned most to the left of the microphone?"),
    ),
    ("III", "rightmost"): _Bank(
        "Which sound event is the rightmost in the scene?",
        _WHICH,
        ("the rightmost in the scene?", "located furthest to the right?", "positioned most to the right of the microphone?"),
    ),
    ("III", "topmost"): _Bank(
        "Which sound event is the topmost in the scene?",
        _WHICH,
        ("the topmost in the scene?", "located highest up?", "coming from the greatest elevation?"),
    ),
    ("III", "bottommost"): _Bank(
        "Which sound event is the bottommost in the scene?",
        _WHICH,
        ("the bottommost in the scene?", "located lowest down?", "coming from the lowest elevation?"),
    ),
    ("III", "nearest"): _Bank(
        "Which sound event is the nearest to the microphone?",
        _WHICH,
        ("the nearest to the microphone?", "closest to the recording device?", "at the shortest distance?"),
    ),
    ("III", "farthest"): _Bank(
        "Which sound event is the farthest from the microphone?",
        _WHICH,
        ("the farthest from the microphone?", "furthest away from the recording device?", "at the greatest distance?"),
    ),
    ("IV", "azimuth_asc"): _Bank(
        "Order the audio events by azimuth angle, from the smallest to the largest.",
        _SORT,
        ("by azimuth angle, from the smallest to the largest.", "in ascending order of azimuth.", "by increasing horizontal angle."),
    ),
    ("IV", "azimuth_desc"): _Bank(
        "Order the audio events by azimuth angle, from the largest to the smallest.",
        _SORT,
        ("by azimuth angle, from the largest to the smallest.", "in descending order of azimuth.", "by decreasing horizontal angle."),
    ),
    ("IV", "elevation_asc"): _Bank(
        "Sort the audio events from the bottommost to the topmost.",
        _SORT,
        ("from the bottommost to the topmost.", "in ascending order of elevation.", "from lowest to highest."),
    ),
    ("IV", "elevation_desc"): _Bank(
        "Sort the audio events from the topmost to the bottommost.",
        _SORT,
        ("from the topmost to the bottommost.", "in descending order of elevation.", "from highest to lowest."),
    ),
    ("IV", "distance_asc"): _Bank(
        "Order the audio events by distance, beginning with the closest.",
        _SORT,
        ("by distance, beginning with the closest.", "from nearest to farthest.", "in ascending order of distance."),
    ),
    ("IV", "distance_desc"): _Bank(
        "Order the audio events by distance, beginning with the farthest.",
        _SORT,
        ("by distance, beginning with the farthest.", "from farthest to nearest.", "in descending order of distance."),
    ),
    ("V", "onset"): _Bank(
        "Arrange the sound sources in order of when they begin, from earliest to latest.",
        _SORT,
        ("in order of when they begin, from earliest to latest.", "by their start time.", "chronologically by onset."),
    ),
}


def with_article(label: str) -> str:
    """``label`` preceded by a/an, or bare for plural and mass-noun labels."""
    words = label.split()
    if label.endswith("s") or label == "music" or (len(words) == 1 and label.endswith("ing")):
        return label
    return ("an " if label[0].lower() in "aeiou" else "a ") + label


def _bank_for(qtype: str, subtype: str) -> _Bank:
    return BANKS[(qtype, None)] if qtype == "I" else BANKS[(qtype, subtype)]


def offline_variants(bank: _Bank, question_id: str, seed: int = 0, **fmt) -> list[str]:
    candidates = [c.format(**fmt) for c in bank.candidates()]
    rng = random.Random(f"{seed}:{question_id}")
    return rng.sample(candidates, N_VARIANTS)


_NUMBERING = re.compile(r"^\s*(?:\d+[.)]|[-*•])\s*")


def remote_variants(question_text: str, client: RephraseClient, required_terms=()) -> list[str]:
    reply = client.complete(QUESTION_PROMPT.format(n=N_VARIANTS, text=question_text))
    lines = []
    for raw in reply.splitlines():
        line = _NUMBERING.sub("", raw).strip()
        if line and line not in lines:
            lines.append(line)
    if len(lines) < N_VARIANTS:
        raise RephraseValidationError(f"expected {N_VARIANTS} distinct variants, got {len(lines)}")
    lines = lines[:N_VARIANTS]
    for line in lines:
        check_terms(line, required_terms)
    return lines


def variants_for(
    question_text: str,
    client: Optional[RephraseClient] = None,
    *,
    question_id: str,
    qtype: str,
    subtype: str,
    seed: int = 0,
    required_terms: Sequence[str] = (),
    fmt: Optional[dict] = None,
) -> list[str]:
    """Ten paraphrases of a question.

    Offline (``client=None``) draws from the question family's template
    bank, seeded by ``(seed, question_id)``. Remote output must keep every
    entry of ``required_terms`` verbatim.
    """
    if client is None:
        return offline_variants(_bank_for(qtype, subtype), question_id, seed, **(fmt or {}))
    return remote_variants(question_text, client, required_terms)


# ---------------------------------------------------------------------------
# First appearances

def first_appearances(
    clip: Clip,
    tol: StaticTolerances = StaticTolerances(),
    instances: Optional[Sequence[EventInstance]] = None,
) -> list[ClassFirstAppearance]:
    """One record per active class, sorted by class index."""
    if instances is None:
        instances = extract_instances(clip, tol)
    best: dict[int, EventInstance] = {}
    for inst in instances:
        cur = best.get(inst.class_idx)
        rank = (inst.onset_s, inst.source_id, inst.instance_idx)
        if cur is None or rank < (cur.onset_s, cur.source_id, cur.instance_idx):
            best[inst.class_idx] = inst
    return [
        ClassFirstAppearance(
            class_idx=c,
            onset_s=inst.onset_s,
            azimuth_deg=inst.azimuth.initial.value,
            elevation_deg=inst.elevation.initial.value,
            distance_cm=inst.distance.initial.value,
            is_moving=inst.is_moving,
            source_id=inst.source_id,
        )
        for c, inst in sorted(best.items())
    ]


def _by_onset(apps) -> list[int]:
    return [a.class_idx for a in sorted(apps, key=lambda a: (a.onset_s, a.class_idx))]


def _sorted_by(apps, attr: str, descending: bool) -> list[int]:
    sign = -1 if descending else 1
    return [a.class_idx for a in sorted(apps, key=lambda a: (sign * getattr(a, attr), a.class_idx))]


# (subtype, attribute, pick the maximum?) for the left-positive convention
_EXTREMES = (
    ("leftmost", "azimuth_deg", True),
    ("rightmost", "azimuth_deg", False),
    ("topmost", "elevation_deg", True),
    ("bottommost", "elevation_deg", False),
    ("nearest", "distance_cm", False),
    ("farthest", "distance_cm", True),
)


def extreme_direction(subtype: str, convention: str = LEFT_POSITIVE) -> tuple[str, bool]:
    """Attribute and max/min choice behind an extreme-finding subtype."""
    for name, attr, take_max in _EXTREMES:
        if name == subtype:
            if attr == "azimuth_deg" and convention == RIGHT_POSITIVE:
                take_max = not take_max
            return attr, take_max
    raise KeyError(subtype)


def _make_item(clip: Clip, qtype: str, subtype: str, answer: Answer, options: QaOptions,
               fmt: Optional[dict] = None, required_terms=()) -> QaItem:
    question_id = f"{clip.clip_id}:{qtype}:{subtype}:0"
    text = _bank_for(qtype, subtype).canonical.format(**(fmt or {}))
    kwargs = dict(question_id=question_id, qtype=qtype, subtype=subtype, seed=options.seed,
                  required_terms=required_terms, fmt=fmt)
    try:
        variants = variants_for(text, options.client, **kwargs)
    except RephraseError:
        if options.client is None or not options.fallback:
            raise
        variants = variants_for(text, None, **kwargs)
    return QaItem(question_id, clip.clip_id, qtype, subtype, text, tuple(variants), answer)


def _appearances(clip, tol, appearances):
    return first_appearances(clip, tol) if appearances is None else appearances


def gen_type1(clip: Clip, vocab: ClassVocabulary, tol: StaticTolerances = StaticTolerances(),
              options: QaOptions = QaOptions(), appearances=None) -> list[QaItem]:
    """Yes/no presence question for every vocabulary class."""
    active = {a.class_idx for a in _appearances(clip, tol, appearances)}
    classes = list(range(vocab.N))
    if options.balance_type1:
        absent = [c for c in classes if c not in active]
        rng = random.Random(f"{options.seed}:{clip.clip_id}:balance")
        keep = set(rng.sample(absent, min(len(absent), max(1, len(active)))))
        classes = [c for c in classes if c in active or c in keep]
    items = []
    for c in classes:
        label = vocab.label(c)
        items.append(
            _make_item(clip, "I", slugify(label), Answer.yes(c in active), options,
                       fmt={"label": label, "a_label": with_article(label)}, required_terms=(label,))
        )
    return items


def gen_type2(clip: Clip, vocab: ClassVocabulary, tol: StaticTolerances = StaticTolerances(),
              options: QaOptions = QaOptions(), appearances=None) -> QaItem:
    apps = _appearances(clip, tol, appearances)
    return _make_item(clip, "II", "active", Answer.class_set(_by_onset(apps)), options)


def gen_type3(clip: Clip, vocab: ClassVocabulary, tol: StaticTolerances = StaticTolerances(),
              options: QaOptions = QaOptions(), appearances=None) -> list[QaItem]:
    apps = _appearances(clip, tol, appearances)
    items = [
        _make_item(clip, "III", "stationary",
                   Answer.class_set(_by_onset([a for a in apps if not a.is_moving])), options),
        _make_item(clip, "III", "moving",
                   Answer.class_set(_by_onset([a for a in apps if a.is_moving])), options),
    ]
    if apps:
        for subtype, _, _ in _EXTREMES:
            attr, take_max = extreme_direction(subtype, options.azimuth_convention)
            winner = _sorted_by(apps, attr, descending=take_max)[0]
            items.append(_make_item(clip, "III", subtype, Answer.ranking([winner]), options))
    return items


def gen_type4(clip: Clip, vocab: ClassVocabulary, tol: StaticTolerances = StaticTolerances(),
              options: QaOptions = QaOptions(), appearances=None) -> list[QaItem]:
    apps = _appearances(clip, tol, appearances)
    if len(apps) < 2:
        return []
    items = []
    for dim, attr in (("azimuth", "azimuth_deg"), ("elevation", "elevation_deg"), ("distance", "distance_cm")):
        for suffix, descending in (("asc", False), ("desc", True)):
            order = _sorted_by(apps, attr, descending)
            items.append(_make_item(clip, "IV", f"{dim}_{suffix}", Answer.ranking(order), options))
    return items


def gen_type5(clip: Clip, vocab: ClassVocabulary, tol: StaticTolerances = StaticTolerances(),
              options: QaOptions = QaOptions(), appearances=None) -> Optional[QaItem]:
    apps = _appearances(clip, tol, appearances)
    if len(apps) < 2:
        return None
    return _make_item(clip, "V", "onset", Answer.ranking(_by_onset(apps)), options)


def generate_clip_qa(
    clip: Clip,
    vocab: ClassVocabulary,
    tol: StaticTolerances = StaticTolerances(),
    options: QaOptions = QaOptions(),
    instances: Optional[Sequence[EventInstance]] = None,
) -> list[QaItem]:
    """All QA items for one clip, ordered by (qtype, subtype)."""
    apps = first_appearances(clip, tol, instances)
    items = gen_type1(clip, vocab, tol, options, apps)
    items.append(gen_type2(clip, vocab, tol, options, apps))
    items.extend(gen_type3(clip, vocab, tol, options, apps))
    items.extend(gen_type4(clip, vocab, tol, options, apps))
    t5 = gen_type5(clip, vocab, tol, options, apps)
    if t5 is not None:
        items.append(t5)
    return sorted(items, key=lambda it: (it.clip_id, it.qtype, it.subtype))

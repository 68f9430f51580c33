import pytest
from hypothesis import given
from hypothesis import strategies as st

from spatialqa.scene_model import (
    AnnotationError,
    ClassVocabulary,
    Clip,
    FrameAnnotation,
    RangeError,
    StaticTolerances,
    VocabularyError,
)


def test_default_vocabulary_has_thirteen_classes(vocab):
    assert vocab.N == 13
    assert vocab.label(1) == "man speaking"
    assert vocab.index("footsteps") == 6


@given(st.lists(st.text(min_size=1).map(str.strip).filter(lambda s: s and "\n" not in s and "\r" not in s),
                min_size=1, max_size=20, unique=True))
def test_vocabulary_file_round_trip(labels):
    labels = [lab for lab in labels if all(ch.isprintable() for ch in lab)]
    if not labels:
        return
    vocab = ClassVocabulary(labels)
    assert ClassVocabulary.loads(vocab.dumps()) == vocab


def test_vocabulary_file_with_comments(tmp_path):
    path = tmp_path / "vocab.txt"
    path.write_text("# classes\n1,dog\n0,cat\n\n")
    assert ClassVocabulary.load(path).labels == ("cat", "dog")


@pytest.mark.parametrize("text", ["0,a\n0,b\n", "0,a\n2,b\n", "x,a\n", "0 a\n"])
def test_bad_vocabulary_files(text):
    with pytest.raises(VocabularyError):
        ClassVocabulary.loads(text)


def test_vocabulary_rejects_duplicates_and_empty():
    with pytest.raises(VocabularyError):
        ClassVocabulary(["a", "a"])
    with pytest.raises(VocabularyError):
        ClassVocabulary(["a", ""])


@pytest.mark.parametrize(
    "row",
    [
        (0, 0, 0, 180, 0, 0),
        (0, 0, 0, -181, 0, 0),
        (0, 0, 0, 0, 91, 0),
        (0, 0, 0, 0, -91, 0),
        (0, 0, 0, 0, 0, -1),
        (-1, 0, 0, 0, 0, 0),
    ],
)
def test_frame_annotation_ranges(row):
    with pytest.raises(AnnotationError):
        FrameAnnotation(*row)


def test_frame_annotation_accepts_boundaries():
    FrameAnnotation(0, 0, 0, -180, -90, 0)
    FrameAnnotation(0, 0, 0, 179, 90, 5000)


def test_clip_rejects_out_of_range_and_duplicate_frames():
    with pytest.raises(RangeError):
        Clip("c", "r", 0, 10, [FrameAnnotation(10, 0, 0, 0, 0, 0)])
    with pytest.raises(AnnotationError):
        Clip("c", "r", 0, 10, [FrameAnnotation(1, 0, 0, 0, 0, 0), FrameAnnotation(1, 0, 0, 5, 0, 0)])
    with pytest.raises(RangeError):
        Clip("c", "r", 0, 101, [])


def test_tolerances_non_negative():
    with pytest.raises(ValueError):
        StaticTolerances(azimuth_deg=-1)

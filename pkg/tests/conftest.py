import sys
from pathlib import Path

import pytest

from spatialqa.scene_model import ClassVocabulary, Clip, FrameAnnotation

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def vocab():
    return ClassVocabulary.default()


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def make_clip(rows, clip_id="t_clip000", length=100):
    """Build a clip from ``(frame, class, source, az, el, dist)`` tuples."""
    frames = [FrameAnnotation(*r) for r in rows]
    return Clip(clip_id, clip_id.rsplit("_clip", 1)[0], 0, length, frames)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(module, "VERDICTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

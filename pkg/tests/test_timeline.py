"""SVG timeline rendering: element counts, styling, determinism."""

import json
from pathlib import Path

import pytest

from signscribe.timeline import TimelineError, render_timeline

FIXTURE = Path(__file__).parent / "data" / "doc_fixture.json"
GOLDEN = Path(__file__).parent / "data" / "golden_timeline.svg"


@pytest.fixture(scope="module")
def fixture_doc():
    return json.loads(FIXTURE.read_text(encoding="utf-8"))


class TestRenderTimeline:
    def test_element_counts(self, fixture_doc):
        # Fixture candidate 1 has 2 fingerspelled words and 3 glosses.
        svg = render_timeline(fixture_doc, rank=1)
        assert svg.count('class="fs-region"') == 2
        assert svg.count('class="gloss-track"') == 3

    def test_label_styling(self, fixture_doc):
        svg = render_timeline(fixture_doc, rank=1)
        assert 'class="label-invocab"' in svg
        assert 'class="label-oov"' in svg
        assert "(fs)" in svg

    def test_empty_candidate_axes_only(self, fixture_doc):
        svg = render_timeline(fixture_doc, rank=2)
        assert svg.count('class="fs-region"') == 0
        assert svg.count('class="gloss-track"') == 0
        assert "<svg" in svg and "</svg>" in svg

    def test_unknown_rank(self, fixture_doc):
        with pytest.raises(TimelineError):
            render_timeline(fixture_doc, rank=99)

    def test_deterministic(self, fixture_doc):
        assert render_timeline(fixture_doc, rank=1) == render_timeline(fixture_doc, rank=1)

    def test_matches_golden_file(self, fixture_doc):
        assert render_timeline(fixture_doc, rank=1) == GOLDEN.read_text(encoding="utf-8")

    def test_escapes_markup(self, fixture_doc):
        doc = json.loads(json.dumps(fixture_doc))
        doc["video_id"] = "<evil>"
        svg = render_timeline(doc, rank=1)
        assert "<evil>" not in svg
        assert "&lt;evil&gt;" in svg

"""SVG timeline rendering of one ranked candidate's alignments.

Gray rectangles mark fingerspelled regions (first-to-last letter spans);
each gloss gets a score polyline over its interval and a label styled by
vocabulary membership (filled when in-vocabulary, outlined otherwise).
Fingerspelled labels carry an "(fs)" suffix. The output is plain,
deterministic SVG text suitable for golden-file comparison.
"""

from __future__ import annotations

WIDTH = 900
MARGIN_LEFT = 60
MARGIN_RIGHT = 24
TRACK_TOP = 36
TRACK_HEIGHT = 240
LABEL_BAND = 70
HEIGHT = TRACK_TOP + TRACK_HEIGHT + LABEL_BAND

PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#17becf", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
)
GRAY = "#c8c8c8"
IN_VOCAB_FILL = "#b4e6b4"


class TimelineError(ValueError):
    pass


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def render_timeline(doc: dict, rank: int) -> str:
    """Render the candidate with the given rank from a document dict."""
    matches = [c for c in doc.get("candidates", []) if c.get("rank") == rank]
    if not matches:
        raise TimelineError(f"no candidate with rank {rank}")
    candidate = matches[0]
    signs = candidate["per_sign"]

    last_frame = 10
    for s in signs:
        last_frame = max(last_frame, int(s["interval"][1]) + 1)
    span_x = WIDTH - MARGIN_LEFT - MARGIN_RIGHT

    def x_of(frame: float) -> float:
        return MARGIN_LEFT + span_x * frame / last_frame

    def y_of(score: float) -> float:
        return TRACK_TOP + TRACK_HEIGHT * (1.0 - score)

    parts: list[str] = []
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">'
    )
    parts.append(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>')
    title = f"{doc.get('video_id', '')} rank {rank}: {candidate.get('gloss', '')}"
    parts.append(f'<text x="{MARGIN_LEFT}" y="18" font-size="13">{_escape(title)}</text>')

    # axes
    x0, x1 = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    y0, y1 = TRACK_TOP, TRACK_TOP + TRACK_HEIGHT
    parts.append(f'<line x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}" stroke="#333333"/>')
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="#333333"/>')
    for level in (0.0, 0.5, 1.0):
        y = y_of(level)
        parts.append(
            f'<text x="{x0 - 34}" y="{_fmt(y + 4)}" fill="#333333">{_fmt(level)}</text>'
        )
        parts.append(
            f'<line x1="{x0 - 4}" y1="{_fmt(y)}" x2="{x0}" y2="{_fmt(y)}" stroke="#333333"/>'
        )
    tick = max(1, last_frame // 10)
    for frame in range(0, last_frame + 1, tick):
        x = x_of(frame)
        parts.append(
            f'<line x1="{_fmt(x)}" y1="{y1}" x2="{_fmt(x)}" y2="{y1 + 4}" stroke="#333333"/>'
        )
        parts.append(
            f'<text x="{_fmt(x - 6)}" y="{y1 + 16}" fill="#333333">{frame}</text>'
        )

    # fingerspelled regions first, under the gloss tracks
    for s in signs:
        if s["kind"] != "fingerspelled":
            continue
        region = s.get("fingerspelled_region", s["interval"])
        xa, xb = x_of(region[0]), x_of(region[1] + 1)
        parts.append(
            f'<rect class="fs-region" x="{_fmt(xa)}" y="{y0}" '
            f'width="{_fmt(xb - xa)}" height="{TRACK_HEIGHT}" fill="{GRAY}"/>'
        )

    color_idx = 0
    label_y = y1 + 34
    label_toggle = 0
    for s in signs:
        xa, xb = x_of(s["interval"][0]), x_of(s["interval"][1] + 1)
        cx = (xa + xb) / 2.0
        if s["kind"] == "gloss":
            color = PALETTE[color_idx % len(PALETTE)]
            color_idx += 1
            ys = y_of(s["score"])
            points = (
                f"{_fmt(xa)},{_fmt(y_of(0.0))} {_fmt(xa)},{_fmt(ys)} "
                f"{_fmt(xb)},{_fmt(ys)} {_fmt(xb)},{_fmt(y_of(0.0))}"
            )
            parts.append(
                f'<polyline class="gloss-track" points="{points}" '
                f'fill="none" stroke="{color}" stroke-width="1.5"/>'
            )
            label = s["token"]
            klass = "label-invocab" if s.get("in_vocabulary") else "label-oov"
            box_w = 7 * len(label) + 8
            box_x = cx - box_w / 2.0
            box_y = label_y + 18 * label_toggle - 12
            if s.get("in_vocabulary"):
                style = f'fill="{IN_VOCAB_FILL}" stroke="none"'
            else:
                style = f'fill="#ffffff" stroke="{color}"'
            parts.append(
                f'<rect class="{klass}" x="{_fmt(box_x)}" y="{box_y}" '
                f'width="{box_w}" height="15" {style}/>'
            )
            parts.append(
                f'<text x="{_fmt(box_x + 4)}" y="{box_y + 11}">{_escape(label)}</text>'
            )
        else:
            label = s["token"] + " (fs)"
            parts.append(
                f'<text class="label-fs" x="{_fmt(cx - 3.5 * len(label))}" '
                f'y="{label_y + 18 * label_toggle}">{_escape(label)}</text>'
            )
        label_toggle = (label_toggle + 1) % 2
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )

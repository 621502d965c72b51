"""Gloss annotation lines: parsing, canonical rendering, stemming.

Run: python demos/01_gloss_notation.py
"""

from signscribe import parse_gloss_sequence, render, stem_normalize

LINES = [
    "fs-NEW fs-YORK SCHOOL BOOK",
    "CL:4(list) CL:1(point finger) ITEM",
    "#BANK CLOSE MORNING",
    "FS-23 ns-KIEV SPREADSHEET",
    "DAYS RUNNING HOUSES",
]

for line in LINES:
    seq = parse_gloss_sequence(line)
    print(f"input:     {line}")
    print(f"canonical: {render(seq)}")
    for tok in seq.tokens:
        extra = f" handshape={tok.handshape} motion={tok.motion!r}" if tok.handshape else ""
        print(f"  {tok.kind.value:14s} {tok.text}{extra}")
    print(f"stemmed:   {render(stem_normalize(seq))}")
    print()

# Parse errors carry a byte offset into the original line.
try:
    parse_gloss_sequence("GOOD CL:4(list")
except Exception as exc:
    print(f"malformed line -> {exc}")

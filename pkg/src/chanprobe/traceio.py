"""Trace CSV export and ingestion.

Format: header exactly ``round,channel,load``; rounds 0-based, channels
1-based, load a decimal in [0, 1]; LF line endings.  A trace must be dense:
every (round, channel) cell present exactly once.  Ingested traces carry a
single plane, so the true plane is set equal to the measured one.
"""

from __future__ import annotations

import numpy as np

from .cca import LoadMatrix
from .errors import TraceParseError

HEADER = "round,channel,load"


def trace_csv_text(matrix: LoadMatrix) -> str:
    """Measured plane as CSV text; floats use repr so ingestion round-trips."""
    lines = [HEADER]
    for t in range(matrix.rounds):
        for ch in range(1, matrix.channels + 1):
            lines.append(f"{t},{ch},{matrix.measured(t, ch)!r}")
    return "\n".join(lines) + "\n"


def write_trace(matrix: LoadMatrix, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(trace_csv_text(matrix))


def parse_trace(text: str) -> LoadMatrix:
    """Parse trace CSV text into a LoadMatrix (true plane = measured plane)."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise TraceParseError("empty trace file", line=1)
    if lines[0] != HEADER:
        raise TraceParseError(f"header must be exactly {HEADER!r}, got {lines[0]!r}", line=1)
    cells: dict[tuple[int, int], float] = {}
    for lineno, row in enumerate(lines[1:], start=2):
        parts = row.split(",")
        if len(parts) != 3:
            raise TraceParseError(f"expected 3 fields, got {len(parts)}: {row!r}", line=lineno)
        try:
            t = int(parts[0])
            ch = int(parts[1])
            load = float(parts[2])
        except ValueError:
            raise TraceParseError(f"malformed row {row!r}", line=lineno) from None
        if t < 0:
            raise TraceParseError(f"round {t} is negative", line=lineno)
        if ch < 1:
            raise TraceParseError(f"channel {ch} is not 1-based", line=lineno)
        if not 0.0 <= load <= 1.0:
            raise TraceParseError(f"load {load} outside [0, 1]", line=lineno)
        if (t, ch) in cells:
            raise TraceParseError(f"duplicate cell for round {t}, channel {ch}", line=lineno)
        cells[(t, ch)] = load
    if not cells:
        raise TraceParseError("trace has a header but no rows", line=2)
    rounds = max(t for t, _ in cells) + 1
    channels = max(ch for _, ch in cells)
    plane = np.empty((rounds, channels))
    for t in range(rounds):
        for ch in range(1, channels + 1):
            if (t, ch) not in cells:
                raise TraceParseError(f"missing cell for round {t}, channel {ch}")
            plane[t, ch - 1] = cells[(t, ch)]
    return LoadMatrix(plane.copy(), plane)


def ingest_trace(path: str) -> LoadMatrix:
    with open(path, encoding="utf-8") as fh:
        return parse_trace(fh.read())

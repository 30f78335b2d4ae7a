"""Shared grid-building helpers for the test suite."""

from __future__ import annotations

import pytest

from cpforge.segments import (
    AIR,
    GROUND,
    HEIGHT,
    SegmentGrid,
    WIDTH,
    decode_segment,
)


def flat_lines(elev: int = 2) -> list[str]:
    """Flat ground at the given elevation, everything else air."""
    lines = [AIR * WIDTH for _ in range(HEIGHT - elev)]
    lines += [GROUND * WIDTH for _ in range(elev)]
    return lines


def put(lines: list[str], r: int, c: int, ch: str) -> list[str]:
    row = lines[r]
    lines[r] = row[:c] + ch + row[c + 1 :]
    return lines


def clear_columns(lines: list[str], cols: range | list[int]) -> list[str]:
    """Turn the given columns into pure air (a gap)."""
    for c in cols:
        for r in range(HEIGHT):
            put(lines, r, c, AIR)
    return lines


def grid(lines: list[str]) -> SegmentGrid:
    return decode_segment(lines)


@pytest.fixture
def flat_grid() -> SegmentGrid:
    return grid(flat_lines(2))

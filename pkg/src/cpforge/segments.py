"""Tile-grid segment representation, text codec, features, and difficulty.

A segment is the atomic unit of level content: a fixed 14x16 grid of
tiles from a closed 7-symbol alphabet, row 0 at the top.  The text
encoding is 14 LF-terminated lines of 16 characters and is the exchange
format used by dataset records and level files.

Elevation convention: the ground elevation of a column is the number of
rows from the bottom of the grid up to and including the topmost GROUND
tile in that column, or 0 if the column holds no GROUND at all (a "gap
column").  PLATFORM tiles never count toward elevation; gaps are about
the floor.

A structure tile (PLATFORM, COIN, or ENEMY) is "floating" when it hangs
in mid-air: AIR directly beneath it and strictly above its column's
ground level.  Mid-air enemies count because an unsupported enemy is a
defect the quality model must be able to see in the feature vector.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .errors import UnknownSymbol, WrongDimensions

HEIGHT = 14
WIDTH = 16
CELLS = HEIGHT * WIDTH

AIR = "-"
GROUND = "X"
PLATFORM = "#"
COIN = "o"
ENEMY = "E"
PIPE_TOP = "T"
PIPE_BODY = "|"

ALPHABET = frozenset((AIR, GROUND, PLATFORM, COIN, ENEMY, PIPE_TOP, PIPE_BODY))

# Difficulty scoring: weighted obstacle tally over Z, clamped to [0, 1].
# The weights are fixed; Z is the calibration knob that spreads default
# sampler output across all five bins (verified by the acceptance suite).
DIFFICULTY_WEIGHTS = {
    "gap_count": 1.0,
    "max_gap_width": 0.5,
    "enemy_count": 0.8,
    "max_elev_step": 0.3,
}
DIFFICULTY_NORM = 8.0
BIN_COUNT = 5


@dataclass(frozen=True)
class SegmentGrid:
    """An immutable 14x16 tile grid; ``rows[r][c]`` is the tile at (r, c)."""

    rows: tuple[str, ...]

    def cell(self, r: int, c: int) -> str:
        return self.rows[r][c]

    @property
    def lines(self) -> list[str]:
        return list(self.rows)


def decode_segment(text: str | list[str]) -> SegmentGrid:
    """Parse segment text (or a list of row strings) into a grid.

    Accepts exactly HEIGHT lines of WIDTH characters from the alphabet;
    a single trailing newline on string input is tolerated.
    """
    if isinstance(text, str):
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
    else:
        lines = list(text)
    if len(lines) != HEIGHT:
        raise WrongDimensions(f"expected {HEIGHT} lines, got {len(lines)}")
    for r, line in enumerate(lines):
        if len(line) != WIDTH:
            raise WrongDimensions(
                f"line {r} has {len(line)} characters, expected {WIDTH}"
            )
        for c, ch in enumerate(line):
            if ch not in ALPHABET:
                raise UnknownSymbol(r, c, ch)
    return SegmentGrid(tuple(lines))


def encode_segment(grid: SegmentGrid) -> str:
    """Render a grid as 14 LF-terminated lines; inverse of decode_segment."""
    return "".join(line + "\n" for line in grid.rows)


@dataclass(frozen=True)
class ContentFeatures:
    """Numeric description of a segment; the model and scorer input."""

    gap_count: int
    max_gap_width: int
    enemy_count: int
    coin_count: int
    platform_count: int
    pipe_count: int
    elev_start: int
    elev_end: int
    max_elev_step: int
    density: float
    floating_count: int

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def to_vector(self) -> list[float]:
        return [float(getattr(self, name)) for name in FEATURE_NAMES]

    @classmethod
    def from_dict(cls, d: dict) -> "ContentFeatures":
        return cls(**{name: d[name] for name in FEATURE_NAMES})


FEATURE_NAMES = tuple(f.name for f in fields(ContentFeatures))
FEATURE_COUNT = len(FEATURE_NAMES)


def column_elevation(grid: SegmentGrid, c: int) -> int:
    """Rows from the bottom up to and including the topmost GROUND tile."""
    for r in range(HEIGHT):
        if grid.rows[r][c] == GROUND:
            return HEIGHT - r
    return 0


def extract_features(grid: SegmentGrid) -> ContentFeatures:
    """Tally the feature vector of a segment.  Pure and total."""
    elevations = [column_elevation(grid, c) for c in range(WIDTH)]
    is_gap = [e == 0 for e in elevations]

    gap_count = 0
    max_gap_width = 0
    run = 0
    for g in is_gap + [False]:
        if g:
            run += 1
        else:
            if run > 0:
                gap_count += 1
                max_gap_width = max(max_gap_width, run)
            run = 0

    enemy_count = 0
    coin_count = 0
    platform_count = 0
    pipe_count = 0
    non_air = 0
    floating_count = 0
    for r in range(HEIGHT):
        for c in range(WIDTH):
            tile = grid.rows[r][c]
            if tile != AIR:
                non_air += 1
            if tile == ENEMY:
                enemy_count += 1
            elif tile == COIN:
                coin_count += 1
            elif tile == PLATFORM:
                platform_count += 1
            elif tile == PIPE_TOP:
                pipe_count += 1
            if tile in (PLATFORM, COIN, ENEMY):
                above_ground = (HEIGHT - r) > elevations[c]
                if r + 1 < HEIGHT and grid.rows[r + 1][c] == AIR and above_ground:
                    floating_count += 1

    max_elev_step = 0
    for c in range(WIDTH - 1):
        if not is_gap[c] and not is_gap[c + 1]:
            max_elev_step = max(max_elev_step, abs(elevations[c + 1] - elevations[c]))

    return ContentFeatures(
        gap_count=gap_count,
        max_gap_width=max_gap_width,
        enemy_count=enemy_count,
        coin_count=coin_count,
        platform_count=platform_count,
        pipe_count=pipe_count,
        elev_start=elevations[0],
        elev_end=elevations[WIDTH - 1],
        max_elev_step=max_elev_step,
        density=non_air / CELLS,
        floating_count=floating_count,
    )


def difficulty_score(f: ContentFeatures, norm: float = DIFFICULTY_NORM) -> float:
    """Scalar difficulty in [0, 1]: weighted obstacle tally over ``norm``."""
    raw = (
        DIFFICULTY_WEIGHTS["gap_count"] * f.gap_count
        + DIFFICULTY_WEIGHTS["max_gap_width"] * f.max_gap_width
        + DIFFICULTY_WEIGHTS["enemy_count"] * f.enemy_count
        + DIFFICULTY_WEIGHTS["max_elev_step"] * f.max_elev_step
    ) / norm
    return min(1.0, max(0.0, raw))


def difficulty_bin(d: float) -> int:
    """Equal-width bin index over [0, 1]: floor(d * 5) clamped to 4."""
    return min(BIN_COUNT - 1, int(d * BIN_COUNT))


@dataclass(frozen=True)
class ControlParams:
    """Optional per-feature target bands; an absent band is unconstrained.

    enemy_density is enemy_count per column (enemy_count / 16);
    gap_frequency is the segment's gap_count; difficulty is the
    difficulty_score of the segment.  Bands are closed intervals.
    """

    enemy_density_band: tuple[float, float] | None = None
    gap_frequency_band: tuple[float, float] | None = None
    difficulty_band: tuple[float, float] | None = None

    def __post_init__(self):
        for band in (
            self.enemy_density_band,
            self.gap_frequency_band,
            self.difficulty_band,
        ):
            if band is not None and band[0] > band[1]:
                raise ValueError(f"band lo > hi: {band}")

    def as_dict(self) -> dict:
        return {
            "enemy_density_band": list(self.enemy_density_band)
            if self.enemy_density_band
            else None,
            "gap_frequency_band": list(self.gap_frequency_band)
            if self.gap_frequency_band
            else None,
            "difficulty_band": list(self.difficulty_band)
            if self.difficulty_band
            else None,
        }

    @classmethod
    def from_dict(cls, d: dict | None) -> "ControlParams":
        if not d:
            return cls()

        def band(key):
            v = d.get(key)
            return (float(v[0]), float(v[1])) if v else None

        return cls(
            enemy_density_band=band("enemy_density_band"),
            gap_frequency_band=band("gap_frequency_band"),
            difficulty_band=band("difficulty_band"),
        )

"""Randomized constructive segment sampler.

The sampler builds syntactically valid segments that are deliberately
NOT all acceptable: a classifier can only learn the boundary between
good and bad content if both classes appear in the data.  Two defect
mechanisms are built in: each enemy floats in mid-air with probability
0.1, and gap runs may exceed the clearable width whenever max_gap > 4.

Draw order per segment (the portability contract; see rng.py for the
generator itself):

  1. elevation walk, columns 1..15: one uniform for "step?", and if it
     steps one uniform for direction; walk clamped to [1, 8]
  2. gap scan over the interior columns 1..14, left to right: one
     uniform per non-gap column for "start a run?", and one bounded int
     for the run length; boundary columns always keep their ground so
     the deliberate defect classes stay exactly the two listed above
  3. pipe scan over ground columns, left to right: one uniform per
     column, plus one bounded int (height 2..4) when a pipe is placed
  4. enemies: one Poisson count, then per enemy one bounded int picking
     from the not-yet-used ground columns (at most one enemy per
     column), one uniform for the float defect, and one bounded int for
     the lift height when floating
  5. coins: one Poisson count, then per coin one bounded int for the
     column; coins stack into ground-anchored pillars (at most 3 high)
     on ground columns holding no pipe and no enemy

The elevation walk continues through gap columns, so the ground can
resume at a different height after a gap.  Coins are anchored rather
than hung in the air so the floating tally stays a defect signal
instead of counting routine decoration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import ParseError
from .rng import Rng, sub_seed
from .segments import (
    AIR,
    COIN,
    ContentFeatures,
    ENEMY,
    GROUND,
    HEIGHT,
    PIPE_BODY,
    PIPE_TOP,
    SegmentGrid,
    WIDTH,
    extract_features,
)

ELEV_MIN = 1
ELEV_MAX = 8
FLOATING_ENEMY_PROB = 0.1
PIPE_HEIGHT_RANGE = (2, 4)
COIN_PILLAR_MAX = 3
ENEMY_LIFT_RANGE = (1, 3)


@dataclass(frozen=True)
class SamplerParams:
    gap_prob: float = 0.08
    max_gap: int = 5
    enemy_rate: float = 1.5
    coin_rate: float = 1.5
    pipe_prob: float = 0.05
    elev_step_prob: float = 0.25
    base_elev: int = 4
    seed: int = 0

    def __post_init__(self):
        for name in ("gap_prob", "pipe_prob", "elev_step_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if not 1 <= self.max_gap <= 8:
            raise ValueError(f"max_gap must be in [1, 8], got {self.max_gap}")
        if not 1 <= self.base_elev <= 6:
            raise ValueError(f"base_elev must be in [1, 6], got {self.base_elev}")
        if self.enemy_rate < 0 or self.coin_rate < 0:
            raise ValueError("rates must be non-negative")

    def as_dict(self) -> dict:
        return {
            "gap_prob": self.gap_prob,
            "max_gap": self.max_gap,
            "enemy_rate": self.enemy_rate,
            "coin_rate": self.coin_rate,
            "pipe_prob": self.pipe_prob,
            "elev_step_prob": self.elev_step_prob,
            "base_elev": self.base_elev,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SamplerParams":
        return cls(**d)


def sample_segment(p: SamplerParams, rng: Rng) -> SegmentGrid:
    """Draw one segment; see the module docstring for the construction."""
    elev = [p.base_elev]
    for _ in range(1, WIDTH):
        e = elev[-1]
        if rng.random() < p.elev_step_prob:
            e += 1 if rng.random() < 0.5 else -1
            e = max(ELEV_MIN, min(ELEV_MAX, e))
        elev.append(e)

    is_gap = [False] * WIDTH
    c = 1
    while c < WIDTH - 1:
        if rng.random() < p.gap_prob:
            run = rng.randint(1, p.max_gap)
            for g in range(c, min(WIDTH - 1, c + run)):
                is_gap[g] = True
            c += run
        else:
            c += 1

    cells = [[AIR] * WIDTH for _ in range(HEIGHT)]
    for c in range(WIDTH):
        if not is_gap[c]:
            for r in range(HEIGHT - elev[c], HEIGHT):
                cells[r][c] = GROUND

    pipe_cols = set()
    for c in range(WIDTH):
        if is_gap[c]:
            continue
        if rng.random() < p.pipe_prob:
            h = rng.randint(*PIPE_HEIGHT_RANGE)
            top = HEIGHT - elev[c] - h
            cells[top][c] = PIPE_TOP
            for r in range(top + 1, HEIGHT - elev[c]):
                cells[r][c] = PIPE_BODY
            pipe_cols.add(c)

    ground_cols = [c for c in range(WIDTH) if not is_gap[c] and c not in pipe_cols]
    open_cols = list(ground_cols)
    enemy_cols = set()
    for _ in range(rng.poisson(p.enemy_rate)):
        if not open_cols:
            break
        c = open_cols.pop(rng.randint(0, len(open_cols) - 1))
        r = HEIGHT - elev[c] - 1
        if rng.random() < FLOATING_ENEMY_PROB:
            r -= rng.randint(*ENEMY_LIFT_RANGE)
        if r >= 0 and cells[r][c] == AIR:
            cells[r][c] = ENEMY
            enemy_cols.add(c)

    coin_cols = [c for c in ground_cols if c not in enemy_cols]
    for _ in range(rng.poisson(p.coin_rate)):
        if not coin_cols:
            break
        c = coin_cols[rng.randint(0, len(coin_cols) - 1)]
        surface = HEIGHT - elev[c] - 1
        for h in range(COIN_PILLAR_MAX):
            r = surface - h
            if r < 0 or cells[r][c] not in (AIR, COIN):
                break
            if cells[r][c] == AIR:
                cells[r][c] = COIN
                break

    return SegmentGrid(tuple("".join(row) for row in cells))


@dataclass(frozen=True)
class DatasetRecord:
    id: int
    grid: SegmentGrid
    features: ContentFeatures


def sample_dataset(count: int, p: SamplerParams) -> list[DatasetRecord]:
    """Sample ``count`` segments with stable sequential ids.

    Segment ``i`` is drawn from its own stream seeded by
    ``sub_seed(p.seed, i)``, so the dataset is a pure function of
    (count, params) and ids may be generated in any order or in
    parallel without changing the result.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    records = []
    for i in range(count):
        grid = sample_segment(p, Rng(sub_seed(p.seed, i)))
        records.append(DatasetRecord(id=i, grid=grid, features=extract_features(grid)))
    return records


def record_to_json(rec: DatasetRecord) -> str:
    obj = {
        "id": rec.id,
        "grid": rec.grid.lines,
        "features": rec.features.as_dict(),
    }
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def record_from_json(line: str) -> DatasetRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad dataset record: {exc}") from exc
    for key in ("id", "grid", "features"):
        if key not in obj:
            raise ParseError(f"dataset record missing field {key!r}")
    from .segments import decode_segment

    return DatasetRecord(
        id=int(obj["id"]),
        grid=decode_segment(obj["grid"]),
        features=ContentFeatures.from_dict(obj["features"]),
    )


def write_dataset(records: list[DatasetRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(record_to_json(rec) + "\n")


def read_dataset(path) -> list[DatasetRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(record_from_json(line))
    return records

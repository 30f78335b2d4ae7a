"""Online level assembly from constructive primitives.

A level is an ordered chain of CPs.  Control bands filter the candidate
pool per segment (hard filters, not soft averages), and adjacent
segments must meet with a floor step of at most BOUNDARY_TOLERANCE
tiles so every seam stays walkable or jumpable.  Assembly is greedy
with bounded backtracking; a failure is reported, never papered over
by mutating a segment (mutation would void its quality verdict).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import AssemblyFailed, InsufficientCPs, ParseError
from .pipeline import CP, CPSet, generate_cps
from .quality import QualityModel
from .rng import Rng, sub_seed
from .sampler import SamplerParams
from .segments import (
    ControlParams,
    ContentFeatures,
    FEATURE_NAMES,
    SegmentGrid,
    WIDTH,
    decode_segment,
    difficulty_score,
    encode_segment,
    extract_features,
)

BOUNDARY_TOLERANCE = 2
MAX_ASSEMBLY_ATTEMPTS = 1000
MAX_BACKTRACK = 3
SEGMENT_DELIMITER = "---"


def matches_control(f: ContentFeatures, c: ControlParams) -> bool:
    """True iff every present band contains its derived quantity."""
    if c.enemy_density_band is not None:
        lo, hi = c.enemy_density_band
        if not lo <= f.enemy_count / WIDTH <= hi:
            return False
    if c.gap_frequency_band is not None:
        lo, hi = c.gap_frequency_band
        if not lo <= f.gap_count <= hi:
            return False
    if c.difficulty_band is not None:
        lo, hi = c.difficulty_band
        if not lo <= difficulty_score(f) <= hi:
            return False
    return True


def compatible(a: SegmentGrid, b: SegmentGrid) -> bool:
    """Adjacent-boundary check: floor heights at the seam differ by <= 2."""
    return (
        abs(extract_features(a).elev_end - extract_features(b).elev_start)
        <= BOUNDARY_TOLERANCE
    )


@dataclass
class Level:
    segments: list[SegmentGrid]
    seed: int
    control: ControlParams
    difficulties: list[float]
    mean_features: dict[str, float]
    theta: float
    model_id: str


def generate_level(
    source: CPSet | tuple[QualityModel, SamplerParams],
    length: int,
    control: ControlParams = ControlParams(),
    seed: int = 0,
    theta: float = 0.5,
) -> Level:
    """Assemble a level of ``length`` segments.

    ``source`` is a prebuilt CPSet, or (model, sampler_params) for
    on-the-fly generate-and-test (a working pool is generated first).
    Greedy left-to-right: the first segment is drawn uniformly from the
    control-matching pool, each next uniformly from the candidates
    compatible with its predecessor.  Dead ends backtrack at most
    MAX_BACKTRACK consecutive positions; MAX_ASSEMBLY_ATTEMPTS total
    placements bound the whole search.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    if isinstance(source, CPSet):
        cpset = source
    else:
        model, params = source
        cpset = generate_cps(
            model, max(4 * length, 64), params, theta=theta
        )

    pool = [cp for cp in cpset.cps if matches_control(cp.features, control)]
    if not pool:
        raise InsufficientCPs("no CPs match the control parameters")

    rng = Rng(sub_seed(seed, 0))
    chosen: list[int] = []
    tried: list[set[int]] = [set()]
    attempts = 0
    consecutive_backtracks = 0
    while len(chosen) < length:
        pos = len(chosen)
        if pos == len(tried):
            tried.append(set())
        prev = pool[chosen[-1]] if chosen else None
        cands = [
            i
            for i in range(len(pool))
            if i not in tried[pos]
            and (prev is None or _seam_ok(prev, pool[i]))
        ]
        if cands:
            if attempts >= MAX_ASSEMBLY_ATTEMPTS:
                raise AssemblyFailed(
                    f"no valid chain after {MAX_ASSEMBLY_ATTEMPTS} placements"
                )
            attempts += 1
            pick = cands[rng.randint(0, len(cands) - 1)]
            tried[pos].add(pick)
            chosen.append(pick)
            consecutive_backtracks = 0
        else:
            if pos == 0:
                raise AssemblyFailed("every pool member fails as a level start")
            consecutive_backtracks += 1
            if consecutive_backtracks > MAX_BACKTRACK:
                raise AssemblyFailed(
                    f"dead end persisted through {MAX_BACKTRACK} backtracks"
                )
            tried[pos].clear()
            chosen.pop()

    picked = [pool[i] for i in chosen]
    mean_vec = np.mean([cp.features.to_vector() for cp in picked], axis=0)
    return Level(
        segments=[cp.grid for cp in picked],
        seed=seed,
        control=control,
        difficulties=[cp.d for cp in picked],
        mean_features={n: float(v) for n, v in zip(FEATURE_NAMES, mean_vec)},
        theta=cpset.theta,
        model_id=cpset.model_id,
    )


def _seam_ok(a: CP, b: CP) -> bool:
    return abs(a.features.elev_end - b.features.elev_start) <= BOUNDARY_TOLERANCE


def write_level(level: Level, path) -> None:
    header = {
        "kind": "level",
        "format_version": 1,
        "seed": level.seed,
        "length": len(level.segments),
        "control": level.control.as_dict(),
        "difficulties": level.difficulties,
        "mean_features": level.mean_features,
        "theta": level.theta,
        "model_id": level.model_id,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n")
        for seg in level.segments:
            fh.write(SEGMENT_DELIMITER + "\n")
            fh.write(encode_segment(seg))


def read_level(path) -> Level:
    """Parse a level file.  Reading is lenient about content quality;
    use validate_level for invariant checking."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if not lines or not lines[0].strip():
        raise ParseError(f"{path}: missing header")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: bad header: {exc}") from exc
    if header.get("kind") != "level":
        raise ParseError(f"{path}: not a level file")
    for key in ("seed", "length", "control"):
        if key not in header:
            raise ParseError(f"{path}: header missing {key!r}")

    segments = []
    block: list[str] = []
    for ln in lines[1:]:
        if ln == SEGMENT_DELIMITER:
            if block:
                segments.append(decode_segment(block))
                block = []
        elif ln:
            block.append(ln)
    if block:
        segments.append(decode_segment(block))
    if len(segments) != int(header["length"]):
        raise ParseError(
            f"{path}: header says {header['length']} segments, found {len(segments)}"
        )
    return Level(
        segments=segments,
        seed=int(header["seed"]),
        control=ControlParams.from_dict(header["control"]),
        difficulties=[float(d) for d in header.get("difficulties", [])],
        mean_features=dict(header.get("mean_features", {})),
        theta=float(header.get("theta", 0.5)),
        model_id=str(header.get("model_id", "")),
    )


def validate_level(
    level: Level, model: QualityModel | None = None, theta: float | None = None
) -> list[str]:
    """Re-derive every level invariant from the grids alone; returns a
    list of human-readable violations (empty means clean)."""
    from .pipeline import is_cp, rule_filter
    from .segments import difficulty_score as dscore

    problems = []
    feats = [extract_features(seg) for seg in level.segments]
    for i, seg in enumerate(level.segments):
        verdict = rule_filter(seg)
        if not verdict.passed:
            problems.append(f"segment {i}: rule violations {list(verdict.violations)}")
        if not matches_control(feats[i], level.control):
            problems.append(f"segment {i}: outside control bands")
        if level.difficulties and abs(dscore(feats[i]) - level.difficulties[i]) > 1e-9:
            problems.append(f"segment {i}: recorded difficulty mismatch")
        if model is not None and not is_cp(
            model, seg, level.theta if theta is None else theta
        ):
            problems.append(f"segment {i}: not a CP under the supplied model")
    for i in range(len(level.segments) - 1):
        if abs(feats[i].elev_end - feats[i + 1].elev_start) > BOUNDARY_TOLERANCE:
            problems.append(f"boundary {i}->{i + 1}: floor step too large")
    return problems

"""Two-stage quality gate and CP-set generation.

Stage one is a rule filter: six cheap structural checks (R1-R6) that
throw out obviously broken segments.  Stage two is the learned
classifier, consulted only for segments that survive the rules; the
generator counts classifier calls so this contract is observable.
Survivors are constructive primitives (CPs), deduplicated and organized
into five equal-width difficulty bins.

The jump model behind R5: a player standing on a support tile can cross
at most JUMP_SPAN consecutive unsupported columns (so a landing at most
JUMP_SPAN + 1 columns away) and can rise at most JUMP_HEIGHT tiles in
one hop; drops are unbounded.  Reachability is breadth-first search
over standable cells from the left edge to the right edge.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

from .errors import ParseError, YieldTooLow
from .quality import QualityModel, predict
from .rng import Rng, sub_seed
from .sampler import SamplerParams, sample_segment
from .segments import (
    AIR,
    BIN_COUNT,
    COIN,
    ContentFeatures,
    ENEMY,
    GROUND,
    HEIGHT,
    PIPE_BODY,
    PIPE_TOP,
    PLATFORM,
    SegmentGrid,
    WIDTH,
    column_elevation,
    decode_segment,
    difficulty_bin,
    difficulty_score,
    extract_features,
)

R1_MAX_GAP = "R1_MAX_GAP"
R2_FLOATING_ENEMY = "R2_FLOATING_ENEMY"
R3_PIPE_INTEGRITY = "R3_PIPE_INTEGRITY"
R4_BOUNDARY_GROUND = "R4_BOUNDARY_GROUND"
R5_UNREACHABLE = "R5_UNREACHABLE"
R6_EMBEDDED_ITEM = "R6_EMBEDDED_ITEM"
RULE_IDS = (
    R1_MAX_GAP,
    R2_FLOATING_ENEMY,
    R3_PIPE_INTEGRITY,
    R4_BOUNDARY_GROUND,
    R5_UNREACHABLE,
    R6_EMBEDDED_ITEM,
)

MAX_CLEARABLE_GAP = 4
JUMP_SPAN = 4  # unsupported columns crossable in one hop
JUMP_HEIGHT = 4  # max rise in tiles per hop

SUPPORT_TILES = frozenset((GROUND, PLATFORM, PIPE_TOP, PIPE_BODY))
PASSABLE_TILES = frozenset((AIR, COIN, ENEMY))


@dataclass(frozen=True)
class RuleVerdict:
    passed: bool
    violations: tuple[str, ...]


def standable_cells(grid: SegmentGrid) -> list[tuple[int, int]]:
    """Cells a player can occupy: passable, with a support tile beneath."""
    out = []
    for c in range(WIDTH):
        for r in range(HEIGHT - 1):
            if grid.rows[r][c] in PASSABLE_TILES and grid.rows[r + 1][c] in SUPPORT_TILES:
                out.append((r, c))
    return out


def reachable_left_to_right(grid: SegmentGrid) -> bool:
    """BFS over the jump graph from any standable cell in column 0 to any
    in column 15."""
    cells = standable_cells(grid)
    cell_set = set(cells)
    starts = [(r, c) for (r, c) in cells if c == 0]
    if not starts:
        return False
    seen = set(starts)
    queue = deque(starts)
    while queue:
        r, c = queue.popleft()
        if c == WIDTH - 1:
            return True
        for c2 in range(max(0, c - JUMP_SPAN - 1), min(WIDTH, c + JUMP_SPAN + 2)):
            if c2 == c:
                continue
            for r2 in range(HEIGHT - 1):
                if (r2, c2) in seen or (r2, c2) not in cell_set:
                    continue
                if r - r2 <= JUMP_HEIGHT:  # rise bounded; drops unlimited
                    seen.add((r2, c2))
                    queue.append((r2, c2))
    return False


def rule_filter(g: SegmentGrid) -> RuleVerdict:
    """Evaluate all six rules; the verdict lists every violated rule."""
    violations = []
    feats = extract_features(g)
    elevations = [column_elevation(g, c) for c in range(WIDTH)]

    if feats.max_gap_width > MAX_CLEARABLE_GAP:
        violations.append(R1_MAX_GAP)

    floating_enemy = False
    for r in range(HEIGHT):
        for c in range(WIDTH):
            if g.rows[r][c] == ENEMY:
                if r + 1 >= HEIGHT or g.rows[r + 1][c] not in (GROUND, PLATFORM):
                    floating_enemy = True
    if floating_enemy:
        violations.append(R2_FLOATING_ENEMY)

    if not _pipes_intact(g):
        violations.append(R3_PIPE_INTEGRITY)

    if elevations[0] == 0 or elevations[WIDTH - 1] == 0:
        violations.append(R4_BOUNDARY_GROUND)

    if not reachable_left_to_right(g):
        violations.append(R5_UNREACHABLE)

    embedded = False
    for r in range(HEIGHT):
        for c in range(WIDTH):
            if g.rows[r][c] == COIN and (HEIGHT - r) <= elevations[c]:
                embedded = True
    if embedded:
        violations.append(R6_EMBEDDED_ITEM)

    return RuleVerdict(passed=not violations, violations=tuple(violations))


def _pipes_intact(g: SegmentGrid) -> bool:
    """Every PIPE_TOP continues as PIPE_BODY down to GROUND, and every
    PIPE_BODY hangs from a pipe tile above it."""
    for c in range(WIDTH):
        for r in range(HEIGHT):
            tile = g.rows[r][c]
            if tile == PIPE_TOP:
                rr = r + 1
                while rr < HEIGHT and g.rows[rr][c] == PIPE_BODY:
                    rr += 1
                if rr >= HEIGHT or g.rows[rr][c] != GROUND:
                    return False
            elif tile == PIPE_BODY:
                if r == 0 or g.rows[r - 1][c] not in (PIPE_TOP, PIPE_BODY):
                    return False
    return True


def is_cp(m: QualityModel, g: SegmentGrid, theta: float = 0.5) -> bool:
    """Rules first, classifier second; p == theta counts as passing."""
    if not rule_filter(g).passed:
        return False
    return predict(m, extract_features(g)) >= theta


@dataclass(frozen=True)
class CP:
    grid: SegmentGrid
    features: ContentFeatures
    p: float
    d: float
    bin: int


@dataclass
class CPSet:
    cps: list[CP]
    theta: float
    model_id: str
    seed: int
    stats: dict

    def by_bin(self, b: int) -> list[CP]:
        return [cp for cp in self.cps if cp.bin == b]

    def bins_populated(self) -> list[bool]:
        present = {cp.bin for cp in self.cps}
        return [b in present for b in range(BIN_COUNT)]


def model_fingerprint(m: QualityModel) -> str:
    """Short stable id for provenance headers."""
    import hashlib

    h = hashlib.sha256()
    for v in list(m.weights) + [m.bias] + list(m.standardization.mean) + list(
        m.standardization.std
    ):
        h.update(f"{v:.17g};".encode())
    return h.hexdigest()[:12]


def generate_cps(
    m: QualityModel,
    target_count: int,
    sampler_params: SamplerParams,
    theta: float = 0.5,
    max_attempts: int | None = None,
) -> CPSet:
    """Generate-and-test until ``target_count`` distinct CPs are kept.

    Attempt i draws from stream sub_seed(params.seed, i), so the kept
    set is a pure function of (model, params, theta, target, cap).
    Raises YieldTooLow (with the partial set attached) if the attempt
    budget runs out first.
    """
    if target_count < 1:
        raise ValueError("target_count must be >= 1")
    if max_attempts is None:
        max_attempts = 50 * target_count
    if max_attempts < target_count:
        raise ValueError("max_attempts must be >= target_count")

    stats = {"attempts": 0, "rule_passes": 0, "classifier_calls": 0, "kept": 0}
    kept: list[CP] = []
    seen: set[tuple[str, ...]] = set()
    for i in range(max_attempts):
        stats["attempts"] += 1
        grid = sample_segment(sampler_params, Rng(sub_seed(sampler_params.seed, i)))
        if not rule_filter(grid).passed:
            continue
        stats["rule_passes"] += 1
        feats = extract_features(grid)
        stats["classifier_calls"] += 1
        p = predict(m, feats)
        if p < theta:
            continue
        if grid.rows in seen:
            continue
        seen.add(grid.rows)
        d = difficulty_score(feats)
        kept.append(CP(grid=grid, features=feats, p=p, d=d, bin=difficulty_bin(d)))
        if len(kept) == target_count:
            break
    stats["kept"] = len(kept)
    stats["acceptance_rate"] = stats["kept"] / stats["attempts"]
    cpset = CPSet(
        cps=kept,
        theta=theta,
        model_id=model_fingerprint(m),
        seed=sampler_params.seed,
        stats=stats,
    )
    if len(kept) < target_count:
        raise YieldTooLow(
            f"kept {len(kept)} of {target_count} after {max_attempts} attempts",
            cpset,
        )
    return cpset


def write_cpset(cpset: CPSet, path) -> None:
    header = {
        "kind": "cpset",
        "format_version": 1,
        "model_id": cpset.model_id,
        "theta": cpset.theta,
        "seed": cpset.seed,
        "count": len(cpset.cps),
        "stats": cpset.stats,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n")
        for cp in cpset.cps:
            obj = {
                "grid": cp.grid.lines,
                "features": cp.features.as_dict(),
                "p": cp.p,
                "d": cp.d,
                "bin": cp.bin,
            }
            fh.write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")


def read_cpset(path) -> CPSet:
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in (raw.strip() for raw in fh) if ln]
    if not lines:
        raise ParseError(f"{path}: empty CP-set file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: bad header: {exc}") from exc
    if header.get("kind") != "cpset":
        raise ParseError(f"{path}: not a CP-set file")
    for key in ("model_id", "theta", "seed"):
        if key not in header:
            raise ParseError(f"{path}: header missing {key!r}")
    cps = []
    for ln in lines[1:]:
        try:
            obj = json.loads(ln)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: bad record: {exc}") from exc
        cps.append(
            CP(
                grid=decode_segment(obj["grid"]),
                features=ContentFeatures.from_dict(obj["features"]),
                p=float(obj["p"]),
                d=float(obj["d"]),
                bin=int(obj["bin"]),
            )
        )
    return CPSet(
        cps=cps,
        theta=float(header["theta"]),
        model_id=str(header["model_id"]),
        seed=int(header["seed"]),
        stats=dict(header.get("stats", {})),
    )

"""Annotation loop: oracle labeling, session state, uncertainty queries.

The session is a single-writer state machine over a sampled dataset.
Cluster medoids form the seed query queue (they are labeled first and
count against the budget); afterwards each query picks the unlabeled
segment whose prediction sits closest to 0.5.  The model is retrained
from scratch after every label, which keeps results independent of any
incremental-update ordering.

A seeded holdout slice is excluded from querying and training and is
labeled by the golden oracle up front; live accuracy against it is a
progress proxy even when a human provides the training labels.

The golden oracle (version 1) accepts a segment iff all hold:
  * traversable left to right under the jump model (gaps <= 4 wide,
    rises <= 4 tiles)
  * no enemy floats in mid-air
  * every pipe is intact
  * tile density within [0.10, 0.60]
  * widest gap <= 4 columns
  * both boundary columns contain ground
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .clustering import ClusterResult
from .errors import (
    AlreadyLabeled,
    BudgetExhausted,
    BudgetTooSmall,
    PoolEmpty,
    UnknownId,
)
from .pipeline import (
    R1_MAX_GAP,
    R2_FLOATING_ENEMY,
    R3_PIPE_INTEGRITY,
    R4_BOUNDARY_GROUND,
    R5_UNREACHABLE,
    rule_filter,
)
from .quality import ACCEPT, Hyper, QualityModel, REJECT, predict_batch, train
from .rng import Rng, sub_seed
from .sampler import DatasetRecord
from .segments import SegmentGrid, extract_features

ORACLE_VERSION = 1
DENSITY_BAND = (0.10, 0.60)

MAX_GAP = "MAX_GAP"
FLOATING_ENEMY = "FLOATING_ENEMY"
PIPE_INTEGRITY = "PIPE_INTEGRITY"
BOUNDARY_GROUND = "BOUNDARY_GROUND"
UNREACHABLE = "UNREACHABLE"
DENSITY = "DENSITY"

_RULE_TO_REASON = {
    R1_MAX_GAP: MAX_GAP,
    R2_FLOATING_ENEMY: FLOATING_ENEMY,
    R3_PIPE_INTEGRITY: PIPE_INTEGRITY,
    R4_BOUNDARY_GROUND: BOUNDARY_GROUND,
    R5_UNREACHABLE: UNREACHABLE,
}


def oracle_label(g: SegmentGrid) -> tuple[str, list[str]]:
    """Deterministic stand-in for a human judge; returns (label, reasons)."""
    verdict = rule_filter(g)
    reasons = [
        _RULE_TO_REASON[v] for v in verdict.violations if v in _RULE_TO_REASON
    ]
    density = extract_features(g).density
    if not DENSITY_BAND[0] <= density <= DENSITY_BAND[1]:
        reasons.append(DENSITY)
    return (ACCEPT, []) if not reasons else (REJECT, reasons)


@dataclass
class ALSession:
    records: dict[int, DatasetRecord]
    budget: int
    seed: int
    hyper: Hyper
    labeled: dict[int, str] = field(default_factory=dict)
    unlabeled: set[int] = field(default_factory=set)
    holdout: dict[int, str] = field(default_factory=dict)
    seed_queue: list[int] = field(default_factory=list)
    model: QualityModel = field(default_factory=QualityModel.zero)
    queries_made: int = 0
    curve: list[tuple[int, float]] = field(default_factory=list)
    holdout_accuracy: float = 0.0
    _matrix: np.ndarray = field(default=None, repr=False)
    _row: dict[int, int] = field(default=None, repr=False)

    def _features_of(self, ids: list[int]) -> np.ndarray:
        if self._matrix is None:
            ordered = sorted(self.records)
            self._matrix = np.array(
                [self.records[i].features.to_vector() for i in ordered]
            )
            self._row = {i: r for r, i in enumerate(ordered)}
        return self._matrix[[self._row[i] for i in ids]]


def init_session(
    dataset: list[DatasetRecord],
    clusters: ClusterResult | list[int],
    budget: int,
    holdout_frac: float = 0.2,
    seed: int = 0,
    hyper: Hyper = Hyper(),
    strict: bool = False,
) -> ALSession:
    """Split the dataset into holdout and query pool and queue the medoids.

    The holdout is a uniform seeded sample of floor(holdout_frac * n)
    non-medoid ids, oracle-labeled immediately.  Medoids are queued as
    the first queries; with strict=True a budget below the medoid count
    raises BudgetTooSmall, otherwise only the first ``budget`` medoids
    are queued.
    """
    medoid_ids = list(
        clusters.medoid_ids if isinstance(clusters, ClusterResult) else clusters
    )
    if budget < 0:
        raise ValueError("budget must be >= 0")
    if strict and budget < len(medoid_ids):
        raise BudgetTooSmall(
            f"budget {budget} cannot seed {len(medoid_ids)} medoids"
        )

    records = {rec.id: rec for rec in dataset}
    n = len(records)
    candidates = sorted(set(records) - set(medoid_ids))
    rng = Rng(sub_seed(seed, 0))
    rng.shuffle(candidates)
    holdout_ids = sorted(candidates[: int(holdout_frac * n)])

    session = ALSession(
        records=records,
        budget=budget,
        seed=seed,
        hyper=hyper,
        unlabeled=set(records) - set(holdout_ids),
        holdout={i: oracle_label(records[i].grid)[0] for i in holdout_ids},
        seed_queue=medoid_ids[:budget] if budget < len(medoid_ids) else medoid_ids,
    )
    _refresh_holdout_accuracy(session)
    return session


def next_query(s: ALSession) -> int:
    """The id to annotate next; pure.

    Seed-queue medoids go first; afterwards the pick maximizes model
    uncertainty (prediction nearest 0.5), lowest id on ties.
    """
    if s.queries_made >= s.budget:
        raise BudgetExhausted(f"budget {s.budget} spent")
    queued = [i for i in s.seed_queue if i in s.unlabeled]
    if queued:
        return queued[0]
    if not s.unlabeled:
        raise PoolEmpty("no unlabeled segments remain")
    ids = sorted(s.unlabeled)
    p = predict_batch(s.model, s._features_of(ids))
    return ids[int(np.argmin(np.abs(p - 0.5)))]  # max uncertainty, lowest id on ties


def submit_label(s: ALSession, segment_id: int, label: str) -> ALSession:
    """Record one annotation, retrain from scratch, refresh metrics."""
    if label not in (ACCEPT, REJECT):
        raise ValueError(f"label must be {ACCEPT!r} or {REJECT!r}")
    if s.queries_made >= s.budget:
        raise BudgetExhausted(f"budget {s.budget} spent")
    if segment_id in s.labeled:
        raise AlreadyLabeled(f"segment {segment_id} already labeled")
    if segment_id not in s.unlabeled:
        raise UnknownId(f"segment {segment_id} not in the query pool")

    s.unlabeled.remove(segment_id)
    s.labeled[segment_id] = label
    s.queries_made += 1

    labels = set(s.labeled.values())
    if len(labels) == 2:
        pairs = [
            (s.records[i].features, s.labeled[i]) for i in sorted(s.labeled)
        ]
        s.model = train(pairs, s.hyper)
    _refresh_holdout_accuracy(s)
    if not any(i in s.unlabeled for i in s.seed_queue):
        s.curve.append((s.queries_made, s.holdout_accuracy))
    return s


def _refresh_holdout_accuracy(s: ALSession) -> None:
    if not s.holdout:
        s.holdout_accuracy = 0.0
        return
    ids = sorted(s.holdout)
    p = predict_batch(s.model, s._features_of(ids))
    predicted = np.where(p >= 0.5, ACCEPT, REJECT)
    actual = np.array([s.holdout[i] for i in ids])
    s.holdout_accuracy = float((predicted == actual).mean())


def write_labeled_set(s: ALSession, path, source: str) -> None:
    """Labeled-set file: dataset record fields plus {label, source}."""
    import json

    from .sampler import record_to_json

    if source not in ("human", "oracle"):
        raise ValueError("source must be 'human' or 'oracle'")
    with open(path, "w", encoding="utf-8") as fh:
        for segment_id in sorted(s.labeled):
            base = json.loads(record_to_json(s.records[segment_id]))
            base["label"] = s.labeled[segment_id]
            base["source"] = source
            fh.write(json.dumps(base, sort_keys=True, separators=(",", ":")) + "\n")


def read_labeled_set(path) -> list[tuple[DatasetRecord, str]]:
    import json

    from .errors import ParseError
    from .sampler import record_from_json

    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = record_from_json(line)
            label = json.loads(line).get("label")
            if label not in (ACCEPT, REJECT):
                raise ParseError(f"bad label {label!r} in {path}")
            out.append((rec, label))
    return out


def write_curve(curve: list[tuple[int, float]], path) -> None:
    """Learning-curve file: one (queries, holdout accuracy) row per query."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("queries,accuracy\n")
        for queries, accuracy in curve:
            fh.write(f"{queries},{accuracy!r}\n")


def run_with_oracle(
    dataset: list[DatasetRecord],
    clusters: ClusterResult | list[int],
    budget: int,
    seed: int = 0,
    holdout_frac: float = 0.2,
    hyper: Hyper = Hyper(),
    strategy: str = "uncertainty",
) -> tuple[QualityModel, list[tuple[int, float]], ALSession]:
    """Drive a full session with the golden oracle as annotator.

    strategy "uncertainty" uses next_query; "random" picks uniformly
    from the pool (the paired baseline for measuring query efficiency).
    Medoid seeding is identical under both strategies.
    """
    if strategy not in ("uncertainty", "random"):
        raise ValueError(f"unknown strategy {strategy!r}")
    session = init_session(dataset, clusters, budget, holdout_frac, seed, hyper)
    rng = Rng(sub_seed(seed, 1))
    while session.queries_made < session.budget and session.unlabeled:
        queued = [i for i in session.seed_queue if i in session.unlabeled]
        if queued or strategy == "uncertainty":
            qid = next_query(session)
        else:
            qid = rng.choice(sorted(session.unlabeled))
        label, _ = oracle_label(session.records[qid].grid)
        submit_label(session, qid, label)
    return session.model, list(session.curve), session

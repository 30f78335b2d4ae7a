"""Artifact validation: re-derive every invariant a file claims.

The file kind is sniffed from its first line; checks are exhaustive and
a clean report is the write-path contract (everything this package
writes must validate clean).
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import ParseError
from .levels import read_level, validate_level
from .pipeline import read_cpset, rule_filter
from .quality import ACCEPT, QualityModel, REJECT, load_model, predict
from .sampler import read_dataset, record_from_json
from .segments import (
    decode_segment,
    difficulty_bin,
    difficulty_score,
    encode_segment,
    extract_features,
)


def sniff_kind(path) -> str:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip()
    if first.startswith("cpforge-model"):
        return "model"
    try:
        obj = json.loads(first)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: unrecognized file: {exc}") from exc
    if isinstance(obj, dict):
        kind = obj.get("kind")
        if kind in ("cpset", "level"):
            return kind
        if "id" in obj and "grid" in obj and "label" in obj:
            return "labeled"
        if "id" in obj and "grid" in obj:
            return "dataset"
    raise ParseError(f"{path}: unrecognized file header")


def validate_file(path, model: QualityModel | None = None) -> list[str]:
    """Returns a list of violations; empty means the artifact is clean."""
    kind = sniff_kind(path)
    if kind == "model":
        load_model(path)
        return []
    if kind == "dataset":
        return _validate_dataset(path)
    if kind == "labeled":
        return _validate_labeled(path)
    if kind == "cpset":
        return _validate_cpset(path, model)
    if kind == "level":
        level = read_level(path)
        return validate_level(level, model=model)
    raise ParseError(f"{path}: unknown kind {kind}")


def _validate_dataset(path) -> list[str]:
    problems = []
    records = read_dataset(path)
    for expected, rec in enumerate(records):
        if rec.id != expected:
            problems.append(f"record {expected}: id {rec.id} out of sequence")
        if decode_segment(encode_segment(rec.grid)) != rec.grid:
            problems.append(f"record {rec.id}: grid does not round-trip")
        if extract_features(rec.grid) != rec.features:
            problems.append(f"record {rec.id}: stored features do not match grid")
    return problems


def _validate_labeled(path) -> list[str]:
    problems = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            rec = record_from_json(line)
            obj = json.loads(line)
            if obj.get("label") not in (ACCEPT, REJECT):
                problems.append(f"record {n}: bad label {obj.get('label')!r}")
            if obj.get("source") not in ("human", "oracle"):
                problems.append(f"record {n}: bad source {obj.get('source')!r}")
            if extract_features(rec.grid) != rec.features:
                problems.append(f"record {n}: stored features do not match grid")
    return problems


def _validate_cpset(path, model: QualityModel | None) -> list[str]:
    problems = []
    cpset = read_cpset(path)
    seen = set()
    for n, cp in enumerate(cpset.cps):
        verdict = rule_filter(cp.grid)
        if not verdict.passed:
            problems.append(f"cp {n}: rule violations {list(verdict.violations)}")
        if cp.p < cpset.theta:
            problems.append(f"cp {n}: p={cp.p:.4f} below theta={cpset.theta}")
        feats = extract_features(cp.grid)
        if feats != cp.features:
            problems.append(f"cp {n}: stored features do not match grid")
        d = difficulty_score(feats)
        if abs(d - cp.d) > 1e-9:
            problems.append(f"cp {n}: stored difficulty mismatch")
        if difficulty_bin(d) != cp.bin:
            problems.append(f"cp {n}: bin inconsistent with difficulty")
        if cp.grid.rows in seen:
            problems.append(f"cp {n}: duplicate grid")
        seen.add(cp.grid.rows)
        if model is not None and abs(predict(model, feats) - cp.p) > 1e-9:
            problems.append(f"cp {n}: stored p does not match the supplied model")
    return problems


def validate_path(path, model_path=None) -> tuple[list[str], str]:
    model = load_model(model_path) if model_path else None
    p = Path(path)
    if not p.is_file():
        raise ParseError(f"no such file: {p}")
    return validate_file(p, model), sniff_kind(p)

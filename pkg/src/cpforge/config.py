"""Run configuration: paths, server port, seeds, hyperparameters.

A config file is optional JSON; unknown keys are rejected so typos
fail loudly.  The server port falls back to the CPFORGE_PORT
environment variable, then to the default.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ParseError

DEFAULT_PORT = 8714
PORT_ENV_VAR = "CPFORGE_PORT"


@dataclass
class Config:
    dataset_path: str = "dataset.jsonl"
    clusters_path: str = "clusters.json"
    model_path: str = "model.txt"
    labeled_path: str = "labeled.jsonl"
    curve_path: str = "curve.csv"
    cps_path: str = "cps.jsonl"
    level_path: str = "level.txt"
    trace_path: str = "trace.csv"
    summary_path: str = "summary.json"
    out_dir: str = "."
    ui_dir: str | None = None
    port: int = 0  # 0 = resolve from env / default
    seed: int = 0
    budget: int = 200
    holdout_frac: float = 0.2
    theta: float = 0.5

    def resolved_port(self) -> int:
        if self.port:
            return self.port
        env = os.environ.get(PORT_ENV_VAR)
        if env:
            try:
                return int(env)
            except ValueError as exc:
                raise ParseError(f"{PORT_ENV_VAR} must be an integer: {env!r}") from exc
        return DEFAULT_PORT

    def path(self, name: str) -> Path:
        return Path(self.out_dir) / getattr(self, name)

    @classmethod
    def load(cls, path) -> "Config":
        with open(path, encoding="utf-8") as fh:
            try:
                obj = json.loads(fh.read())
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: bad config: {exc}") from exc
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ParseError(f"{path}: unknown config keys {sorted(unknown)}")
        return cls(**obj)


def require_file(path) -> Path:
    p = Path(path)
    if not p.is_file():
        raise ParseError(f"no such file: {p}")
    return p

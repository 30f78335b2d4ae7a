"""Real-time difficulty adjustment via tabular Q-learning.

One episode = one served segment.  The policy state is (current
difficulty bin, recent-performance bucket); the actions move the bin
down, hold it, or move it up.  Reward peaks when performance sits at
the moderate-challenge target TARGET_PERF, following the assumption
that enjoyment is maximized at a moderate challenge rather than at
guaranteed success.

Simulated players respond to a segment of difficulty d with per-attempt
success probability sigmoid(steepness * (skill - d)); performance is
1/attempts on success within the persistence limit, else 0.

Episode loop (run_adaptive): serve a uniform CP from the current bin,
simulate play, compute reward, Q-update the previous (state, action)
against the new state, then pick the next action epsilon-greedily and
move the bin.  The first episode serves from the start bin before any
action is taken.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BinEmpty, ParseError, TraceTooShort
from .pipeline import CPSet
from .rng import Rng, sub_seed
from .segments import BIN_COUNT

TARGET_PERF = 0.6
START_BIN = 2
ACTIONS = ("down", "stay", "up")
ACTION_DELTA = (-1, 0, 1)
PERF_BUCKETS = 3
RECENT_WINDOW = 3

# Q tables start at half the maximum discounted return (r_max / (1 - gamma)
# / 2).  Zero-initialized tables lock onto the first action that ever pays
# (ties prefer "down", so every player gets dragged to the easiest bin);
# this level of optimism makes untried actions attractive long enough to
# rank the bins, yet washes out within a few hundred episodes.
Q_INIT_OPTIMISM = 5.0


@dataclass
class PlayerSim:
    """Parametric player: logistic skill-vs-difficulty response."""

    skill: float
    steepness: float = 5.0
    persistence: int = 3
    seed: int = 0
    _rng: Rng = field(default=None, repr=False)

    def __post_init__(self):
        if not 0.0 <= self.skill <= 1.0:
            raise ValueError("skill must be in [0, 1]")
        if self.persistence < 1:
            raise ValueError("persistence must be >= 1")
        if self._rng is None:
            self._rng = Rng(sub_seed(self.seed, 0))

    def success_prob(self, d: float) -> float:
        return 1.0 / (1.0 + math.exp(-self.steepness * (self.skill - d)))


@dataclass(frozen=True)
class PerformanceRecord:
    success: bool
    attempts: int
    perf: float


def simulate_play(p: PlayerSim, d: float) -> PerformanceRecord:
    """Bernoulli attempts until success or persistence runs out."""
    if not 0.0 <= d <= 1.0:
        raise ValueError("difficulty must be in [0, 1]")
    prob = p.success_prob(d)
    for attempt in range(1, p.persistence + 1):
        if p._rng.random() < prob:
            return PerformanceRecord(success=True, attempts=attempt, perf=1.0 / attempt)
    return PerformanceRecord(success=False, attempts=p.persistence, perf=0.0)


def reward(perf: float, target: float = TARGET_PERF) -> float:
    """Tent function peaking at the moderate-challenge target."""
    if not 0.0 <= perf <= 1.0:
        raise ValueError("perf must be in [0, 1]")
    return 1.0 - abs(perf - target) / max(target, 1.0 - target)


def perf_bucket(recent: list[float]) -> int:
    """floor(mean of the last RECENT_WINDOW perfs * 3), clamped to [0, 2];
    an empty history buckets to 0."""
    if not recent:
        return 0
    mean = sum(recent[-RECENT_WINDOW:]) / len(recent[-RECENT_WINDOW:])
    return min(PERF_BUCKETS - 1, int(mean * PERF_BUCKETS))


@dataclass
class QPolicy:
    q: np.ndarray = field(
        default_factory=lambda: np.full(
            (BIN_COUNT, PERF_BUCKETS, len(ACTIONS)), Q_INIT_OPTIMISM
        )
    )
    alpha: float = 0.1
    gamma: float = 0.9
    epsilon: float = 0.2
    epsilon_decay: float = 0.995
    epsilon_floor: float = 0.01
    target: float = TARGET_PERF


def dda_step(q: QPolicy, state: tuple[int, int], rng: Rng) -> int:
    """Epsilon-greedy action index; greedy ties go to the lowest index
    (down < stay < up)."""
    if rng.random() < q.epsilon:
        return rng.randint(0, len(ACTIONS) - 1)
    return int(np.argmax(q.q[state[0], state[1]]))


@dataclass(frozen=True)
class TraceRow:
    episode: int
    bin: int
    difficulty: float
    perf: float
    reward: float
    epsilon: float


def run_adaptive(
    cps: CPSet,
    player: PlayerSim,
    episodes: int,
    seed: int = 0,
    policy: QPolicy | None = None,
    on_episode=None,
) -> list[TraceRow]:
    """Run the adaptive loop and return the per-episode trace.

    ``on_episode(episode, player)``, when given, runs before each
    episode (test hook for non-stationary players).  Deterministic per
    (cps, player seed, episodes, seed).
    """
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    populated = cps.bins_populated()
    if not all(populated):
        empty = [b for b, ok in enumerate(populated) if not ok]
        raise BinEmpty(f"CP set has empty difficulty bins {empty}")
    by_bin = [cps.by_bin(b) for b in range(BIN_COUNT)]

    q = policy if policy is not None else QPolicy()
    rng = Rng(sub_seed(seed, 0))
    trace: list[TraceRow] = []
    recent: list[float] = []
    current_bin = START_BIN
    prev: tuple[tuple[int, int], int] | None = None

    for episode in range(1, episodes + 1):
        if on_episode is not None:
            on_episode(episode, player)
        cp = rng.choice(by_bin[current_bin])
        rec = simulate_play(player, cp.d)
        r = reward(rec.perf, q.target)
        recent.append(rec.perf)
        state = (current_bin, perf_bucket(recent))
        if prev is not None:
            (s0, a0) = prev
            target = r + q.gamma * float(np.max(q.q[state[0], state[1]]))
            q.q[s0[0], s0[1], a0] += q.alpha * (target - q.q[s0[0], s0[1], a0])
            assert math.isfinite(q.q[s0[0], s0[1], a0]), "Q diverged"
        trace.append(
            TraceRow(
                episode=episode,
                bin=current_bin,
                difficulty=cp.d,
                perf=rec.perf,
                reward=r,
                epsilon=q.epsilon,
            )
        )
        action = dda_step(q, state, rng)
        prev = (state, action)
        current_bin = min(BIN_COUNT - 1, max(0, current_bin + ACTION_DELTA[action]))
        q.epsilon = max(q.epsilon_floor, q.epsilon * q.epsilon_decay)
    return trace


def converged_difficulty(trace: list[TraceRow], tail: int = 100) -> float:
    """Mean served difficulty over the last ``tail`` episodes."""
    if len(trace) < tail:
        raise TraceTooShort(f"trace has {len(trace)} rows, tail needs {tail}")
    return sum(row.difficulty for row in trace[-tail:]) / tail


def tail_summary(trace: list[TraceRow], tail: int = 100) -> dict:
    if len(trace) < tail:
        raise TraceTooShort(f"trace has {len(trace)} rows, tail needs {tail}")
    window = trace[-tail:]
    return {
        "episodes": len(trace),
        "tail": tail,
        "tail_mean_perf": sum(r.perf for r in window) / tail,
        "tail_mean_difficulty": sum(r.difficulty for r in window) / tail,
        "tail_mean_bin": sum(r.bin for r in window) / tail,
        "final_epsilon": trace[-1].epsilon,
    }


TRACE_HEADER = ["episode", "bin", "difficulty", "perf", "reward", "epsilon"]


def write_trace(trace: list[TraceRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for row in trace:
            writer.writerow(
                [
                    row.episode,
                    row.bin,
                    repr(row.difficulty),
                    repr(row.perf),
                    repr(row.reward),
                    repr(row.epsilon),
                ]
            )


def read_trace(path) -> list[TraceRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != TRACE_HEADER:
            raise ParseError(f"{path}: bad trace header {header}")
        return [
            TraceRow(
                episode=int(row[0]),
                bin=int(row[1]),
                difficulty=float(row[2]),
                perf=float(row[3]),
                reward=float(row[4]),
                epsilon=float(row[5]),
            )
            for row in reader
        ]


def write_summary(summary: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(summary, sort_keys=True, separators=(",", ":")) + "\n")

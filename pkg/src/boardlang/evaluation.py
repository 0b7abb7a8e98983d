"""Game-quality scoring from agent-vs-agent playthroughs, and throughput
benchmarking under a uniformly random policy.

A game is playable when it parses, validates, compiles and survives a
smoke batch of random playouts. Playable games are scored from stronger-
vs-weaker MCTS matches with seat swapping; the six heuristics combine by
harmonic mean, and a score above 0.4 marks the game potentially
interesting.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .agents import MctsConfig, MctsPolicy, play_match
from .engine import playout_random


@dataclass
class EvalConfig:
    matches: int = 100
    strong_iterations: int = 100
    weak_iterations: int = 50
    smoke_playouts: int = 8
    max_turns: int = 200
    interesting_threshold: float = 0.4
    seed: int = 0
    time_budget: float = None   # seconds per game evaluation (None = unbounded)


@dataclass
class HeuristicScores:
    balance: float = 0.0
    decisiveness: float = 0.0
    completion: float = 0.0
    agency: float = 0.0
    coverage: float = 0.0
    strategic_depth: float = 0.0

    def as_dict(self):
        return {
            "balance": self.balance,
            "decisiveness": self.decisiveness,
            "completion": self.completion,
            "agency": self.agency,
            "coverage": self.coverage,
            "strategic_depth": self.strategic_depth,
        }

    def values(self):
        return list(self.as_dict().values())


@dataclass
class GavelReport:
    name: str
    playable: bool
    scores: HeuristicScores = None
    gavel_score: float = 0.0
    interesting: bool = False
    diagnostic: str = ""
    match_stats: object = None

    def as_dict(self):
        out = {"name": self.name, "playable": self.playable,
               "gavel_score": round(self.gavel_score, 6),
               "interesting": self.interesting}
        scores = self.scores or HeuristicScores()
        out.update({k: round(v, 6) for k, v in scores.as_dict().items()})
        if self.diagnostic:
            out["diagnostic"] = self.diagnostic
        return out


def harmonic_mean(values):
    if any(v <= 0 for v in values):
        return 0.0
    return len(values) / sum(1.0 / v for v in values)


def evaluate_game(text, config=None):
    """Full GAVEL-style evaluation of one game program."""
    from . import load_game
    config = config or EvalConfig()
    name = "<unparsed>"
    try:
        compiled = load_game(text)
        name = compiled.spec.name
        playout_random(compiled, seed=rng.hash_key(np.uint64(config.seed), np.uint64(1)),
                       batch_size=config.smoke_playouts, max_turns=config.max_turns)
    except Exception as exc:  # any failure means unplayable
        return GavelReport(name=name, playable=False,
                           diagnostic=f"{type(exc).__name__}: {exc}")
    try:
        strong = MctsPolicy(MctsConfig(iterations=config.strong_iterations,
                                       rollout_max_turns=config.max_turns,
                                       seed=config.seed * 2 + 1))
        weak = MctsPolicy(MctsConfig(iterations=config.weak_iterations,
                                     rollout_max_turns=config.max_turns,
                                     seed=config.seed * 2 + 2))
        deadline = (time.monotonic() + config.time_budget
                    if config.time_budget else None)
        stats = play_match(compiled, strong, weak, config.matches,
                           seed=config.seed, swap_sides=True,
                           max_turns=config.max_turns, deadline=deadline)
    except TimeoutError:
        # playable but too expensive to score within budget: never interesting
        return GavelReport(name=name, playable=True,
                           scores=HeuristicScores(),
                           diagnostic="evaluation time budget exceeded")
    except Exception as exc:
        return GavelReport(name=name, playable=False,
                           diagnostic=f"match failure: {type(exc).__name__}: {exc}")
    scores = score_match(stats)
    gavel = harmonic_mean(scores.values())
    return GavelReport(name=name, playable=True, scores=scores,
                       gavel_score=gavel,
                       interesting=gavel > config.interesting_threshold,
                       match_stats=stats)


def score_match(stats):
    games = stats.games
    decisive = stats.wins_p1 + stats.wins_p2
    if decisive > 0:
        gap = abs(stats.wins_p1 - stats.wins_p2) / decisive
        balance = 1.0 - gap
    else:
        balance = 0.0
    decisiveness = decisive / games
    completion = 1.0 - stats.truncations / games
    agency = (stats.multi_choice_turns / stats.total_turns
              if stats.total_turns else 0.0)
    coverage = float(np.mean(stats.coverage))
    # winrates over decisive games: strength separation among played-out wins
    depth = (max(0.0, (stats.wins_a - stats.wins_b) / decisive)
             if decisive else 0.0)
    return HeuristicScores(balance=balance, decisiveness=decisiveness,
                           completion=completion, agency=agency,
                           coverage=coverage, strategic_depth=depth)


GAVEL_CSV_COLUMNS = ("name", "playable", "balance", "decisiveness",
                     "completion", "agency", "coverage", "strategic_depth",
                     "gavel_score", "interesting")


def gavel_csv(reports):
    lines = [",".join(GAVEL_CSV_COLUMNS)]
    for r in reports:
        d = r.as_dict()
        lines.append(",".join(str(d.get(c, "")) for c in GAVEL_CSV_COLUMNS))
    return "\n".join(lines) + "\n"


@dataclass
class ThroughputReport:
    rows: list = field(default_factory=list)

    def add(self, game, batch_size, rates, wall_time, episodes):
        self.rows.append({
            "game": game,
            "batch_size": batch_size,
            "steps_per_sec_mean": float(np.mean(rates)),
            "steps_per_sec_std": float(np.std(rates)),
            "episodes": episodes,
            "wall_time": wall_time,
        })

    def rate(self, game, batch_size):
        for row in self.rows:
            if row["game"] == game and row["batch_size"] == batch_size:
                return row["steps_per_sec_mean"]
        raise KeyError((game, batch_size))

    def to_csv(self):
        cols = ("game", "batch_size", "steps_per_sec_mean",
                "steps_per_sec_std", "episodes")
        lines = [",".join(cols)]
        for row in self.rows:
            lines.append(",".join(str(row[c]) for c in cols))
        return "\n".join(lines) + "\n"

    def to_plot_tsv(self):
        """log-log friendly: one block per game, batch vs mean rate."""
        lines = ["# game\tbatch_size\tsteps_per_sec_mean\tsteps_per_sec_std"]
        for row in sorted(self.rows, key=lambda r: (r["game"], r["batch_size"])):
            lines.append(f"{row['game']}\t{row['batch_size']}\t"
                         f"{row['steps_per_sec_mean']}\t{row['steps_per_sec_std']}")
        return "\n".join(lines) + "\n"


def _run_episode(compiled, batch_size, seed, max_turns):
    """One synchronized batch episode; returns (state_steps, seconds)."""
    state = compiled.init(batch_size=batch_size, seed=seed)
    steps = 0
    t0 = time.perf_counter()
    while True:
        live = ~state.terminated & (state.move_count < max_turns)
        n = int(live.sum())
        if n == 0:
            break
        u = rng.uniform(state.seeds, state.move_count.astype(np.uint64))
        actions = compiled.sample_actions(state, u)
        compiled.step_into(state, actions, rows=live, verify=False)
        steps += n
    return steps, time.perf_counter() - t0


def benchmark_throughput(compiled, batch_sizes, warmup_episodes=100,
                         episodes=500, max_turns=200, seed=0,
                         report=None, name=None):
    """Steps/second of random play per batch size, mean +- std over episodes."""
    report = report if report is not None else ThroughputReport()
    name = name or compiled.spec.name
    for batch in batch_sizes:
        for w in range(warmup_episodes):
            _run_episode(compiled, batch, rng.hash_key(np.uint64(seed), np.uint64(batch),
                                                       np.uint64(w)), max_turns)
        rates = []
        wall0 = time.perf_counter()
        for e in range(episodes):
            steps, dt = _run_episode(
                compiled, batch,
                rng.hash_key(np.uint64(seed), np.uint64(batch), np.uint64(10_000 + e)),
                max_turns)
            rates.append(steps / dt if dt > 0 else float("inf"))
        report.add(name, batch, rates, time.perf_counter() - wall0, episodes)
    return report

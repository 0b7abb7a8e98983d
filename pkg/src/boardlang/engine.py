"""Engine API: initialize, query legality, step, and run random playouts.

Single states are batches of one; every operation is defined on a batch.
Terminated rows absorb (stepping them is the identity) unless auto-reset is
requested. Random playouts draw from counter-based per-state streams keyed
by (state seed, move count), so batched and sequential runs are bit-equal.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import EmptyMask, TerminalState
from .state import OUTCOME_DRAW


@dataclass
class ObservationTensor:
    planes: np.ndarray      # (B, planes, cells) bool
    legal_mask: np.ndarray  # (B, actions) bool


def init(compiled, batch_size=1, seed=0, seeds=None):
    return compiled.init(batch_size=batch_size, seed=seed, seeds=seeds)


def legal_actions(compiled, state):
    if state.terminated.all():
        raise TerminalState("all states in the batch are terminated")
    return compiled.legal_mask(state)


def legal_action_count(compiled, state):
    return compiled.legal_counts(state)


def step(compiled, state, actions):
    """Pure step; scalar action broadcasts over a batch of one."""
    if state.terminated.all():
        raise TerminalState("cannot step a terminated state")
    actions = np.broadcast_to(np.asarray(actions, dtype=np.int64),
                              (state.batch_size,)).copy()
    return compiled.step(state, actions)


def step_batch(compiled, batch, actions, auto_reset=False):
    """Lockstep batched step; terminated rows absorb or reset in place."""
    out = compiled.step(batch, np.asarray(actions, dtype=np.int64))
    if auto_reset and out.terminated.any():
        reset_rows(compiled, out, out.terminated)
    return out


def reset_rows(compiled, state, rows):
    """Reinitialize the selected rows in place, advancing their seed stream."""
    idx = np.nonzero(rows)[0]
    if len(idx) == 0:
        return
    fresh = compiled.init(batch_size=len(idx),
                          seeds=rng.hash_key(state.seeds[idx], np.uint64(0xE9)))
    state.set_rows(idx, fresh)


def random_actions(compiled, state):
    """Uniform legal action per live row, keyed by (seed, move_count)."""
    u = rng.uniform(state.seeds, state.move_count.astype(np.uint64))
    return compiled.sample_actions(state, u)


def observe(compiled, state, player):
    planes, mask = compiled.observe(state, player)
    return ObservationTensor(planes=planes, legal_mask=mask)


_RESULTS = {1: ("win", "lose"), 2: ("lose", "win"), 0: ("draw", "draw")}


def outcome_view(state, i=0):
    """{"p1": ..., "p2": ..., "truncated": ...} or None if not terminated."""
    if not state.terminated[i]:
        return None
    r1, r2 = _RESULTS[int(state.outcome[i])]
    return {"p1": r1, "p2": r2, "truncated": bool(state.truncated[i])}


class Playouts:
    """Recorded random playouts: per-step rows plus the final batch state."""

    def __init__(self, compiled, batch_size):
        self.compiled = compiled
        self.batch_size = batch_size
        self.steps = []          # (move_count, movers, actions, terminated)
        self.final = None
        self.turns_taken = None

    def record(self, move_count, movers, actions, terminated):
        self.steps.append((move_count.copy(), movers.copy(), actions.copy(),
                           terminated.copy()))

    def trajectory(self, i=0):
        """Step dicts for one state, in play order."""
        out = []
        for move_count, movers, actions, terminated in self.steps:
            if actions[i] < 0:
                continue
            out.append({
                "move_count": int(move_count[i]),
                "mover": f"P{int(movers[i]) + 1}",
                "action": int(actions[i]),
                "terminated": bool(terminated[i]),
                "outcome": outcome_view(self.final, i) if terminated[i] else None,
            })
        return out

    def to_jsonl(self, i=0):
        return "\n".join(json.dumps(row) for row in self.trajectory(i)) + "\n"


def playout_random(compiled, seed=0, batch_size=1, max_turns=200, record=False,
                   state=None):
    """Play uniformly random games to termination or the turn cap.

    Games hitting the cap are marked terminated+truncated with a draw
    outcome. Returns a Playouts (final state in .final).
    """
    if state is None:
        state = compiled.init(batch_size=batch_size, seed=seed)
    else:
        state = state.copy()
        batch_size = state.batch_size
    out = Playouts(compiled, batch_size)
    while True:
        live = ~state.terminated & (state.move_count < max_turns)
        if not live.any():
            break
        u = rng.uniform(state.seeds, state.move_count.astype(np.uint64))
        actions = compiled.sample_actions(state, u)
        stuck = live & (actions < 0)
        if stuck.any():
            i = int(np.argmax(stuck))
            raise EmptyMask(
                f"state row {i} has no legal action and no pass at move "
                f"{int(state.move_count[i])}")
        if record:
            out.record(state.move_count, state.current_player, actions,
                       state.terminated)
        compiled.step_into(state, actions, rows=live, verify=False)
        if record and out.steps:
            # refresh the termination flags of the step just taken
            mc, mv, ac, _ = out.steps[-1]
            out.steps[-1] = (mc, mv, ac, state.terminated.copy())
    truncate = ~state.terminated
    if truncate.any():
        state.terminated |= truncate
        state.truncated |= truncate
        state.outcome[truncate] = OUTCOME_DRAW
    out.final = state
    out.turns_taken = state.move_count.copy()
    return out

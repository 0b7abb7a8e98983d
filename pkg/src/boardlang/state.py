"""Game state: a structure-of-arrays batch of independent positions.

All arrays carry a leading batch dimension; a single game is a batch of
one. Attributes that a compiled game never reads or writes stay None, so
the per-state memory footprint is minimal (StateLayout decides).

Outcome encoding: -1 = none, 0 = draw, 1 = P1 wins, 2 = P2 wins.
Cell entries: board_piece / board_owner are -1 where empty.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

OUTCOME_NONE = -1
OUTCOME_DRAW = 0
OUTCOME_P1 = 1
OUTCOME_P2 = 2

KIND_NONE = -1
KIND_PLACE = 0
KIND_STEP = 1
KIND_HOP = 2
KIND_SLIDE = 3
KIND_PASS = 4

MOVE_KIND_IDS = {"place": KIND_PLACE, "step": KIND_STEP, "hop": KIND_HOP,
                 "slide": KIND_SLIDE, "pass": KIND_PASS}


@dataclass(frozen=True)
class StateLayout:
    """Which optional state attributes a compiled game materializes."""

    scores: bool = False
    passing: bool = False
    must_move: bool = False
    last_action: bool = False
    transient_masks: bool = False
    connectivity: int = 0        # number of connectivity plans
    phase: bool = False
    turn_pos: bool = False

    def attribute_names(self):
        out = []
        if self.scores:
            out.append("scores")
        if self.passing:
            out += ["pass_streak", "pass_flags"]
        if self.must_move:
            out.append("must_move")
        if self.last_action:
            out += ["last_mover", "last_kind", "last_source", "last_dest",
                    "last_dest_by_player"]
        if self.transient_masks:
            out += ["hopped_mask", "captured_mask", "promoted_mask"]
        if self.connectivity:
            out.append("comp_labels")
        if self.phase:
            out.append("phase")
        if self.turn_pos:
            out.append("turn_pos")
        return out


_CORE = ("board_piece", "board_owner", "current_player", "move_count",
         "terminated", "truncated", "outcome", "seeds")
_OPTIONAL = ("scores", "pass_streak", "pass_flags", "must_move",
             "last_mover", "last_kind", "last_source", "last_dest",
             "last_dest_by_player", "hopped_mask", "captured_mask",
             "promoted_mask", "comp_labels", "phase", "turn_pos")
FIELDS = _CORE + _OPTIONAL


class GameState:
    """SoA batch of positions. Treated as a value: engine ops copy first.

    _mech_cache memoizes per-step legality data (derived, never serialized
    or hashed); it is dropped by copy() and any row mutation.
    """

    __slots__ = FIELDS + ("batch_size", "_mech_cache")

    def __init__(self, batch_size):
        self.batch_size = batch_size
        self._mech_cache = None
        for name in FIELDS:
            setattr(self, name, None)

    # -- construction --

    @classmethod
    def allocate(cls, batch_size, num_cells, layout, seeds):
        s = cls(batch_size)
        B, C = batch_size, num_cells
        s.board_piece = np.full((B, C), -1, dtype=np.int8)
        s.board_owner = np.full((B, C), -1, dtype=np.int8)
        s.current_player = np.zeros(B, dtype=np.int8)
        s.move_count = np.zeros(B, dtype=np.int32)
        s.terminated = np.zeros(B, dtype=bool)
        s.truncated = np.zeros(B, dtype=bool)
        s.outcome = np.full(B, OUTCOME_NONE, dtype=np.int8)
        s.seeds = np.asarray(seeds, dtype=np.uint64).reshape(B).copy()
        if layout.scores:
            s.scores = np.zeros((B, 2), dtype=np.int32)
        if layout.passing:
            s.pass_streak = np.zeros(B, dtype=np.int16)
            s.pass_flags = np.zeros((B, 2), dtype=bool)
        if layout.must_move:
            s.must_move = np.full(B, -1, dtype=np.int16)
        if layout.last_action:
            s.last_mover = np.full(B, -1, dtype=np.int8)
            s.last_kind = np.full(B, KIND_NONE, dtype=np.int8)
            s.last_source = np.full(B, -1, dtype=np.int16)
            s.last_dest = np.full(B, -1, dtype=np.int16)
            s.last_dest_by_player = np.full((B, 2), -1, dtype=np.int16)
        if layout.transient_masks:
            s.hopped_mask = np.zeros((B, C), dtype=bool)
            s.captured_mask = np.zeros((B, C), dtype=bool)
            s.promoted_mask = np.zeros((B, C), dtype=bool)
        if layout.connectivity:
            s.comp_labels = np.full((B, layout.connectivity, C), -1, dtype=np.int16)
        if layout.phase:
            s.phase = np.zeros(B, dtype=np.int8)
        if layout.turn_pos:
            s.turn_pos = np.zeros(B, dtype=np.int8)
        return s

    def copy(self):
        out = GameState(self.batch_size)
        for name in FIELDS:
            v = getattr(self, name)
            if v is not None:
                setattr(out, name, v.copy())
        return out

    def rows(self, idx):
        """New GameState holding the selected rows (copies)."""
        idx = np.atleast_1d(np.asarray(idx))
        out = GameState(len(idx))
        for name in FIELDS:
            v = getattr(self, name)
            if v is not None:
                setattr(out, name, v[idx].copy())
        return out

    @classmethod
    def concat(cls, states):
        """Stack several batches (same layout) into one."""
        out = cls(sum(s.batch_size for s in states))
        for name in FIELDS:
            vs = [getattr(s, name) for s in states]
            if vs[0] is not None:
                setattr(out, name, np.concatenate(vs, axis=0))
        return out

    @classmethod
    def repeat_rows(cls, state, repeats):
        """Each row i repeated repeats[i] times (np.repeat semantics)."""
        out = cls(int(np.sum(repeats)))
        for name in FIELDS:
            v = getattr(state, name)
            if v is not None:
                setattr(out, name, np.repeat(v, repeats, axis=0))
        return out

    def set_rows(self, idx, other):
        """Overwrite the selected rows from another state (same layout)."""
        self._mech_cache = None
        for name in FIELDS:
            v = getattr(self, name)
            if v is not None:
                v[idx] = getattr(other, name)

    # -- inspection --

    def digest(self):
        """Hash of the full semantic content; equal digests = bit-identical."""
        h = hashlib.blake2b(digest_size=16)
        for name in FIELDS:
            v = getattr(self, name)
            if v is not None:
                h.update(name.encode())
                h.update(np.ascontiguousarray(v).tobytes())
        return h.hexdigest()

    def nbytes(self):
        return sum(getattr(self, name).nbytes for name in FIELDS
                   if getattr(self, name) is not None)

    def equal(self, other):
        for name in FIELDS:
            a, b = getattr(self, name), getattr(other, name)
            if (a is None) != (b is None):
                return False
            if a is not None and not np.array_equal(a, b):
                return False
        return True

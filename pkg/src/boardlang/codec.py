"""Action codecs: the fixed mapping between action indices and moves.

The action-space size is a compile-time constant fixed by the board and
the high-level play mechanics:

* placement: one action per cell (+1 trailing pass action when reachable)
* movement:  source * num_cells + dest (+1 for pass)
* gridworld: one action per step direction of the single mover
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ActionCodec:
    kind: str                 # placement | movement | gridworld
    num_cells: int
    size: int
    has_pass: bool
    directions: tuple = ()    # gridworld only

    @property
    def pass_index(self):
        return self.size - 1 if self.has_pass else None

    def encode(self, source, dest):
        if self.kind == "movement":
            return source * self.num_cells + dest
        if self.kind == "placement":
            return dest
        raise ValueError("gridworld actions are direction indices; use encode_direction")

    def encode_direction(self, direction):
        return self.directions.index(direction)

    def decode(self, action):
        """(source, dest) for board codecs; (None, None) for pass."""
        if self.has_pass and action == self.pass_index:
            return None, None
        if self.kind == "movement":
            return action // self.num_cells, action % self.num_cells
        if self.kind == "placement":
            return None, action
        return None, None

    def describe(self, action):
        if self.has_pass and action == self.pass_index:
            return {"kind": "pass"}
        if self.kind == "movement":
            return {"kind": "move", "source": action // self.num_cells,
                    "dest": action % self.num_cells}
        if self.kind == "placement":
            return {"kind": "place", "dest": action}
        return {"kind": "direction", "direction": self.directions[action]}


def make_codec(kind, num_cells, has_pass, directions=()):
    if kind == "placement":
        size = num_cells + (1 if has_pass else 0)
    elif kind == "movement":
        size = num_cells * num_cells + (1 if has_pass else 0)
    elif kind == "gridworld":
        size = len(directions) + (1 if has_pass else 0)
    else:
        raise ValueError(kind)
    return ActionCodec(kind=kind, num_cells=num_cells, size=size,
                       has_pass=has_pass, directions=tuple(directions))

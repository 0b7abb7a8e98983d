"""Board geometry: cell indexing, adjacency, edges, and precomputed tables.

Coordinate conventions (row-major, index 0 top-left, left-to-right then
top-to-bottom):

* square / rectangle: (row, col) grid, eight directions.
* hex_rectangle: axial parallelogram; rows shift right as they go down.
  Directions: left, right, up, down, up_right, down_left.
* hexagon (by diameter d, odd): rows of length d - |r - R| with R=(d-1)/2,
  axial coordinates internally. Directions: left, right, up_left, up_right,
  down_left, down_right.

``col_of`` is the within-row position for hexagon boards and the grid/axial
column otherwise.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidPattern, InvalidShapeParam, MissingForwardAssignment

SQUARE_DIRS = ("up", "down", "left", "right",
               "up_left", "up_right", "down_left", "down_right")
HEXAGON_DIRS = ("left", "right", "up_left", "up_right", "down_left", "down_right")
HEX_RECT_DIRS = ("left", "right", "up", "down", "up_right", "down_left")

# (dr, dc) on grids; (dq, dr) axial on hex boards
_GRID_DELTAS = {
    "up": (-1, 0), "down": (1, 0), "left": (0, -1), "right": (0, 1),
    "up_left": (-1, -1), "up_right": (-1, 1),
    "down_left": (1, -1), "down_right": (1, 1),
}
_HEX_DELTAS = {
    "left": (-1, 0), "right": (1, 0),
    "up_left": (0, -1), "up_right": (1, -1),
    "down_left": (-1, 1), "down_right": (0, 1),
}
_HEX_RECT_DELTAS = {
    "left": (0, -1), "right": (0, 1), "up": (-1, 0), "down": (1, 0),
    "up_right": (-1, 1), "down_left": (1, -1),
}

INVERSE_DIR = {
    "up": "down", "down": "up", "left": "right", "right": "left",
    "up_left": "down_right", "down_right": "up_left",
    "up_right": "down_left", "down_left": "up_right",
}

# direction-group keywords per shape family
_GROUPS_GRID = {
    "vertical": ("up", "down"),
    "horizontal": ("left", "right"),
    "orthogonal": ("up", "down", "left", "right"),
    "diagonal": ("up_left", "up_right", "down_left", "down_right"),
    "back_diagonal": ("up_left", "down_right"),
    "forward_diagonal": ("up_right", "down_left"),
    "any": SQUARE_DIRS,
}
_GROUPS_HEXAGON = {
    "horizontal": ("left", "right"),
    "diagonal": ("up_left", "up_right", "down_left", "down_right"),
    "back_diagonal": ("up_left", "down_right"),
    "forward_diagonal": ("up_right", "down_left"),
    "any": HEXAGON_DIRS,
}
_GROUPS_HEX_RECT = {
    "vertical": ("up", "down"),
    "horizontal": ("left", "right"),
    "orthogonal": ("up", "down", "left", "right"),
    "diagonal": ("up_right", "down_left"),
    "forward_diagonal": ("up_right", "down_left"),
    "any": HEX_RECT_DIRS,
}

# relative direction -> true direction, per facing
_RELATIVE = {
    "up":    {"forward": "up", "backward": "down",
              "forward_left": "up_left", "forward_right": "up_right",
              "backward_left": "down_left", "backward_right": "down_right"},
    "down":  {"forward": "down", "backward": "up",
              "forward_left": "down_right", "forward_right": "down_left",
              "backward_left": "up_right", "backward_right": "up_left"},
    "left":  {"forward": "left", "backward": "right",
              "forward_left": "down_left", "forward_right": "up_left",
              "backward_left": "down_right", "backward_right": "up_right"},
    "right": {"forward": "right", "backward": "left",
              "forward_left": "up_right", "forward_right": "down_right",
              "backward_left": "up_left", "backward_right": "down_left"},
}

# line-orientation keyword -> walk directions (one per axis), per family
_ORIENT_GRID = {
    "horizontal": ("right",), "vertical": ("down",),
    "forward_diagonal": ("down_left",), "back_diagonal": ("down_right",),
    "diagonal": ("down_left", "down_right"),
    "orthogonal": ("right", "down"),
    "any": ("right", "down", "down_right", "down_left"),
}
_ORIENT_HEXAGON = {
    "horizontal": ("right",),
    "forward_diagonal": ("down_left",), "back_diagonal": ("down_right",),
    "diagonal": ("down_left", "down_right"),
    "any": ("right", "down_left", "down_right"),
}
_ORIENT_HEX_RECT = {
    "horizontal": ("right",), "vertical": ("down",),
    "forward_diagonal": ("down_left",), "diagonal": ("down_left",),
    "orthogonal": ("right", "down"),
    "any": ("right", "down", "down_left"),
}


class Topology:
    """Immutable board geometry with precomputed index tables."""

    def __init__(self, shape):
        kind = shape.kind
        if kind in ("square", "rectangle"):
            rows, cols = shape.rows, shape.cols
            if rows < 1 or cols < 1:
                raise InvalidShapeParam(f"board dimensions must be positive: {rows}x{cols}")
            coords = [(r, c) for r in range(rows) for c in range(cols)]
            self.directions = SQUARE_DIRS
            deltas = _GRID_DELTAS
            self._groups = _GROUPS_GRID
            self._orients = _ORIENT_GRID
        elif kind == "hex_rectangle":
            rows, cols = shape.rows, shape.cols
            if rows < 1 or cols < 1:
                raise InvalidShapeParam(f"board dimensions must be positive: {rows}x{cols}")
            coords = [(r, c) for r in range(rows) for c in range(cols)]
            self.directions = HEX_RECT_DIRS
            deltas = _HEX_RECT_DELTAS
            self._groups = _GROUPS_HEX_RECT
            self._orients = _ORIENT_HEX_RECT
        elif kind == "hexagon":
            d = shape.rows
            if d < 1 or d % 2 == 0:
                raise InvalidShapeParam(f"hexagon diameter must be odd and positive: {d}")
            radius = (d - 1) // 2
            coords = []
            for r_ax in range(-radius, radius + 1):
                q_lo = max(-radius, -radius - r_ax)
                q_hi = min(radius, radius - r_ax)
                for q_ax in range(q_lo, q_hi + 1):
                    coords.append((q_ax, r_ax))
            rows, cols = d, d
            self.radius = radius
            self.directions = HEXAGON_DIRS
            deltas = _HEX_DELTAS
            self._groups = _GROUPS_HEXAGON
            self._orients = _ORIENT_HEXAGON
        else:
            raise InvalidShapeParam(f"unknown board shape {kind!r}")

        self.shape = shape
        self.kind = kind
        self.rows = rows
        self.cols = cols
        n = len(coords)
        self.num_cells = n
        self.sentinel = n
        self._coords = coords
        self._index = {c: i for i, c in enumerate(coords)}

        if kind == "hexagon":
            radius = self.radius
            self.row_of = np.array([r + radius for _, r in coords], dtype=np.int16)
            row_first = {}
            for i, (_, r_ax) in enumerate(coords):
                row_first.setdefault(r_ax + radius, i)
            self.col_of = np.array(
                [i - row_first[r + radius] for i, (_, r) in zip(range(n), coords)],
                dtype=np.int16)
            self.row_lengths = tuple(d - abs(r - radius) for r in range(d))
        else:
            self.row_of = np.array([r for r, _ in coords], dtype=np.int16)
            self.col_of = np.array([c for _, c in coords], dtype=np.int16)
            self.row_lengths = tuple(cols for _ in range(rows))

        self.neighbor_table = {}
        for dname in self.directions:
            da, db = deltas[dname]
            table = np.full(n + 1, n, dtype=np.int16)
            for i, (a, b) in enumerate(coords):
                j = self._index.get((a + da, b + db))
                if j is not None:
                    table[i] = j
            self.neighbor_table[dname] = table

        self._build_edges()
        self._build_center()
        self._ray_cache = {}
        self._line_cache = {}

    # -- construction helpers --

    def _mask_from(self, cells):
        m = np.zeros(self.num_cells, dtype=bool)
        m[list(cells)] = True
        return m

    def _build_edges(self):
        n = self.num_cells
        row, col = self.row_of, self.col_of
        self.edge_masks = {}
        if self.kind == "hexagon":
            d = self.rows
            radius = self.radius
            first = col == 0
            last = np.zeros(n, dtype=bool)
            for r in range(d):
                idx = np.nonzero(row == r)[0]
                last[idx[-1]] = True
            top_rows = row <= radius
            bot_rows = row >= radius
            self.edge_masks["top"] = row == 0
            self.edge_masks["bottom"] = row == d - 1
            self.edge_masks["top_left"] = first & top_rows
            self.edge_masks["top_right"] = last & top_rows
            self.edge_masks["bottom_left"] = first & bot_rows
            self.edge_masks["bottom_right"] = last & bot_rows
            corner_cells = []
            for r in (0, radius, d - 1):
                idx = np.nonzero(row == r)[0]
                corner_cells += [int(idx[0]), int(idx[-1])]
            self.corner_cells = tuple(sorted(corner_cells))
            self.edge_order = ("top", "top_right", "bottom_right",
                              "bottom", "bottom_left", "top_left")
        else:
            self.edge_masks["top"] = row == 0
            self.edge_masks["bottom"] = row == self.rows - 1
            self.edge_masks["left"] = col == 0
            self.edge_masks["right"] = col == self.cols - 1
            for name, (er, ec) in (("top_left", ("top", "left")),
                                   ("top_right", ("top", "right")),
                                   ("bottom_left", ("bottom", "left")),
                                   ("bottom_right", ("bottom", "right"))):
                self.edge_masks[name] = self.edge_masks[er] & self.edge_masks[ec]
            self.corner_cells = tuple(
                int(np.nonzero(self.edge_masks[nm])[0][0])
                for nm in ("top_left", "top_right", "bottom_left", "bottom_right"))
            self.edge_order = ("top", "bottom", "left", "right")
        self.corners_mask = self._mask_from(self.corner_cells)

    def _build_center(self):
        if self.kind == "hexagon":
            self.center_mask = self._mask_from([self._index[(0, 0)]])
            return
        rows, cols = self.rows, self.cols

        def centers(n):
            return (n // 2,) if n % 2 == 1 else (n // 2 - 1, n // 2)

        cells = [self._index[(r, c)] for r in centers(rows) for c in centers(cols)]
        self.center_mask = self._mask_from(cells)

    # -- queries --

    def coord_of(self, cell):
        return self._coords[cell]

    def cell_at(self, coord):
        return self._index.get(tuple(coord))

    def neighbor(self, cell, direction):
        j = self.neighbor_table[direction][cell]
        return None if j == self.sentinel else int(j)

    def expand_direction_keyword(self, word):
        """Expand a single direction token to true directions for this shape."""
        if word in self.directions:
            return (word,)
        if word in self._groups:
            return self._groups[word]
        raise KeyError(f"direction {word!r} is not available on a {self.kind} board")

    def orientation_dirs(self, word):
        """Walk directions (one per axis) for a line orientation keyword."""
        if word in self.directions:
            return (word,)
        if word in self._orients:
            return self._orients[word]
        raise KeyError(f"orientation {word!r} is not available on a {self.kind} board")

    def multi_mask(self, kind):
        """Expand a multi-mask keyword to an ordered list of masks."""
        if kind == "edges":
            return [self.edge_masks[nm] for nm in self.edge_order]
        if kind == "corners":
            return [self._mask_from([c]) for c in self.corner_cells]
        if kind == "edgesNoCorners":
            return [self.edge_masks[nm] & ~self.corners_mask for nm in self.edge_order]
        raise KeyError(f"unknown multi-mask {kind!r}")

    def ray(self, direction):
        """(num_cells+1, maxlen) table: cells outward from each cell, padded
        with the sentinel. Row `sentinel` is all-sentinel so chained lookups
        stay in range."""
        cached = self._ray_cache.get(direction)
        if cached is not None:
            return cached
        nt = self.neighbor_table[direction]
        n = self.num_cells
        cols = []
        frontier = nt[:n].copy()
        while (frontier != n).any():
            cols.append(frontier.copy())
            frontier = nt[frontier]
        if not cols:
            cols.append(np.full(n, n, dtype=np.int16))
        table = np.full((n + 1, len(cols)), n, dtype=np.int16)
        table[:n] = np.stack(cols, axis=1)
        table.setflags(write=False)
        self._ray_cache[direction] = table
        return table

    def line_table(self, length, orientation):
        """All length-``length`` windows along ``orientation``.

        Returns (tuples, ext_before, ext_after): tuples is (T, length) int16;
        the extension columns hold the cell just before/after each window or
        the sentinel at a border.
        """
        key = (length, orientation)
        cached = self._line_cache.get(key)
        if cached is not None:
            return cached
        if length < 1:
            raise InvalidPattern(f"line length must be >= 1, got {length}")
        dirs = self.orientation_dirs(orientation)
        rows = []
        before = []
        after = []
        for d in dirs:
            nt = self.neighbor_table[d]
            inv = self.neighbor_table[INVERSE_DIR[d]]
            for start in range(self.num_cells):
                cells = [start]
                ok = True
                for _ in range(length - 1):
                    nxt = int(nt[cells[-1]])
                    if nxt == self.sentinel:
                        ok = False
                        break
                    cells.append(nxt)
                if ok:
                    rows.append(cells)
                    before.append(int(inv[start]))
                    after.append(int(nt[cells[-1]]))
        tuples = np.array(rows, dtype=np.int16).reshape(len(rows), length)
        result = (tuples,
                  np.array(before, dtype=np.int16),
                  np.array(after, dtype=np.int16))
        for arr in result:
            arr.setflags(write=False)
        self._line_cache[key] = result
        return result

    def pattern_table(self, offsets, rotate=False):
        """Placements of an offset set: (P, K) int16 matrix of cell indices.

        Offsets are coordinate pairs in this board's coordinate system.
        With rotate, all distinct rotations are included (4 on grids, 6 on
        hex boards), deduplicated.
        """
        offs = [tuple(o) for o in offsets]
        if not offs:
            raise InvalidPattern("pattern must contain at least one offset")
        variants = {self._normalize(offs)}
        if rotate:
            cur = offs
            steps = 6 if self.kind in ("hexagon", "hex_rectangle") else 4
            for _ in range(steps - 1):
                if self.kind in ("hexagon", "hex_rectangle"):
                    cur = [(-b, a + b) for a, b in cur]
                else:
                    cur = [(b, -a) for a, b in cur]
                variants.add(self._normalize(cur))
        placements = []
        for var in sorted(variants):
            k = len(var)
            for a, b in self._coords:
                cells = []
                for da, db in var:
                    j = self._index.get((a + da, b + db))
                    if j is None:
                        break
                    cells.append(j)
                if len(cells) == k:
                    placements.append(sorted(cells))
        placements = sorted(set(map(tuple, placements)))
        if not placements:
            return np.zeros((0, len(offs)), dtype=np.int16)
        return np.array(placements, dtype=np.int16)

    @staticmethod
    def _normalize(offsets):
        amin = min(a for a, _ in offsets)
        bmin = min(b for _, b in offsets)
        return tuple(sorted(set((a - amin, b - bmin) for a, b in offsets)))

    def shape_offsets(self, shape):
        """Offset set of a shape argument, in this board's coordinates."""
        sub = Topology(shape)
        return [sub.coord_of(i) for i in range(sub.num_cells)]

    def to_dict(self):
        """JSON-friendly geometry dump (CLI debugging)."""
        return {
            "kind": self.kind,
            "rows": self.rows,
            "cols": self.cols,
            "num_cells": self.num_cells,
            "row_lengths": list(self.row_lengths),
            "row_of": self.row_of.tolist(),
            "col_of": self.col_of.tolist(),
            "directions": list(self.directions),
            "neighbors": {d: self.neighbor_table[d][:self.num_cells].tolist()
                          for d in self.directions},
            "edges": {name: np.nonzero(mask)[0].tolist()
                      for name, mask in self.edge_masks.items()},
            "corners": list(self.corner_cells),
            "center": np.nonzero(self.center_mask)[0].tolist(),
        }


def build_topology(shape):
    return Topology(shape)


def resolve_direction(tokens, player, forward_map, topology):
    """Resolve a direction spec to an ordered tuple of true directions.

    tokens: direction tokens from the AST (empty means "any").
    forward_map: {player: facing} from set_forward, possibly empty.
    Raises MissingForwardAssignment or KeyError for unusable keywords.
    """
    if not tokens:
        tokens = ("any",)
    out = []
    for word in tokens:
        if word in _RELATIVE["up"]:  # a relative keyword
            facing = forward_map.get(player)
            if facing is None:
                raise MissingForwardAssignment(
                    f"direction {word!r} needs (set_forward ...) for player {player + 1}")
            word = _RELATIVE[facing][word]
            if word not in topology.directions:
                raise KeyError(
                    f"direction {word!r} is not available on a {topology.kind} board")
            out.append(word)
        else:
            out.extend(topology.expand_direction_keyword(word))
    seen = []
    for d in topology.directions:
        if d in out and d not in seen:
            seen.append(d)
    return tuple(seen)

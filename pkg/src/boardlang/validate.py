"""Semantic validation of parsed game specs against a board topology."""

from __future__ import annotations

from . import gamespec as gs
from .errors import MissingForwardAssignment
from .topology import resolve_direction

# masks that depend only on geometry, usable in regions and start rules
_STATIC_MASKS = (gs.CenterMask, gs.CornersMask, gs.EdgeMask, gs.RowMask,
                 gs.ColumnMask, gs.RegionMask, gs.MultiMask)


class ValidationReport:
    """Ordered list of (node-path, message) findings; empty means valid."""

    def __init__(self):
        self.entries = []

    def add(self, path, message):
        self.entries.append((path, message))

    @property
    def ok(self):
        return not self.entries

    def __bool__(self):
        return self.ok

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __str__(self):
        if self.ok:
            return "valid"
        return "\n".join(f"{path}: {message}" for path, message in self.entries)


def validate(spec, topology):
    """Check every semantic invariant; returns a ValidationReport."""
    report = ValidationReport()
    v = _Validator(spec, topology, report)
    v.run()
    return report


class _Validator:
    def __init__(self, spec, topology, report):
        self.spec = spec
        self.topo = topology
        self.report = report
        self.pieces = {}
        self.regions = {}
        self.forward = dict(spec.players.forward)

    def run(self):
        spec = self.spec
        if spec.players.count != 2:
            self.report.add("players", f"exactly 2 players are supported, got {spec.players.count}")
        self._check_equipment()
        self._check_start()
        if not spec.phases:
            self.report.add("rules.play", "at least one play phase is required")
        for i, phase in enumerate(spec.phases):
            self._check_phase(phase, f"rules.play.phase[{i}]")
        if not spec.end_rules:
            self.report.add("rules.end", "at least one end rule is required")
        for i, rule in enumerate(spec.end_rules):
            self._check_tree(rule.condition, f"rules.end[{i}].condition",
                             allow_no_legal=True)
        if spec.rendering is not None:
            for i, (piece, _) in enumerate(spec.rendering.shapes):
                if piece not in self.pieces:
                    self.report.add(f"rendering.shape[{i}]", f"unknown piece {piece!r}")

    # -- sections --

    def _check_equipment(self):
        for i, p in enumerate(self.spec.equipment.pieces):
            if p.name in self.pieces:
                self.report.add(f"equipment.pieces[{i}]", f"duplicate piece name {p.name!r}")
            self.pieces[p.name] = p
        for i, r in enumerate(self.spec.equipment.regions):
            path = f"equipment.regions[{i}]"
            if r.name in self.regions:
                self.report.add(path, f"duplicate region name {r.name!r}")
            self.regions[r.name] = r
            for c in r.cells:
                if c >= self.topo.num_cells:
                    self.report.add(path, f"cell index {c} out of range (board has {self.topo.num_cells} cells)")
            for m in r.masks:
                self._check_static_mask(m, path)

    def _check_static_mask(self, node, path):
        for sub, n in gs.walk(node):
            p = f"{path}.{sub}" if sub else path
            if not isinstance(n, _STATIC_MASKS + (gs.MaskAnd, gs.MaskOr, gs.MaskNot)):
                self.report.add(p, f"{type(n).__name__} is not a static mask (regions and start rules need geometry-only masks)")
                return
        self._check_tree(node, path)

    def _check_start(self):
        seen_cells = {}
        for i, sp in enumerate(self.spec.start):
            path = f"rules.start[{i}]"
            if sp.piece not in self.pieces:
                self.report.add(path, f"unknown piece {sp.piece!r}")
            else:
                owner = self.pieces[sp.piece].owner
                if owner != gs.BOTH and owner != sp.player:
                    self.report.add(path, f"piece {sp.piece!r} cannot be owned by P{sp.player + 1}")
            for c in sp.cells:
                if c >= self.topo.num_cells:
                    self.report.add(path, f"cell index {c} out of range (board has {self.topo.num_cells} cells)")
                elif c in seen_cells:
                    self.report.add(path, f"cell {c} already used by {seen_cells[c]}")
                else:
                    seen_cells[c] = path
            for m in sp.masks:
                self._check_static_mask(m, path)

    def _check_phase(self, phase, path):
        if not phase.order:
            self.report.add(path, "mover order must name at least one player")
        mech = phase.mechanic
        if isinstance(mech, gs.PlaceMechanic):
            mpath = f"{path}.place"
            if mech.piece not in self.pieces:
                self.report.add(mpath, f"unknown piece {mech.piece!r}")
            self._check_tree(mech.destination, f"{mpath}.destination")
            if mech.result is not None:
                self._check_tree(mech.result, f"{mpath}.result")
            for j, e in enumerate(mech.effects):
                self._check_tree(e, f"{mpath}.effects[{j}]")
        else:
            for j, mv in enumerate(mech.moves):
                mvpath = f"{path}.move[{j}]"
                if mv.piece not in self.pieces:
                    self.report.add(mvpath, f"unknown piece {mv.piece!r}")
                if isinstance(mv, gs.HopMove) and mv.over_piece and mv.over_piece not in self.pieces:
                    self.report.add(mvpath, f"unknown piece {mv.over_piece!r}")
                self._check_directions(mv.directions, phase.order, mvpath)
            for j, e in enumerate(mech.effects):
                self._check_tree(e, f"{path}.move.effects[{j}]")

    # -- expression trees --

    def _check_tree(self, node, path, allow_no_legal=False):
        for sub, n in gs.walk(node):
            p = f"{path}.{sub}" if sub else path
            t = type(n)
            if t is gs.NoLegalActionsPred and not allow_no_legal:
                self.report.add(p, "no_legal_actions is only allowed in end conditions")
            elif t is gs.RegionMask and n.region not in self.regions:
                self.report.add(p, f"unknown region {n.region!r}")
            elif t in (gs.LineFn, gs.PatternFn, gs.ConnectedFn, gs.CornerCustodialMask,
                       gs.CustodialMask) and n.piece not in self.pieces:
                self.report.add(p, f"unknown piece {n.piece!r}")
            if t is gs.CornerCustodialMask and self.topo.kind in ("hexagon", "hex_rectangle"):
                self.report.add(p, "corner_custodial is only defined on square and rectangle boards")
            if t is gs.PromoteEffect:
                for nm in (n.from_piece, n.to_piece):
                    if nm not in self.pieces:
                        self.report.add(p, f"unknown piece {nm!r}")
            if t is gs.ColumnMask and n.index >= max(self.topo.row_lengths):
                self.report.add(p, f"column {n.index} out of range")
            if t is gs.RowMask and n.index >= self.topo.rows:
                self.report.add(p, f"row {n.index} out of range")
            if t is gs.EdgeMask:
                self._check_edge(n.which, p)
            if t is gs.AdjacentMask:
                self._check_directions(n.directions, (gs.P1, gs.P2), p)
            if t is gs.ConnectedFn:
                relative = [w for w in n.directions if w in gs.RELATIVE_DIRECTIONS]
                if relative:
                    # component structure is board-global; adjacency cannot
                    # depend on whose turn it is
                    self.report.add(p, f"connected cannot use relative directions {relative}")
                else:
                    self._check_directions(n.directions, (gs.P1, gs.P2), p)
            if t in (gs.CustodialMask, gs.LineFn):
                self._check_orientation(n.orientation, p)
            if t is gs.PatternFn and n.shape is not None:
                fam_board = self.topo.kind in ("hexagon", "hex_rectangle")
                fam_shape = n.shape.kind in ("hexagon", "hex_rectangle")
                if n.shape.kind == "hexagon" and n.shape.rows % 2 == 0:
                    self.report.add(p, "hexagon shape parameter must be odd")

    def _check_edge(self, which, path):
        if which in ("forward", "backward"):
            if not self.forward:
                self.report.add(path, f"edge {which} needs (set_forward ...)")
                return
            for player, facing in self.forward.items():
                name = facing if which == "forward" else {"up": "down", "down": "up", "left": "right", "right": "left"}[facing]
                edge = {"up": "top", "down": "bottom", "left": "left", "right": "right"}[name]
                if edge not in self.topo.edge_masks:
                    self.report.add(path, f"edge {edge!r} does not exist on a {self.topo.kind} board")
            return
        if which not in self.topo.edge_masks:
            self.report.add(path, f"edge {which!r} does not exist on a {self.topo.kind} board")

    def _check_directions(self, tokens, players, path):
        if not tokens:
            return
        for player in set(players):
            try:
                resolve_direction(tokens, player, self.forward, self.topo)
            except MissingForwardAssignment as exc:
                self.report.add(path, str(exc))
                return
            except KeyError as exc:
                self.report.add(path, str(exc.args[0]))
                return

    def _check_orientation(self, word, path):
        try:
            self.topo.orientation_dirs(word)
        except KeyError as exc:
            self.report.add(path, str(exc.args[0]))

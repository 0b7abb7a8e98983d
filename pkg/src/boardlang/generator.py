"""Uniform random sampling of syntactically valid game programs.

Starting from the root form, every grammar choice point picks uniformly
among its alternatives; beyond the maximum syntax-tree depth, closing is
always preferred (optional parts are dropped, repetitions stop at one
element, and recursive choices collapse to leaves). Output is always
grammatical; semantic soundness is deliberately not repaired, so most
samples fail validation or get stuck, matching a naive baseline.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import gamespec as gs
from .parser import serialize

# structural tail below the depth cap: forms the grammar *requires* even
# when every optional branch closes (e.g. phase -> mechanic -> destination
# -> leaf mask)
FORCED_TAIL = 5

_PIECE_POOL = ("stone", "disc", "pawn", "king", "tile", "token")
_REGION_POOL = ("zone", "goal", "camp", "edge_zone")


@dataclass
class SamplerConfig:
    max_depth: int = 5
    seed: int = 0
    count: int = 100
    min_board: int = 3
    max_board: int = 19
    min_line: int = 2
    max_line: int = 6

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_board > self.max_board or self.min_line > self.max_line:
            raise ValueError("literal ranges must be non-empty")


class _Sampler:
    def __init__(self, config, rand):
        self.cfg = config
        self.rand = rand
        self.pieces = []
        self.regions = []
        self.num_cells = 0
        self.board = None
        self.has_forward = False

    # depth helpers: d is the current syntax-tree depth

    def deep(self, d):
        return d >= self.cfg.max_depth

    def repeat(self, d, lo=1, hi=3):
        if self.deep(d):
            return lo
        return self.rand.randint(lo, hi)

    def maybe(self, d, p=0.5):
        return not self.deep(d) and self.rand.random() < p

    def pick(self, options):
        return self.rand.choice(options)

    def cell(self):
        return self.rand.randrange(self.num_cells)

    # -- program parts --

    def game(self, name):
        d = 1
        players = self.players(d)
        equipment = self.equipment(d)
        start = self.start_rules(d + 1) if self.maybe(d + 1, 0.5) else ()
        phases = tuple(self.phase(d + 2) for _ in range(self.repeat(d + 2, 1, 2)))
        ends = tuple(self.end_rule(d + 2) for _ in range(self.repeat(d + 2, 1, 2)))
        return gs.GameSpec(name=name, players=players, equipment=equipment,
                           start=start, phases=phases, end_rules=ends,
                           rendering=None)

    def players(self, d):
        # naive literal draw: the grammar allows any positive player count,
        # and validation rejects anything but 2 (no semantic repair)
        count = self.rand.randint(1, 4)
        if self.maybe(d + 1, 0.5):
            self.has_forward = True
            fwd = ((gs.P1, self.pick(("up", "down", "left", "right"))),
                   (gs.P2, self.pick(("up", "down", "left", "right"))))
            return gs.Players(count=count, forward=fwd)
        return gs.Players(count=count)

    def equipment(self, d):
        kind = self.pick(("square", "rectangle", "hexagon", "hex_rectangle"))
        lo, hi = self.cfg.min_board, self.cfg.max_board
        if kind == "hexagon":
            n = self.rand.randrange(lo | 1, hi + 1, 2)
            board = gs.BoardShape("hexagon", n)
        elif kind == "square":
            board = gs.BoardShape("square", self.rand.randint(lo, hi))
        else:
            board = gs.BoardShape(kind, self.rand.randint(lo, hi),
                                  self.rand.randint(lo, hi))
        self.board = board
        from .topology import build_topology
        self.num_cells = build_topology(board).num_cells
        pieces = []
        for i in range(self.repeat(d + 1, 1, 3)):
            name = _PIECE_POOL[i % len(_PIECE_POOL)]
            pieces.append(gs.PieceDef(name, self.pick((gs.P1, gs.P2, gs.BOTH))))
            self.pieces.append(name)
        regions = ()
        if self.maybe(d + 1, 0.3):
            rs = []
            for i in range(self.repeat(d + 2, 1, 2)):
                name = _REGION_POOL[i % len(_REGION_POOL)]
                cells = tuple(sorted({self.cell() for _ in range(self.rand.randint(1, 6))}))
                rs.append(gs.RegionDef(name, cells=cells))
                self.regions.append(name)
            regions = tuple(rs)
        return gs.Equipment(board=board, pieces=tuple(pieces), regions=regions)

    def start_rules(self, d):
        out = []
        used = set()
        for _ in range(self.repeat(d, 1, 2)):
            cells = []
            for _ in range(self.rand.randint(1, 8)):
                c = self.cell()
                if c not in used:
                    used.add(c)
                    cells.append(c)
            if not cells:
                continue
            out.append(gs.StartPlace(piece=self.pick(self.pieces),
                                     player=self.pick((gs.P1, gs.P2)),
                                     cells=tuple(sorted(cells))))
        return tuple(out)

    def phase(self, d):
        kind = self.pick(("repeat", "once_through"))
        order = tuple(self.pick((gs.P1, gs.P2))
                      for _ in range(self.repeat(d + 1, 1, 2)))
        mech = self.mechanic(d + 1)
        force_pass = self.maybe(d + 1, 0.5)
        return gs.Phase(kind=kind, order=order, mechanic=mech, force_pass=force_pass)

    def mechanic(self, d):
        if self.pick(("place", "move")) == "place":
            dest = self.mask(d + 2)
            result = self.predicate(d + 2) if self.maybe(d + 2, 0.25) else None
            effects = self.effects(d + 2)
            return gs.PlaceMechanic(piece=self.pick(self.pieces),
                                    owner=self.pick((gs.MOVER, gs.MOVER, gs.OPPONENT)),
                                    destination=dest, result=result,
                                    effects=effects)
        moves = tuple(self.move_type(d + 2)
                      for _ in range(self.repeat(d + 1, 1, 3)))
        return gs.MoveMechanic(moves=moves, effects=self.effects(d + 2))

    def move_type(self, d):
        piece = self.pick(self.pieces)
        dirs = self.directions(d)
        kind = self.pick(("step", "hop", "slide"))
        prio = self.rand.randint(0, 1) if self.maybe(d, 0.3) else 0
        if kind == "step":
            return gs.StepMove(piece=piece, directions=dirs, priority=prio)
        if kind == "hop":
            hop_over = self.pick(("", gs.MOVER, gs.OPPONENT)) if self.maybe(d, 0.5) else ""
            return gs.HopMove(piece=piece, directions=dirs, hop_over=hop_over,
                              capture=self.rand.random() < 0.5, priority=prio)
        dist = self.rand.randint(1, 4) if self.maybe(d, 0.3) else 0
        return gs.SlideMove(piece=piece, directions=dirs, distance=dist,
                            priority=prio)

    def directions(self, d):
        if self.deep(d) or self.rand.random() < 0.5:
            return ()
        pool = list(gs.TRUE_DIRECTIONS) + list(gs.DIRECTION_GROUPS) \
            + list(gs.RELATIVE_DIRECTIONS)
        return (self.pick(pool),)

    def effects(self, d):
        if not self.maybe(d, 0.4):
            return ()
        out = []
        for _ in range(self.repeat(d, 1, 2)):
            out.append(self.effect(d + 1))
        return tuple(out)

    def effect(self, d, conditional_ok=True):
        kinds = ["capture", "flip", "promote", "increment_score", "set_score",
                 "extra_turn"]
        if conditional_ok and not self.deep(d):
            kinds.append("if")
        kind = self.pick(kinds)
        if kind == "capture":
            return gs.CaptureEffect(mask=self.mask(d + 1),
                                    increment_score=self.rand.random() < 0.3)
        if kind == "flip":
            return gs.FlipEffect(mask=self.mask(d + 1))
        if kind == "promote":
            return gs.PromoteEffect(from_piece=self.pick(self.pieces),
                                    to_piece=self.pick(self.pieces),
                                    mask=self.mask(d + 1))
        if kind == "increment_score":
            return gs.IncrementScoreEffect(who=self.pick((gs.MOVER, gs.OPPONENT)),
                                           fn=self.function(d + 1))
        if kind == "set_score":
            return gs.SetScoreEffect(who=self.pick((gs.MOVER, gs.OPPONENT)),
                                     fn=self.function(d + 1))
        if kind == "extra_turn":
            return gs.ExtraTurnEffect(who=gs.MOVER,
                                      same_piece=self.rand.random() < 0.5)
        return gs.ConditionalEffect(condition=self.predicate(d + 1),
                                    then_effect=self.effect(d + 1, False),
                                    else_effect=(self.effect(d + 1, False)
                                                 if self.maybe(d + 1, 0.3) else None))

    def end_rule(self, d):
        cond = self.predicate(d + 1)
        kind = self.pick(("win", "lose", "draw", "by_score"))
        if kind in ("win", "lose"):
            result = gs.EndResult(kind=kind, who=self.pick((gs.MOVER, gs.OPPONENT)))
        else:
            result = gs.EndResult(kind=kind)
        return gs.EndRule(condition=cond, result=result)

    # -- expressions --

    _LEAF_MASKS = ("empty", "occupied", "center", "corners", "edge", "row",
                   "column", "captured", "hopped", "promoted", "prev_move",
                   "region", "custodial", "corner_custodial")
    _DEEP_MASKS = ("adjacent", "and", "or", "not", "line")

    def mask(self, d):
        options = list(self._LEAF_MASKS)
        if not self.deep(d):
            options += list(self._DEEP_MASKS)
        kind = self.pick(options)
        if kind == "empty":
            return gs.EmptyMask()
        if kind == "occupied":
            return gs.OccupiedMask(who=self.pick(("", gs.MOVER, gs.OPPONENT)))
        if kind == "center":
            return gs.CenterMask()
        if kind == "corners":
            return gs.CornersMask()
        if kind == "edge":
            return gs.EdgeMask(which=self.pick(gs.EDGE_NAMES + ("forward", "backward")))
        if kind == "row":
            return gs.RowMask(index=self.rand.randrange(max(self.board.rows, 1)))
        if kind == "column":
            return gs.ColumnMask(index=self.rand.randrange(max(self.board.cols, 1)))
        if kind == "captured":
            return gs.CapturedMask()
        if kind == "hopped":
            return gs.HoppedMask()
        if kind == "promoted":
            return gs.PromotedMask()
        if kind == "prev_move":
            return gs.PrevMoveMask(who=self.pick((gs.MOVER, gs.OPPONENT)))
        if kind == "region":
            # naive: any name token is grammatical; references may dangle
            name = self.pick(tuple(self.regions) + _REGION_POOL)
            return gs.RegionMask(region=name)
        if kind == "custodial":
            length = self.pick(("any", 1, 2, 3))
            return gs.CustodialMask(piece=self.pick(self.pieces), length=length,
                                    orientation=self.orientation())
        if kind == "corner_custodial":
            return gs.CornerCustodialMask(piece=self.pick(self.pieces))
        if kind == "adjacent":
            return gs.AdjacentMask(inner=self.mask(d + 1),
                                   directions=self.directions(d + 1))
        if kind == "and":
            return gs.MaskAnd(tuple(self.mask(d + 1)
                                    for _ in range(self.repeat(d + 1, 1, 2))))
        if kind == "or":
            return gs.MaskOr(tuple(self.mask(d + 1)
                                   for _ in range(self.repeat(d + 1, 1, 2))))
        if kind == "not":
            return gs.MaskNot(self.mask(d + 1))
        return self.line(d)

    def orientation(self):
        return self.pick(gs.ORIENTATIONS)

    def line(self, d):
        return gs.LineFn(piece=self.pick(self.pieces),
                         length=self.rand.randint(self.cfg.min_line,
                                                  self.cfg.max_line),
                         orientation=self.orientation(),
                         exact=self.rand.random() < 0.2)

    _LEAF_FNS = ("constant", "count", "score", "line")
    _DEEP_FNS = ("add", "multiply", "subtract", "pattern", "connected")

    def function(self, d):
        options = list(self._LEAF_FNS)
        if not self.deep(d):
            options += list(self._DEEP_FNS)
        kind = self.pick(options)
        if kind == "constant":
            return gs.ConstantFn(value=self.rand.randint(1, 10))
        if kind == "count":
            return gs.CountFn(mask=self.mask(d + 1))
        if kind == "score":
            return gs.ScoreFn(who=self.pick((gs.MOVER, gs.OPPONENT)))
        if kind == "line":
            return self.line(d)
        if kind == "add":
            return gs.AddFn(tuple(self.function(d + 1)
                                  for _ in range(self.repeat(d + 1, 1, 2))))
        if kind == "multiply":
            return gs.MultiplyFn(tuple(self.function(d + 1)
                                       for _ in range(self.repeat(d + 1, 1, 2))))
        if kind == "subtract":
            return gs.SubtractFn(a=self.function(d + 1), b=self.function(d + 1))
        if kind == "pattern":
            side = self.rand.randint(1, 3)
            if self.rand.random() < 0.5:
                shape = gs.BoardShape("square", side)
                return gs.PatternFn(piece=self.pick(self.pieces), shape=shape,
                                    rotate=self.rand.random() < 0.3)
            width = self.rand.randint(1, 3)
            offs = tuple(sorted({self.rand.randrange(width * 3)
                                 for _ in range(self.rand.randint(1, 4))}))
            return gs.PatternFn(piece=self.pick(self.pieces), width=width,
                                offsets=offs, rotate=self.rand.random() < 0.3)
        masks = tuple(self.mask(d + 1) for _ in range(self.rand.randint(2, 3)))
        return gs.ConnectedFn(piece=self.pick(self.pieces), masks=masks)

    _LEAF_PREDS = ("function", "exists", "full_board", "mover_is",
                   "no_legal_actions", "passed", "action_was",
                   "can_move_again", "last_move_in")
    _DEEP_PREDS = ("and", "or", "not", "=", ">=", "<=")

    def predicate(self, d):
        options = list(self._LEAF_PREDS)
        if not self.deep(d):
            options += list(self._DEEP_PREDS)
        kind = self.pick(options)
        if kind == "function":
            return gs.FunctionPred(fn=self.function(d + 1))
        if kind == "exists":
            return gs.ExistsPred(mask=self.mask(d + 1))
        if kind == "full_board":
            return gs.FullBoardPred()
        if kind == "mover_is":
            return gs.MoverIsPred(player=self.pick((gs.P1, gs.P2)))
        if kind == "no_legal_actions":
            return gs.NoLegalActionsPred()
        if kind == "passed":
            return gs.PassedPred(who=self.pick((gs.MOVER, gs.OPPONENT, gs.BOTH)))
        if kind == "action_was":
            return gs.ActionWasPred(who=gs.MOVER, kind=self.pick(gs.MOVE_KINDS))
        if kind == "can_move_again":
            return gs.CanMoveAgainPred(kind=self.pick(gs.MOVE_KINDS))
        if kind == "last_move_in":
            return gs.LastMoveInPred(mask=self.mask(d + 1))
        if kind == "and":
            return gs.PredAnd(tuple(self.predicate(d + 1)
                                    for _ in range(self.repeat(d + 1, 1, 2))))
        if kind == "or":
            return gs.PredOr(tuple(self.predicate(d + 1)
                                   for _ in range(self.repeat(d + 1, 1, 2))))
        if kind == "not":
            return gs.PredNot(self.predicate(d + 1))
        if kind == "=":
            return gs.EqualsPred(tuple(self.function(d + 1) for _ in range(2)))
        if kind == ">=":
            return gs.GreaterEqPred(a=self.function(d + 1), b=self.function(d + 1))
        return gs.LessEqPred(a=self.function(d + 1), b=self.function(d + 1))


def sample_game(config=None, seed=None, index=0):
    """One random game program as canonical text."""
    config = config or SamplerConfig()
    if seed is None:
        seed = config.seed
    rand = random.Random(f"{seed}:{index}")
    sampler = _Sampler(config, rand)
    spec = sampler.game(f"sample-{index}")
    return serialize(spec)


def sample_games(config=None):
    config = config or SamplerConfig()
    return [sample_game(config, config.seed, i) for i in range(config.count)]


def generate_and_evaluate(config=None, eval_config=None, progress=None):
    """Sample programs, evaluate each, and build the aggregate row."""
    from .evaluation import EvalConfig, evaluate_game
    config = config or SamplerConfig()
    eval_config = eval_config or EvalConfig()
    reports = []
    for i in range(config.count):
        text = sample_game(config, config.seed, i)
        rep = evaluate_game(text, eval_config)
        reports.append((text, rep))
        if progress is not None:
            progress(i, rep)
    return reports, aggregate(r for _, r in reports)


def aggregate(reports):
    """Playable %, interesting %, and median +- std over playable games."""
    import numpy as np
    reports = list(reports)
    n = len(reports)
    playable = [r for r in reports if r.playable]
    interesting = [r for r in playable if r.interesting]
    scores = np.array([r.gavel_score for r in playable]) if playable else np.zeros(0)
    depths = np.array([r.scores.strategic_depth for r in playable]) \
        if playable else np.zeros(0)
    return {
        "games": n,
        "playable_pct": 100.0 * len(playable) / n if n else 0.0,
        "interesting_pct": 100.0 * len(interesting) / n if n else 0.0,
        "gavel_median": float(np.median(scores)) if len(scores) else 0.0,
        "gavel_std": float(np.std(scores)) if len(scores) else 0.0,
        "depth_median": float(np.median(depths)) if len(depths) else 0.0,
        "depth_std": float(np.std(depths)) if len(depths) else 0.0,
    }

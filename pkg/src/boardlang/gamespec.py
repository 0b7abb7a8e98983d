"""AST node types for game programs.

Every node is a frozen dataclass with tuple-valued children, so parsed
specs are immutable, hashable where needed, and compare structurally
(parse(serialize(s)) == s holds by plain equality).

Player encoding: P1 = 0, P2 = 1. References that are resolved against the
acting player at runtime keep their textual form: "mover" / "opponent" /
"both".
"""

from __future__ import annotations

from dataclasses import dataclass, fields


P1 = 0
P2 = 1

MOVER = "mover"
OPPONENT = "opponent"
BOTH = "both"

TRUE_DIRECTIONS = (
    "up", "down", "left", "right",
    "up_left", "up_right", "down_left", "down_right",
)
DIRECTION_GROUPS = (
    "vertical", "horizontal", "orthogonal", "diagonal",
    "back_diagonal", "forward_diagonal", "any",
)
RELATIVE_DIRECTIONS = (
    "forward", "backward",
    "forward_left", "forward_right", "backward_left", "backward_right",
)
ORIENTATIONS = DIRECTION_GROUPS
EDGE_NAMES = (
    "top", "bottom", "left", "right",
    "top_left", "top_right", "bottom_left", "bottom_right",
)
MOVE_KINDS = ("hop", "slide", "step")
PIECE_SHAPES = ("circle", "square", "triangle", "star", "diamond")


@dataclass(frozen=True)
class Node:
    """Common base so walkers can discover child nodes generically."""

    def children(self):
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, Node):
                out.append((f.name, v))
            elif isinstance(v, tuple):
                for i, item in enumerate(v):
                    if isinstance(item, Node):
                        out.append((f"{f.name}[{i}]", item))
    # nested tuples only occur for (name, value) pairs, which hold no nodes
        return out


def walk(node):
    """Yield (path, node) for node and every descendant, preorder."""
    stack = [("", node)]
    while stack:
        path, n = stack.pop()
        yield path, n
        for name, child in reversed(n.children()):
            stack.append((f"{path}.{name}" if path else name, child))


# ---- equipment ----

@dataclass(frozen=True)
class BoardShape(Node):
    kind: str            # square | rectangle | hexagon | hex_rectangle
    rows: int            # square: n, hexagon: diameter
    cols: int = 0        # rectangle / hex_rectangle only

    def __post_init__(self):
        if self.kind in ("square", "hexagon") and self.cols == 0:
            object.__setattr__(self, "cols", self.rows)


@dataclass(frozen=True)
class PieceDef(Node):
    name: str
    owner: object        # P1 | P2 | "both"


@dataclass(frozen=True)
class RegionDef(Node):
    name: str
    cells: tuple = ()            # literal indices, or
    masks: tuple = ()            # super_mask list / multi-mask expansion


@dataclass(frozen=True)
class Equipment(Node):
    board: BoardShape
    pieces: tuple
    regions: tuple = ()


@dataclass(frozen=True)
class Players(Node):
    count: int
    forward: tuple = ()   # ((P1, dir), (P2, dir)) or empty


# ---- masks ----

@dataclass(frozen=True)
class AdjacentMask(Node):
    inner: Node
    directions: tuple = ()


@dataclass(frozen=True)
class CapturedMask(Node):
    pass


@dataclass(frozen=True)
class CenterMask(Node):
    pass


@dataclass(frozen=True)
class ColumnMask(Node):
    index: int


@dataclass(frozen=True)
class CornersMask(Node):
    pass


@dataclass(frozen=True)
class CornerCustodialMask(Node):
    piece: str
    mover: str = MOVER


@dataclass(frozen=True)
class CustodialMask(Node):
    piece: str
    length: object       # int or "any"
    mover: str = MOVER
    orientation: str = "any"


@dataclass(frozen=True)
class EdgeMask(Node):
    which: str           # edge name or forward/backward


@dataclass(frozen=True)
class EmptyMask(Node):
    pass


@dataclass(frozen=True)
class HoppedMask(Node):
    pass


@dataclass(frozen=True)
class OccupiedMask(Node):
    who: str = ""        # mover | opponent | "" (anyone)


@dataclass(frozen=True)
class PrevMoveMask(Node):
    who: str


@dataclass(frozen=True)
class PromotedMask(Node):
    pass


@dataclass(frozen=True)
class RowMask(Node):
    index: int


@dataclass(frozen=True)
class RegionMask(Node):
    region: str


@dataclass(frozen=True)
class MaskAnd(Node):
    items: tuple


@dataclass(frozen=True)
class MaskOr(Node):
    items: tuple


@dataclass(frozen=True)
class MaskNot(Node):
    item: Node


@dataclass(frozen=True)
class MultiMask(Node):
    kind: str            # corners | edges | edgesNoCorners


# ---- functions ----

@dataclass(frozen=True)
class AddFn(Node):
    items: tuple


@dataclass(frozen=True)
class ConnectedFn(Node):
    piece: str
    masks: object        # MultiMask or tuple of mask nodes
    mover: str = MOVER
    directions: tuple = ()


@dataclass(frozen=True)
class ConstantFn(Node):
    value: int


@dataclass(frozen=True)
class CountFn(Node):
    mask: Node


@dataclass(frozen=True)
class LineFn(Node):
    piece: str
    length: int
    orientation: str = "any"
    exact: bool = False
    player: str = MOVER
    exclude: object = None   # MultiMask or tuple of mask nodes


@dataclass(frozen=True)
class MultiplyFn(Node):
    items: tuple


@dataclass(frozen=True)
class PatternFn(Node):
    piece: str
    width: int = 0           # explicit pattern: width + offsets
    offsets: tuple = ()
    shape: object = None     # or a BoardShape used as a shape
    rotate: bool = False
    player: str = MOVER
    exclude: object = None


@dataclass(frozen=True)
class ScoreFn(Node):
    who: str


@dataclass(frozen=True)
class SubtractFn(Node):
    a: Node
    b: Node


# ---- predicates ----

@dataclass(frozen=True)
class ActionWasPred(Node):
    who: str
    kind: str


@dataclass(frozen=True)
class CanMoveAgainPred(Node):
    kind: str


@dataclass(frozen=True)
class EqualsPred(Node):
    items: tuple


@dataclass(frozen=True)
class ExistsPred(Node):
    mask: Node


@dataclass(frozen=True)
class FullBoardPred(Node):
    pass


@dataclass(frozen=True)
class FunctionPred(Node):
    fn: Node


@dataclass(frozen=True)
class GreaterEqPred(Node):
    a: Node
    b: Node


@dataclass(frozen=True)
class LastMoveInPred(Node):
    mask: Node


@dataclass(frozen=True)
class LessEqPred(Node):
    a: Node
    b: Node


@dataclass(frozen=True)
class MoverIsPred(Node):
    player: int


@dataclass(frozen=True)
class NoLegalActionsPred(Node):
    pass


@dataclass(frozen=True)
class PassedPred(Node):
    who: str             # mover | opponent | both


@dataclass(frozen=True)
class PredAnd(Node):
    items: tuple


@dataclass(frozen=True)
class PredOr(Node):
    items: tuple


@dataclass(frozen=True)
class PredNot(Node):
    item: Node


# ---- effects ----

@dataclass(frozen=True)
class CaptureEffect(Node):
    mask: Node
    mover: str = MOVER
    increment_score: bool = False


@dataclass(frozen=True)
class ExtraTurnEffect(Node):
    who: str = MOVER
    same_piece: bool = False


@dataclass(frozen=True)
class FlipEffect(Node):
    mask: Node
    mover: str = MOVER


@dataclass(frozen=True)
class IncrementScoreEffect(Node):
    who: str
    fn: Node


@dataclass(frozen=True)
class PromoteEffect(Node):
    from_piece: str
    to_piece: str
    mask: Node
    mover: str = MOVER


@dataclass(frozen=True)
class SetScoreEffect(Node):
    who: str
    fn: Node


@dataclass(frozen=True)
class ConditionalEffect(Node):
    condition: Node
    then_effect: Node
    else_effect: object = None


# ---- rules ----

@dataclass(frozen=True)
class StartPlace(Node):
    piece: str
    player: int
    cells: tuple = ()
    masks: tuple = ()


@dataclass(frozen=True)
class HopMove(Node):
    piece: str
    directions: tuple = ()
    over_piece: str = ""     # piece: arg; empty = any piece type
    hop_over: str = ""       # P1/P2/mover/opponent; empty = any owner
    capture: bool = False
    priority: int = 0


@dataclass(frozen=True)
class SlideMove(Node):
    piece: str
    directions: tuple = ()
    distance: int = 0        # 0 = unlimited
    priority: int = 0


@dataclass(frozen=True)
class StepMove(Node):
    piece: str
    directions: tuple = ()
    priority: int = 0


@dataclass(frozen=True)
class PlaceMechanic(Node):
    piece: str
    owner: str = MOVER
    destination: Node = None
    result: object = None
    effects: tuple = ()


@dataclass(frozen=True)
class MoveMechanic(Node):
    moves: tuple = ()
    effects: tuple = ()


@dataclass(frozen=True)
class Phase(Node):
    kind: str                # repeat | once_through
    order: tuple = ()        # player ids
    mechanic: Node = None
    force_pass: bool = False


@dataclass(frozen=True)
class EndResult(Node):
    kind: str                # win | lose | draw | by_score
    who: str = ""            # mover | opponent | both ("" for draw/by_score)


@dataclass(frozen=True)
class EndRule(Node):
    condition: Node
    result: EndResult


@dataclass(frozen=True)
class Rendering(Node):
    colors: tuple = ()       # ((player, color), ...)
    shapes: tuple = ()       # ((piece, shape), ...)


@dataclass(frozen=True)
class GameSpec(Node):
    name: str
    players: Players
    equipment: Equipment
    start: tuple = ()
    phases: tuple = ()
    end_rules: tuple = ()
    rendering: object = None

    def piece_names(self):
        return tuple(p.name for p in self.equipment.pieces)

    def region_names(self):
        return tuple(r.name for r in self.equipment.regions)

    def forward_of(self, player):
        for p, d in self.players.forward:
            if p == player:
                return d
        return None


MASK_TYPES = (
    AdjacentMask, CapturedMask, CenterMask, ColumnMask, CornersMask,
    CornerCustodialMask, CustodialMask, EdgeMask, EmptyMask, HoppedMask,
    OccupiedMask, PrevMoveMask, PromotedMask, RowMask, RegionMask,
    MaskAnd, MaskOr, MaskNot, LineFn,
)
FUNCTION_TYPES = (
    AddFn, ConnectedFn, ConstantFn, CountFn, LineFn, MultiplyFn,
    PatternFn, ScoreFn, SubtractFn,
)
PREDICATE_TYPES = (
    ActionWasPred, CanMoveAgainPred, EqualsPred, ExistsPred, FullBoardPred,
    FunctionPred, GreaterEqPred, LastMoveInPred, LessEqPred, MoverIsPred,
    NoLegalActionsPred, PassedPred, PredAnd, PredOr, PredNot,
)

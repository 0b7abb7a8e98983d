"""boardlang: a board-game description language compiled to fast batched
environments.

Typical use:

    import boardlang
    game = boardlang.load_game(open("games/reversi.ldx").read())
    state = boardlang.engine.init(game, batch_size=64, seed=1)
    mask = boardlang.engine.legal_actions(game, state)
"""

from . import engine  # noqa: F401
from .compiler import CompiledGame, compile_game
from .errors import (ArityError, BoardLangError, CompileError, EmptyMask,
                     IllegalAction, InvalidPattern, InvalidShapeParam,
                     MissingForwardAssignment, ParseError, TerminalState,
                     UnknownKeywordError, ValidationFailure)
from .parser import parse_game, serialize
from .topology import Topology, build_topology, resolve_direction
from .validate import validate

__all__ = [
    "ArityError", "BoardLangError", "CompileError", "CompiledGame",
    "EmptyMask", "IllegalAction", "InvalidPattern", "InvalidShapeParam",
    "MissingForwardAssignment", "ParseError", "TerminalState", "Topology",
    "UnknownKeywordError", "ValidationFailure", "build_topology",
    "compile_game", "engine", "load_game", "parse_game", "resolve_direction",
    "serialize", "validate",
]

__version__ = "0.1.0"


def load_game(text):
    """Parse, validate and compile game text; raises on any failure."""
    spec = parse_game(text)
    topo = build_topology(spec.equipment.board)
    report = validate(spec, topo)
    if not report.ok:
        raise ValidationFailure(report)
    return compile_game(spec, topo)

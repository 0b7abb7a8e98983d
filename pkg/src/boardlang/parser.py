"""Tokenizer, recursive-descent parser and canonical serializer for game text.

The surface syntax is s-expressions with `//` line comments and keyword
arguments (``direction:``, ``priority:``, ...) that may follow the
positional arguments of a form in any order.
"""

from __future__ import annotations

import re

from . import gamespec as gs
from .errors import ArityError, ParseError, UnknownKeywordError

LPAREN = "("
RPAREN = ")"

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<string>"[^"\n]*")
  | (?P<kwarg>[a-zA-Z_][a-zA-Z0-9_]*:)
  | (?P<variable>\?[a-z][a-z0-9]*)
  | (?P<atom>[a-zA-Z0-9_=<>]+)
    """,
    re.VERBOSE,
)

_INT_RE = re.compile(r"(0|[1-9][0-9]*)\Z")


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self):
        return f"Token({self.kind!r}, {self.text!r}, {self.line}:{self.col})"


def tokenize(text):
    tokens = []
    pos = 0
    line = 1
    line_start = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            col = pos - line_start + 1
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        tok_text = m.group()
        col = pos - line_start + 1
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, tok_text, line, col))
        newlines = tok_text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + tok_text.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, n - line_start + 1))
    return tokens


_PLAYER_TOKENS = {"P1": gs.P1, "P2": gs.P2}
_MOVER_TOKENS = ("mover", "opponent")
_DIRECTION_TOKENS = set(gs.TRUE_DIRECTIONS) | set(gs.DIRECTION_GROUPS) | set(gs.RELATIVE_DIRECTIONS)
_SHAPE_KEYWORDS = ("square", "rectangle", "hexagon", "hex_rectangle")

_MASK_KEYWORDS = {
    "adjacent", "captured", "center", "column", "corners", "corner_custodial",
    "custodial", "edge", "empty", "hopped", "occupied", "prev_move",
    "promoted", "row", "region", "line", "and", "or", "not",
}
_FUNCTION_KEYWORDS = {
    "add", "connected", "count", "line", "multiply", "pattern", "score",
    "subtract",
}
_PREDICATE_KEYWORDS = {
    "action_was", "can_move_again", "=", "exists", "full_board", ">=",
    "last_move_in", "<=", "mover_is", "no_legal_actions", "passed",
    "and", "or", "not",
}
_EFFECT_KEYWORDS = {
    "capture", "extra_turn", "flip", "increment_score", "promote",
    "set_score", "if",
}


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    # -- token plumbing --

    def peek(self, ahead=0):
        i = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[i]

    def next(self):
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def fail(self, message, tok=None, expected=None, cls=ParseError):
        tok = tok or self.peek()
        raise cls(message, tok.line, tok.col, expected)

    def expect_lparen(self, what):
        tok = self.next()
        if tok.kind != "lparen":
            self.fail(f"expected '(' to open {what}, got {tok.text or 'end of input'}",
                      tok, expected={"("})
        return tok

    def expect_rparen(self, what):
        tok = self.next()
        if tok.kind != "rparen":
            self.fail(f"expected ')' to close {what}, got {tok.text or 'end of input'}",
                      tok, expected={")"})
        return tok

    def expect_keyword(self, word):
        tok = self.next()
        if tok.kind != "atom" or tok.text != word:
            self.fail(f"expected {word!r}, got {tok.text or 'end of input'}",
                      tok, expected={word})
        return tok

    def expect_string(self, what):
        tok = self.next()
        if tok.kind != "string":
            self.fail(f"expected a quoted {what} name, got {tok.text or 'end of input'}",
                      tok, expected={'"..."'}, cls=ArityError)
        return tok.text[1:-1]

    def expect_int(self, what, minimum=0):
        tok = self.next()
        if tok.kind != "atom" or not _INT_RE.match(tok.text):
            self.fail(f"expected an integer for {what}, got {tok.text or 'end of input'}",
                      tok, cls=ArityError)
        value = int(tok.text)
        if value < minimum:
            self.fail(f"{what} must be >= {minimum}, got {value}", tok, cls=ArityError)
        return value

    def expect_bool(self, what):
        tok = self.next()
        if tok.kind == "atom" and tok.text in ("true", "false"):
            return tok.text == "true"
        self.fail(f"expected true/false for {what}, got {tok.text or 'end of input'}",
                  tok, expected={"true", "false"}, cls=ArityError)

    def expect_player(self):
        tok = self.next()
        if tok.kind == "atom" and tok.text in _PLAYER_TOKENS:
            return _PLAYER_TOKENS[tok.text]
        self.fail(f"expected P1 or P2, got {tok.text or 'end of input'}",
                  tok, expected={"P1", "P2"}, cls=ArityError)

    def expect_who(self, allow_players=False, allow_both=False, what="mover/opponent"):
        tok = self.next()
        if tok.kind == "atom":
            if tok.text in _MOVER_TOKENS:
                return tok.text
            if allow_players and tok.text in _PLAYER_TOKENS:
                return _PLAYER_TOKENS[tok.text]
            if allow_both and tok.text == "both":
                return gs.BOTH
        exp = set(_MOVER_TOKENS)
        if allow_players:
            exp |= {"P1", "P2"}
        if allow_both:
            exp.add("both")
        self.fail(f"expected {what}, got {tok.text or 'end of input'}",
                  tok, expected=exp, cls=ArityError)

    def at_lparen(self):
        return self.peek().kind == "lparen"

    def head_keyword(self):
        """Keyword after an upcoming '(' (empty string when absent)."""
        tok = self.peek(1)
        return tok.text if tok.kind in ("atom", "kwarg") else ""

    def guard_variable(self):
        tok = self.peek()
        if tok.kind == "variable":
            self.fail(f"variables ({tok.text}) are reserved and unsupported",
                      tok, cls=UnknownKeywordError)

    # -- kwargs --

    def parse_kwargs(self, spec, form):
        """Parse trailing ``name:`` arguments until ')'.

        spec maps kwarg name -> parse callable. Duplicate or unknown kwargs
        are errors.
        """
        seen = {}
        while True:
            tok = self.peek()
            if tok.kind == "rparen":
                break
            if tok.kind != "kwarg":
                self.fail(f"unexpected {tok.text!r} in {form} (expected a keyword argument or ')')",
                          tok, expected=set(spec) | {")"})
            name = tok.text[:-1]
            if name not in spec:
                self.fail(f"unknown keyword argument {tok.text!r} in {form}",
                          tok, expected=set(k + ":" for k in spec),
                          cls=UnknownKeywordError)
            if name in seen:
                self.fail(f"duplicate keyword argument {tok.text!r} in {form}",
                          tok, cls=ArityError)
            self.next()
            seen[name] = spec[name]()
        return seen

    def parse_direction_value(self):
        if self.at_lparen():
            self.next()
            dirs = []
            while self.peek().kind != "rparen":
                dirs.append(self._one_direction())
            if not dirs:
                self.fail("direction list must not be empty", cls=ArityError)
            self.expect_rparen("direction list")
            return tuple(dirs)
        return (self._one_direction(),)

    def _one_direction(self):
        tok = self.next()
        if tok.kind == "atom" and tok.text in _DIRECTION_TOKENS:
            return tok.text
        self.fail(f"expected a direction, got {tok.text or 'end of input'}",
                  tok, expected=_DIRECTION_TOKENS, cls=UnknownKeywordError)

    def parse_orientation_value(self):
        tok = self.next()
        if tok.kind == "atom" and tok.text in gs.ORIENTATIONS:
            return tok.text
        self.fail(f"expected an orientation, got {tok.text or 'end of input'}",
                  tok, expected=set(gs.ORIENTATIONS), cls=UnknownKeywordError)

    # -- game --

    def parse_game(self):
        self.expect_lparen("game")
        self.expect_keyword("game")
        name = self.expect_string("game")
        players = self.parse_players()
        equipment = self.parse_equipment()
        start, phases, end_rules = self.parse_rules()
        rendering = None
        if self.at_lparen() and self.head_keyword() == "rendering":
            rendering = self.parse_rendering()
        self.expect_rparen("game")
        tok = self.peek()
        if tok.kind != "eof":
            self.fail(f"unexpected {tok.text!r} after game form", tok)
        return gs.GameSpec(name=name, players=players, equipment=equipment,
                           start=start, phases=phases, end_rules=end_rules,
                           rendering=rendering)

    def parse_players(self):
        self.expect_lparen("players")
        self.expect_keyword("players")
        count = self.expect_int("player count", minimum=1)
        forward = ()
        if self.at_lparen():
            self.expect_lparen("set_forward")
            self.expect_keyword("set_forward")
            assigns = []
            for expected_player in ("P1", "P2"):
                self.expect_lparen("forward assignment")
                tok = self.next()
                if tok.text != expected_player:
                    self.fail(f"expected {expected_player}, got {tok.text!r}",
                              tok, expected={expected_player})
                d = self.next()
                if d.kind != "atom" or d.text not in ("up", "down", "left", "right"):
                    self.fail(f"expected up/down/left/right, got {d.text!r}",
                              d, expected={"up", "down", "left", "right"})
                assigns.append((_PLAYER_TOKENS[expected_player], d.text))
                self.expect_rparen("forward assignment")
            self.expect_rparen("set_forward")
            forward = tuple(assigns)
        self.expect_rparen("players")
        return gs.Players(count=count, forward=forward)

    def parse_equipment(self):
        self.expect_lparen("equipment")
        self.expect_keyword("equipment")
        self.expect_lparen("board")
        self.expect_keyword("board")
        board = self.parse_shape()
        self.expect_rparen("board")
        self.expect_lparen("pieces")
        self.expect_keyword("pieces")
        pieces = []
        while self.at_lparen():
            self.expect_lparen("piece definition")
            name = self.expect_string("piece")
            owner = self.expect_who(allow_players=True, allow_both=True,
                                    what="P1, P2 or both")
            if owner in _MOVER_TOKENS:
                self.fail(f"piece owner must be P1, P2 or both, got {owner!r}",
                          cls=ArityError)
            self.expect_rparen("piece definition")
            pieces.append(gs.PieceDef(name=name, owner=owner))
        if not pieces:
            self.fail("pieces section must declare at least one piece", cls=ArityError)
        self.expect_rparen("pieces")
        regions = []
        if self.at_lparen() and self.head_keyword() == "regions":
            self.expect_lparen("regions")
            self.expect_keyword("regions")
            while self.at_lparen():
                self.expect_lparen("region definition")
                name = self.expect_string("region")
                cells, masks = self.parse_indices_or_multimask("region definition")
                self.expect_rparen("region definition")
                regions.append(gs.RegionDef(name=name, cells=cells, masks=masks))
            if not regions:
                self.fail("regions section must declare at least one region",
                          cls=ArityError)
            self.expect_rparen("regions")
        self.expect_rparen("equipment")
        return gs.Equipment(board=board, pieces=tuple(pieces), regions=tuple(regions))

    def parse_shape(self):
        self.expect_lparen("board shape")
        tok = self.next()
        if tok.kind != "atom" or tok.text not in _SHAPE_KEYWORDS:
            self.fail(f"expected a board shape, got {tok.text or 'end of input'}",
                      tok, expected=set(_SHAPE_KEYWORDS), cls=UnknownKeywordError)
        kind = tok.text
        if kind == "square":
            shape = gs.BoardShape("square", self.expect_int("board size", minimum=1))
        elif kind == "hexagon":
            d = self.expect_int("hexagon diameter", minimum=1)
            if d % 2 == 0:
                self.fail(f"hexagon diameter must be odd, got {d}", tok, cls=ArityError)
            shape = gs.BoardShape("hexagon", d)
        else:
            rows = self.expect_int("row count", minimum=1)
            cols = self.expect_int("column count", minimum=1)
            shape = gs.BoardShape(kind, rows, cols)
        self.expect_rparen("board shape")
        return shape

    def parse_indices_or_multimask(self, form):
        """`(int+)` index list, a multi-mask keyword form, or mask list."""
        self.expect_lparen(form)
        tok = self.peek()
        if tok.kind == "atom" and _INT_RE.match(tok.text):
            cells = []
            while self.peek().kind == "atom" and _INT_RE.match(self.peek().text):
                cells.append(self.expect_int("cell index"))
            self.expect_rparen(form)
            if not cells:
                self.fail("index list must not be empty", cls=ArityError)
            return tuple(cells), ()
        # rewind the '(' and hand off to the multi-mask parser
        self.pos -= 1
        return (), self.parse_multi_mask_arg(form)

    def parse_multi_mask_arg(self, form):
        """multi_mask | super_mask | "(" super_mask+ ")" -> tuple of nodes.

        A plain multi-mask keyword is kept as a single MultiMask node.
        """
        if not self.at_lparen():
            self.fail(f"expected a mask in {form}", expected={"("})
        head = self.head_keyword()
        if head in ("edges", "edgesNoCorners"):
            self.next()
            self.next()
            self.expect_rparen(head)
            return (gs.MultiMask(head),)
        if head == "corners":
            # `(corners)` in a multi-mask position means the multi-mask
            self.next()
            self.next()
            self.expect_rparen("corners")
            return (gs.MultiMask("corners"),)
        if head == "" and self.peek(1).kind == "lparen":
            # parenthesized list of super-masks
            self.next()
            masks = []
            while self.peek().kind != "rparen":
                masks.append(self.parse_super_mask())
            self.expect_rparen(form)
            if not masks:
                self.fail("mask list must not be empty", cls=ArityError)
            return tuple(masks)
        return (self.parse_super_mask(),)

    # -- rules --

    def parse_rules(self):
        self.expect_lparen("rules")
        self.expect_keyword("rules")
        start = ()
        if self.at_lparen() and self.head_keyword() == "start":
            start = self.parse_start()
        phases = self.parse_play()
        end_rules = self.parse_end()
        self.expect_rparen("rules")
        return start, phases, end_rules

    def parse_start(self):
        self.expect_lparen("start")
        self.expect_keyword("start")
        rules = []
        while self.at_lparen():
            self.expect_lparen("start placement")
            self.expect_keyword("place")
            piece = self.expect_string("piece")
            player = self.expect_player()
            cells, masks = self.parse_indices_or_multimask("start placement")
            self.expect_rparen("start placement")
            rules.append(gs.StartPlace(piece=piece, player=player,
                                       cells=cells, masks=masks))
        if not rules:
            self.fail("start section must contain at least one placement",
                      cls=ArityError)
        self.expect_rparen("start")
        return tuple(rules)

    def parse_play(self):
        self.expect_lparen("play")
        self.expect_keyword("play")
        phases = []
        while self.at_lparen():
            phases.append(self.parse_phase())
        if not phases:
            self.fail("play section must contain at least one phase", cls=ArityError)
        self.expect_rparen("play")
        return tuple(phases)

    def parse_phase(self):
        self.expect_lparen("play phase")
        tok = self.next()
        if tok.kind != "atom" or tok.text not in ("repeat", "once_through"):
            self.fail(f"expected repeat or once_through, got {tok.text or 'end of input'}",
                      tok, expected={"repeat", "once_through"}, cls=UnknownKeywordError)
        kind = tok.text
        self.expect_lparen("mover order")
        order = []
        while self.peek().kind == "atom" and self.peek().text in _PLAYER_TOKENS:
            order.append(_PLAYER_TOKENS[self.next().text])
        if not order:
            self.fail("mover order must name at least one player", cls=ArityError)
        self.expect_rparen("mover order")
        mechanic = self.parse_mechanic()
        force_pass = False
        if self.at_lparen() and self.head_keyword() == "force_pass":
            self.next()
            self.next()
            self.expect_rparen("force_pass")
            force_pass = True
        self.expect_rparen("play phase")
        return gs.Phase(kind=kind, order=tuple(order), mechanic=mechanic,
                        force_pass=force_pass)

    def parse_mechanic(self):
        if not self.at_lparen():
            self.fail("expected a play mechanic", expected={"("})
        head = self.head_keyword()
        if head == "place":
            return self.parse_place_mechanic()
        if head == "move":
            return self.parse_move_mechanic()
        self.fail(f"expected place or move, got {head!r}",
                  self.peek(1), expected={"place", "move"}, cls=UnknownKeywordError)

    def parse_place_mechanic(self):
        self.expect_lparen("place")
        self.expect_keyword("place")
        piece = self.expect_string("piece")
        owner = gs.MOVER
        tok = self.peek()
        if tok.kind == "atom" and tok.text in _MOVER_TOKENS:
            owner = self.next().text
        self.expect_lparen("destination")
        self.expect_keyword("destination")
        destination = self.parse_super_mask()
        self.expect_rparen("destination")
        result = None
        if self.at_lparen() and self.head_keyword() == "result":
            self.next()
            self.next()
            result = self.parse_super_predicate()
            self.expect_rparen("result")
        effects = self.parse_effects_opt()
        self.expect_rparen("place")
        return gs.PlaceMechanic(piece=piece, owner=owner, destination=destination,
                                result=result, effects=effects)

    def parse_move_mechanic(self):
        self.expect_lparen("move")
        self.expect_keyword("move")
        if not self.at_lparen():
            self.fail("expected a move type", expected={"("})
        if self.head_keyword() == "or":
            self.next()
            self.next()
            moves = []
            while self.at_lparen():
                moves.append(self.parse_move_type())
            if not moves:
                self.fail("move (or ...) needs at least one move type", cls=ArityError)
            self.expect_rparen("move alternatives")
        else:
            moves = [self.parse_move_type()]
        effects = self.parse_effects_opt()
        self.expect_rparen("move")
        return gs.MoveMechanic(moves=tuple(moves), effects=effects)

    def parse_move_type(self):
        self.expect_lparen("move type")
        tok = self.next()
        if tok.kind != "atom" or tok.text not in gs.MOVE_KINDS:
            self.fail(f"expected hop, slide or step, got {tok.text or 'end of input'}",
                      tok, expected=set(gs.MOVE_KINDS), cls=UnknownKeywordError)
        kind = tok.text
        piece = self.expect_string("piece")
        if kind == "hop":
            kw = self.parse_kwargs({
                "direction": self.parse_direction_value,
                "piece": lambda: self.expect_string("piece"),
                "hop_over": lambda: self.expect_who(allow_players=True,
                                                    what="P1/P2/mover/opponent"),
                "capture": lambda: self.expect_bool("capture"),
                "priority": lambda: self.expect_int("priority"),
            }, "hop")
            node = gs.HopMove(piece=piece,
                              directions=kw.get("direction", ()),
                              over_piece=kw.get("piece", ""),
                              hop_over=_who_str(kw.get("hop_over", "")),
                              capture=kw.get("capture", False),
                              priority=kw.get("priority", 0))
        elif kind == "slide":
            kw = self.parse_kwargs({
                "direction": self.parse_direction_value,
                "distance": lambda: self.expect_int("distance", minimum=1),
                "priority": lambda: self.expect_int("priority"),
            }, "slide")
            node = gs.SlideMove(piece=piece,
                                directions=kw.get("direction", ()),
                                distance=kw.get("distance", 0),
                                priority=kw.get("priority", 0))
        else:
            kw = self.parse_kwargs({
                "direction": self.parse_direction_value,
                "priority": lambda: self.expect_int("priority"),
            }, "step")
            node = gs.StepMove(piece=piece,
                               directions=kw.get("direction", ()),
                               priority=kw.get("priority", 0))
        self.expect_rparen("move type")
        return node

    def parse_effects_opt(self):
        if not (self.at_lparen() and self.head_keyword() == "effects"):
            return ()
        self.next()
        self.next()
        effects = []
        while self.at_lparen():
            effects.append(self.parse_effect(allow_conditional=True))
        if not effects:
            self.fail("effects section must contain at least one effect",
                      cls=ArityError)
        self.expect_rparen("effects")
        return tuple(effects)

    def parse_effect(self, allow_conditional):
        if not self.at_lparen():
            self.fail("expected an effect", expected={"("})
        head = self.head_keyword()
        if head not in _EFFECT_KEYWORDS or (head == "if" and not allow_conditional):
            self.fail(f"expected an effect, got {head!r}", self.peek(1),
                      expected=_EFFECT_KEYWORDS, cls=UnknownKeywordError)
        self.next()
        self.next()
        if head == "if":
            condition = self.parse_super_predicate()
            then_effect = self.parse_effect(allow_conditional=False)
            else_effect = None
            tok = self.peek()
            if tok.kind == "atom" and tok.text == "else":
                self.next()
                else_effect = self.parse_effect(allow_conditional=False)
            self.expect_rparen("conditional effect")
            return gs.ConditionalEffect(condition=condition, then_effect=then_effect,
                                        else_effect=else_effect)
        if head == "capture":
            mask = self.parse_super_mask()
            kw = self.parse_kwargs({
                "mover": lambda: self.expect_who(allow_both=True),
                "increment_score": lambda: self.expect_bool("increment_score"),
            }, "capture")
            self.expect_rparen("capture")
            return gs.CaptureEffect(mask=mask, mover=kw.get("mover", gs.MOVER),
                                    increment_score=kw.get("increment_score", False))
        if head == "extra_turn":
            who = self.expect_who()
            kw = self.parse_kwargs({
                "same_piece": lambda: self.expect_bool("same_piece"),
            }, "extra_turn")
            self.expect_rparen("extra_turn")
            return gs.ExtraTurnEffect(who=who, same_piece=kw.get("same_piece", False))
        if head == "flip":
            mask = self.parse_super_mask()
            kw = self.parse_kwargs({
                "mover": lambda: self.expect_who(allow_both=True),
            }, "flip")
            self.expect_rparen("flip")
            return gs.FlipEffect(mask=mask, mover=kw.get("mover", gs.MOVER))
        if head == "promote":
            from_piece = self.expect_string("piece")
            to_piece = self.expect_string("piece")
            mask = self.parse_super_mask()
            kw = self.parse_kwargs({
                "mover": lambda: self.expect_who(allow_both=True),
            }, "promote")
            self.expect_rparen("promote")
            return gs.PromoteEffect(from_piece=from_piece, to_piece=to_piece,
                                    mask=mask, mover=kw.get("mover", gs.MOVER))
        # increment_score / set_score
        who = self.expect_who()
        fn = self.parse_function()
        self.expect_rparen(head)
        if head == "increment_score":
            return gs.IncrementScoreEffect(who=who, fn=fn)
        return gs.SetScoreEffect(who=who, fn=fn)

    def parse_end(self):
        self.expect_lparen("end")
        self.expect_keyword("end")
        rules = []
        while self.at_lparen():
            self.expect_lparen("end rule")
            self.expect_keyword("if")
            condition = self.parse_super_predicate()
            result = self.parse_end_result()
            self.expect_rparen("end rule")
            rules.append(gs.EndRule(condition=condition, result=result))
        if not rules:
            self.fail("end section must contain at least one rule", cls=ArityError)
        self.expect_rparen("end")
        return tuple(rules)

    def parse_end_result(self):
        self.expect_lparen("end result")
        tok = self.next()
        if tok.kind == "atom" and tok.text in ("draw", "by_score"):
            self.expect_rparen("end result")
            return gs.EndResult(kind=tok.text)
        if tok.kind == "atom" and (tok.text in _MOVER_TOKENS or tok.text == "both"):
            who = tok.text
            verdict = self.next()
            if verdict.kind != "atom" or verdict.text not in ("win", "lose"):
                self.fail(f"expected win or lose, got {verdict.text or 'end of input'}",
                          verdict, expected={"win", "lose"}, cls=ArityError)
            self.expect_rparen("end result")
            return gs.EndResult(kind=verdict.text, who=who)
        self.fail(f"expected an end result, got {tok.text or 'end of input'}",
                  tok, expected={"mover", "opponent", "both", "draw", "by_score"},
                  cls=UnknownKeywordError)

    def parse_rendering(self):
        self.expect_lparen("rendering")
        self.expect_keyword("rendering")
        colors = []
        shapes = []
        while self.at_lparen():
            head = self.head_keyword()
            if head == "color":
                self.next()
                self.next()
                player = self.expect_player()
                tok = self.next()
                if tok.kind != "atom" or tok.text not in ("white", "black"):
                    self.fail(f"expected white or black, got {tok.text!r}",
                              tok, expected={"white", "black"}, cls=UnknownKeywordError)
                colors.append((player, tok.text))
                self.expect_rparen("color")
            elif head == "shape":
                self.next()
                self.next()
                piece = self.expect_string("piece")
                tok = self.next()
                if tok.kind != "atom" or tok.text not in gs.PIECE_SHAPES:
                    self.fail(f"expected a piece shape, got {tok.text!r}",
                              tok, expected=set(gs.PIECE_SHAPES),
                              cls=UnknownKeywordError)
                shapes.append((piece, tok.text))
                self.expect_rparen("shape")
            else:
                self.fail(f"expected color or shape, got {head!r}", self.peek(1),
                          expected={"color", "shape"}, cls=UnknownKeywordError)
        if not colors and not shapes:
            self.fail("rendering section must contain at least one detail",
                      cls=ArityError)
        self.expect_rparen("rendering")
        return gs.Rendering(colors=tuple(colors), shapes=tuple(shapes))

    # -- masks --

    def parse_super_mask(self):
        self.guard_variable()
        if not self.at_lparen():
            self.fail("expected a mask", expected={"("})
        head = self.head_keyword()
        if head in ("and", "or", "not"):
            self.next()
            self.next()
            items = []
            while self.at_lparen():
                items.append(self.parse_super_mask())
            if not items:
                self.fail(f"({head} ...) mask needs at least one operand",
                          cls=ArityError)
            if head == "not" and len(items) != 1:
                self.fail("(not ...) mask takes exactly one operand", cls=ArityError)
            self.expect_rparen(f"{head} mask")
            if head == "and":
                return gs.MaskAnd(tuple(items))
            if head == "or":
                return gs.MaskOr(tuple(items))
            return gs.MaskNot(items[0])
        if head == "line":
            return self.parse_line()
        if head not in _MASK_KEYWORDS:
            self.fail(f"unknown mask {head!r}", self.peek(1),
                      expected=_MASK_KEYWORDS, cls=UnknownKeywordError)
        self.next()
        self.next()
        node = self._parse_mask_body(head)
        self.expect_rparen(f"{head} mask")
        return node

    def _parse_mask_body(self, head):
        if head == "adjacent":
            inner = self.parse_super_mask()
            kw = self.parse_kwargs({"direction": self.parse_direction_value},
                                   "adjacent")
            return gs.AdjacentMask(inner=inner, directions=kw.get("direction", ()))
        if head == "captured":
            return gs.CapturedMask()
        if head == "center":
            return gs.CenterMask()
        if head == "column":
            return gs.ColumnMask(index=self.expect_int("column index"))
        if head == "corners":
            return gs.CornersMask()
        if head == "corner_custodial":
            piece = self.expect_string("piece")
            kw = self.parse_kwargs({"mover": lambda: self.expect_who(allow_both=True)},
                                   "corner_custodial")
            return gs.CornerCustodialMask(piece=piece, mover=kw.get("mover", gs.MOVER))
        if head == "custodial":
            piece = self.expect_string("piece")
            tok = self.next()
            if tok.kind == "atom" and tok.text == "any":
                length = "any"
            elif tok.kind == "atom" and _INT_RE.match(tok.text) and int(tok.text) >= 1:
                length = int(tok.text)
            else:
                self.fail(f"custodial length must be a positive integer or any, got {tok.text!r}",
                          tok, cls=ArityError)
            kw = self.parse_kwargs({
                "mover": lambda: self.expect_who(allow_both=True),
                "orientation": self.parse_orientation_value,
            }, "custodial")
            return gs.CustodialMask(piece=piece, length=length,
                                    mover=kw.get("mover", gs.MOVER),
                                    orientation=kw.get("orientation", "any"))
        if head == "edge":
            tok = self.next()
            valid = set(gs.EDGE_NAMES) | {"forward", "backward"}
            if tok.kind != "atom" or tok.text not in valid:
                self.fail(f"unknown edge {tok.text!r}", tok, expected=valid,
                          cls=UnknownKeywordError)
            return gs.EdgeMask(which=tok.text)
        if head == "empty":
            return gs.EmptyMask()
        if head == "hopped":
            return gs.HoppedMask()
        if head == "occupied":
            tok = self.peek()
            who = ""
            if tok.kind == "atom" and tok.text in _MOVER_TOKENS:
                who = self.next().text
            return gs.OccupiedMask(who=who)
        if head == "prev_move":
            return gs.PrevMoveMask(who=self.expect_who())
        if head == "promoted":
            return gs.PromotedMask()
        if head == "row":
            return gs.RowMask(index=self.expect_int("row index"))
        if head == "region":
            return gs.RegionMask(region=self.expect_string("region"))
        raise AssertionError(head)

    # -- functions --

    def parse_function(self):
        self.guard_variable()
        tok = self.peek()
        if tok.kind == "atom" and _INT_RE.match(tok.text):
            return gs.ConstantFn(value=self.expect_int("constant", minimum=1))
        if not self.at_lparen():
            self.fail("expected a function", expected={"("})
        head = self.head_keyword()
        if head == "line":
            return self.parse_line()
        if head == "pattern":
            return self.parse_pattern()
        if head not in _FUNCTION_KEYWORDS:
            self.fail(f"unknown function {head!r}", self.peek(1),
                      expected=_FUNCTION_KEYWORDS, cls=UnknownKeywordError)
        self.next()
        self.next()
        if head in ("add", "multiply"):
            items = []
            while self.peek().kind != "rparen":
                items.append(self.parse_function())
            if not items:
                self.fail(f"({head} ...) needs at least one operand", cls=ArityError)
            self.expect_rparen(head)
            return gs.AddFn(tuple(items)) if head == "add" else gs.MultiplyFn(tuple(items))
        if head == "connected":
            piece = self.expect_string("piece")
            masks = self.parse_multi_mask_arg("connected")
            kw = self.parse_kwargs({
                "mover": lambda: self.expect_who(allow_both=True),
                "direction": self.parse_direction_value,
            }, "connected")
            node = gs.ConnectedFn(piece=piece,
                                  masks=masks[0] if len(masks) == 1 and isinstance(masks[0], gs.MultiMask) else masks,
                                  mover=kw.get("mover", gs.MOVER),
                                  directions=kw.get("direction", ()))
            self.expect_rparen("connected")
            return node
        if head == "count":
            mask = self.parse_super_mask()
            self.expect_rparen("count")
            return gs.CountFn(mask=mask)
        if head == "score":
            who = self.expect_who()
            self.expect_rparen("score")
            return gs.ScoreFn(who=who)
        if head == "subtract":
            a = self.parse_function()
            b = self.parse_function()
            self.expect_rparen("subtract")
            return gs.SubtractFn(a=a, b=b)
        raise AssertionError(head)

    def parse_line(self):
        self.expect_lparen("line")
        self.expect_keyword("line")
        piece = self.expect_string("piece")
        length = self.expect_int("line length", minimum=1)
        kw = self.parse_kwargs({
            "orientation": self.parse_orientation_value,
            "exact": lambda: self.expect_bool("exact"),
            "player": lambda: self.expect_who(allow_players=True),
            "exclude": lambda: self.parse_multi_mask_arg("exclude"),
        }, "line")
        self.expect_rparen("line")
        exclude = kw.get("exclude")
        if exclude is not None and len(exclude) == 1 and isinstance(exclude[0], gs.MultiMask):
            exclude = exclude[0]
        return gs.LineFn(piece=piece, length=length,
                         orientation=kw.get("orientation", "any"),
                         exact=kw.get("exact", False),
                         player=_who_str(kw.get("player", gs.MOVER)),
                         exclude=exclude)

    def parse_pattern(self):
        self.expect_lparen("pattern")
        self.expect_keyword("pattern")
        piece = self.expect_string("piece")
        if not self.at_lparen():
            self.fail("expected a pattern or shape argument", expected={"("})
        width = 0
        offsets = ()
        shape = None
        if self.head_keyword() in _SHAPE_KEYWORDS:
            shape = self.parse_shape()
        else:
            self.expect_lparen("pattern argument")
            width = self.expect_int("pattern width", minimum=1)
            self.expect_lparen("pattern offsets")
            cells = []
            while self.peek().kind == "atom" and _INT_RE.match(self.peek().text):
                cells.append(self.expect_int("pattern offset"))
            if not cells:
                self.fail("pattern offsets must not be empty", cls=ArityError)
            self.expect_rparen("pattern offsets")
            self.expect_rparen("pattern argument")
            offsets = tuple(cells)
        kw = self.parse_kwargs({
            "rotate": lambda: self.expect_bool("rotate"),
            "player": lambda: self.expect_who(allow_players=True),
            "exclude": lambda: self.parse_multi_mask_arg("exclude"),
        }, "pattern")
        self.expect_rparen("pattern")
        exclude = kw.get("exclude")
        if exclude is not None and len(exclude) == 1 and isinstance(exclude[0], gs.MultiMask):
            exclude = exclude[0]
        return gs.PatternFn(piece=piece, width=width, offsets=offsets, shape=shape,
                            rotate=kw.get("rotate", False),
                            player=_who_str(kw.get("player", gs.MOVER)),
                            exclude=exclude)

    # -- predicates --

    def parse_super_predicate(self):
        self.guard_variable()
        tok = self.peek()
        if tok.kind == "atom" and _INT_RE.match(tok.text):
            return gs.FunctionPred(fn=self.parse_function())
        if not self.at_lparen():
            self.fail("expected a predicate", expected={"("})
        head = self.head_keyword()
        if head in ("and", "or", "not"):
            self.next()
            self.next()
            items = []
            while self.peek().kind != "rparen":
                items.append(self.parse_super_predicate())
            if not items:
                self.fail(f"({head} ...) predicate needs at least one operand",
                          cls=ArityError)
            if head == "not" and len(items) != 1:
                self.fail("(not ...) predicate takes exactly one operand",
                          cls=ArityError)
            self.expect_rparen(f"{head} predicate")
            if head == "and":
                return gs.PredAnd(tuple(items))
            if head == "or":
                return gs.PredOr(tuple(items))
            return gs.PredNot(items[0])
        if head in _FUNCTION_KEYWORDS and head not in _PREDICATE_KEYWORDS:
            return gs.FunctionPred(fn=self.parse_function())
        if head not in _PREDICATE_KEYWORDS:
            self.fail(f"unknown predicate {head!r}", self.peek(1),
                      expected=_PREDICATE_KEYWORDS | _FUNCTION_KEYWORDS,
                      cls=UnknownKeywordError)
        self.next()
        self.next()
        node = self._parse_predicate_body(head)
        self.expect_rparen(f"{head} predicate")
        return node

    def _parse_predicate_body(self, head):
        if head == "action_was":
            who = self.expect_who()
            tok = self.next()
            if tok.kind != "atom" or tok.text not in gs.MOVE_KINDS:
                self.fail(f"expected hop, slide or step, got {tok.text!r}",
                          tok, expected=set(gs.MOVE_KINDS), cls=UnknownKeywordError)
            return gs.ActionWasPred(who=who, kind=tok.text)
        if head == "can_move_again":
            tok = self.next()
            if tok.kind != "atom" or tok.text not in gs.MOVE_KINDS:
                self.fail(f"expected hop, slide or step, got {tok.text!r}",
                          tok, expected=set(gs.MOVE_KINDS), cls=UnknownKeywordError)
            return gs.CanMoveAgainPred(kind=tok.text)
        if head == "=":
            items = []
            while self.peek().kind != "rparen":
                items.append(self.parse_function())
            if len(items) < 2:
                self.fail("(= ...) needs at least two functions", cls=ArityError)
            return gs.EqualsPred(items=tuple(items))
        if head == "exists":
            return gs.ExistsPred(mask=self.parse_super_mask())
        if head == "full_board":
            return gs.FullBoardPred()
        if head == ">=":
            return gs.GreaterEqPred(a=self.parse_function(), b=self.parse_function())
        if head == "last_move_in":
            return gs.LastMoveInPred(mask=self.parse_super_mask())
        if head == "<=":
            return gs.LessEqPred(a=self.parse_function(), b=self.parse_function())
        if head == "mover_is":
            return gs.MoverIsPred(player=self.expect_player())
        if head == "no_legal_actions":
            return gs.NoLegalActionsPred()
        if head == "passed":
            return gs.PassedPred(who=self.expect_who(allow_both=True))
        raise AssertionError(head)


def _who_str(value):
    """Normalize a who-reference to its serialized token."""
    if value == gs.P1:
        return "P1"
    if value == gs.P2:
        return "P2"
    return value


def parse_game(text):
    """Parse game text into a GameSpec. Deterministic; raises ParseError."""
    return _Parser(tokenize(text)).parse_game()


# ---- serialization ----

_PLAYER_NAMES = {gs.P1: "P1", gs.P2: "P2"}


def _who(ref):
    if isinstance(ref, int):
        return _PLAYER_NAMES[ref]
    return ref


def _sx_dirs(dirs):
    if len(dirs) == 1:
        return dirs[0]
    return "(" + " ".join(dirs) + ")"


def _sx_shape(shape):
    if shape.kind in ("square", "hexagon"):
        return f"({shape.kind} {shape.rows})"
    return f"({shape.kind} {shape.rows} {shape.cols})"


def _sx_masklist(masks):
    if isinstance(masks, gs.MultiMask):
        return f"({masks.kind})"
    if len(masks) == 1:
        return _sx(masks[0])
    return "(" + " ".join(_sx(m) for m in masks) + ")"


def _sx(node):
    """Single-line serialization of an expression node."""
    t = type(node)
    if t is gs.MaskAnd or t is gs.PredAnd:
        return "(and " + " ".join(_sx(i) for i in node.items) + ")"
    if t is gs.MaskOr or t is gs.PredOr:
        return "(or " + " ".join(_sx(i) for i in node.items) + ")"
    if t is gs.MaskNot or t is gs.PredNot:
        return f"(not {_sx(node.item)})"
    if t is gs.AdjacentMask:
        s = f"(adjacent {_sx(node.inner)}"
        if node.directions:
            s += f" direction:{_sx_dirs(node.directions)}"
        return s + ")"
    if t is gs.CapturedMask:
        return "(captured)"
    if t is gs.CenterMask:
        return "(center)"
    if t is gs.ColumnMask:
        return f"(column {node.index})"
    if t is gs.CornersMask:
        return "(corners)"
    if t is gs.CornerCustodialMask:
        s = f'(corner_custodial "{node.piece}"'
        if node.mover != gs.MOVER:
            s += f" mover:{node.mover}"
        return s + ")"
    if t is gs.CustodialMask:
        s = f'(custodial "{node.piece}" {node.length}'
        if node.mover != gs.MOVER:
            s += f" mover:{node.mover}"
        if node.orientation != "any":
            s += f" orientation:{node.orientation}"
        return s + ")"
    if t is gs.EdgeMask:
        return f"(edge {node.which})"
    if t is gs.EmptyMask:
        return "(empty)"
    if t is gs.HoppedMask:
        return "(hopped)"
    if t is gs.OccupiedMask:
        return f"(occupied {node.who})" if node.who else "(occupied)"
    if t is gs.PrevMoveMask:
        return f"(prev_move {node.who})"
    if t is gs.PromotedMask:
        return "(promoted)"
    if t is gs.RowMask:
        return f"(row {node.index})"
    if t is gs.RegionMask:
        return f'(region "{node.region}")'
    if t is gs.MultiMask:
        return f"({node.kind})"
    if t is gs.AddFn:
        return "(add " + " ".join(_sx(i) for i in node.items) + ")"
    if t is gs.MultiplyFn:
        return "(multiply " + " ".join(_sx(i) for i in node.items) + ")"
    if t is gs.SubtractFn:
        return f"(subtract {_sx(node.a)} {_sx(node.b)})"
    if t is gs.ConstantFn:
        return str(node.value)
    if t is gs.CountFn:
        return f"(count {_sx(node.mask)})"
    if t is gs.ScoreFn:
        return f"(score {node.who})"
    if t is gs.ConnectedFn:
        s = f'(connected "{node.piece}" {_sx_masklist(node.masks)}'
        if node.mover != gs.MOVER:
            s += f" mover:{node.mover}"
        if node.directions:
            s += f" direction:{_sx_dirs(node.directions)}"
        return s + ")"
    if t is gs.LineFn:
        s = f'(line "{node.piece}" {node.length}'
        if node.orientation != "any":
            s += f" orientation:{node.orientation}"
        if node.exact:
            s += " exact:true"
        if node.player != gs.MOVER:
            s += f" player:{_who(node.player)}"
        if node.exclude is not None:
            s += f" exclude:{_sx_masklist(node.exclude)}"
        return s + ")"
    if t is gs.PatternFn:
        if node.shape is not None:
            arg = _sx_shape(node.shape)
        else:
            arg = f"({node.width} (" + " ".join(str(i) for i in node.offsets) + "))"
        s = f'(pattern "{node.piece}" {arg}'
        if node.rotate:
            s += " rotate:true"
        if node.player != gs.MOVER:
            s += f" player:{_who(node.player)}"
        if node.exclude is not None:
            s += f" exclude:{_sx_masklist(node.exclude)}"
        return s + ")"
    if t is gs.ActionWasPred:
        return f"(action_was {node.who} {node.kind})"
    if t is gs.CanMoveAgainPred:
        return f"(can_move_again {node.kind})"
    if t is gs.EqualsPred:
        return "(= " + " ".join(_sx(i) for i in node.items) + ")"
    if t is gs.ExistsPred:
        return f"(exists {_sx(node.mask)})"
    if t is gs.FullBoardPred:
        return "(full_board)"
    if t is gs.FunctionPred:
        return _sx(node.fn)
    if t is gs.GreaterEqPred:
        return f"(>= {_sx(node.a)} {_sx(node.b)})"
    if t is gs.LastMoveInPred:
        return f"(last_move_in {_sx(node.mask)})"
    if t is gs.LessEqPred:
        return f"(<= {_sx(node.a)} {_sx(node.b)})"
    if t is gs.MoverIsPred:
        return f"(mover_is {_PLAYER_NAMES[node.player]})"
    if t is gs.NoLegalActionsPred:
        return "(no_legal_actions)"
    if t is gs.PassedPred:
        return f"(passed {node.who})"
    if t is gs.CaptureEffect:
        s = f"(capture {_sx(node.mask)}"
        if node.mover != gs.MOVER:
            s += f" mover:{node.mover}"
        if node.increment_score:
            s += " increment_score:true"
        return s + ")"
    if t is gs.ExtraTurnEffect:
        s = f"(extra_turn {node.who}"
        if node.same_piece:
            s += " same_piece:true"
        return s + ")"
    if t is gs.FlipEffect:
        s = f"(flip {_sx(node.mask)}"
        if node.mover != gs.MOVER:
            s += f" mover:{node.mover}"
        return s + ")"
    if t is gs.IncrementScoreEffect:
        return f"(increment_score {node.who} {_sx(node.fn)})"
    if t is gs.PromoteEffect:
        s = f'(promote "{node.from_piece}" "{node.to_piece}" {_sx(node.mask)}'
        if node.mover != gs.MOVER:
            s += f" mover:{node.mover}"
        return s + ")"
    if t is gs.SetScoreEffect:
        return f"(set_score {node.who} {_sx(node.fn)})"
    if t is gs.ConditionalEffect:
        s = f"(if {_sx(node.condition)} {_sx(node.then_effect)}"
        if node.else_effect is not None:
            s += f" else {_sx(node.else_effect)}"
        return s + ")"
    if t is gs.HopMove:
        s = f'(hop "{node.piece}"'
        if node.directions:
            s += f" direction:{_sx_dirs(node.directions)}"
        if node.over_piece:
            s += f' piece:"{node.over_piece}"'
        if node.hop_over:
            s += f" hop_over:{_who(node.hop_over)}"
        if node.capture:
            s += " capture:true"
        if node.priority:
            s += f" priority:{node.priority}"
        return s + ")"
    if t is gs.SlideMove:
        s = f'(slide "{node.piece}"'
        if node.directions:
            s += f" direction:{_sx_dirs(node.directions)}"
        if node.distance:
            s += f" distance:{node.distance}"
        if node.priority:
            s += f" priority:{node.priority}"
        return s + ")"
    if t is gs.StepMove:
        s = f'(step "{node.piece}"'
        if node.directions:
            s += f" direction:{_sx_dirs(node.directions)}"
        if node.priority:
            s += f" priority:{node.priority}"
        return s + ")"
    raise AssertionError(f"cannot serialize {t.__name__}")


def serialize(spec):
    """Canonical text for a GameSpec: parse(serialize(s)) == s."""
    out = [f'(game "{spec.name}"']
    if spec.players.forward:
        fwd = " ".join(f"({_PLAYER_NAMES[p]} {d})" for p, d in spec.players.forward)
        out.append(f"  (players {spec.players.count} (set_forward {fwd}))")
    else:
        out.append(f"  (players {spec.players.count})")
    out.append("  (equipment")
    out.append(f"    (board {_sx_shape(spec.equipment.board)})")
    out.append("    (pieces " + " ".join(
        f'("{p.name}" {_who(p.owner)})' for p in spec.equipment.pieces) + ")")
    if spec.equipment.regions:
        lines = []
        for r in spec.equipment.regions:
            if r.cells:
                arg = "(" + " ".join(str(c) for c in r.cells) + ")"
            else:
                arg = _sx_masklist(r.masks)
            lines.append(f'("{r.name}" {arg})')
        out.append("    (regions " + " ".join(lines) + ")")
    out.append("  )")
    out.append("  (rules")
    if spec.start:
        out.append("    (start")
        for sp in spec.start:
            if sp.cells:
                arg = "(" + " ".join(str(c) for c in sp.cells) + ")"
            else:
                arg = _sx_masklist(sp.masks)
            out.append(f'      (place "{sp.piece}" {_PLAYER_NAMES[sp.player]} {arg})')
        out.append("    )")
    out.append("    (play")
    for phase in spec.phases:
        order = " ".join(_PLAYER_NAMES[p] for p in phase.order)
        out.append(f"      ({phase.kind} ({order})")
        out.extend(_serialize_mechanic(phase.mechanic, indent=8))
        if phase.force_pass:
            out.append("        (force_pass)")
        out.append("      )")
    out.append("    )")
    out.append("    (end")
    for rule in spec.end_rules:
        res = rule.result
        if res.kind in ("draw", "by_score"):
            rtext = f"({res.kind})"
        else:
            rtext = f"({res.who} {res.kind})"
        out.append(f"      (if {_sx(rule.condition)} {rtext})")
    out.append("    )")
    out.append("  )")
    if spec.rendering is not None:
        parts = [f"(color {_PLAYER_NAMES[p]} {c})" for p, c in spec.rendering.colors]
        parts += [f'(shape "{p}" {s})' for p, s in spec.rendering.shapes]
        out.append("  (rendering " + " ".join(parts) + ")")
    out.append(")")
    return "\n".join(out) + "\n"


def _serialize_mechanic(mech, indent):
    pad = " " * indent
    out = []
    if isinstance(mech, gs.PlaceMechanic):
        head = f'{pad}(place "{mech.piece}"'
        if mech.owner != gs.MOVER:
            head += f" {mech.owner}"
        out.append(head)
        out.append(f"{pad}  (destination {_sx(mech.destination)})")
        if mech.result is not None:
            out.append(f"{pad}  (result {_sx(mech.result)})")
        out.extend(_serialize_effects(mech.effects, indent + 2))
        out.append(f"{pad})")
    else:
        out.append(f"{pad}(move")
        if len(mech.moves) == 1:
            out.append(f"{pad}  {_sx(mech.moves[0])}")
        else:
            out.append(f"{pad}  (or")
            for m in mech.moves:
                out.append(f"{pad}    {_sx(m)}")
            out.append(f"{pad}  )")
        out.extend(_serialize_effects(mech.effects, indent + 2))
        out.append(f"{pad})")
    return out


def _serialize_effects(effects, indent):
    if not effects:
        return []
    pad = " " * indent
    out = [f"{pad}(effects"]
    for e in effects:
        out.append(f"{pad}  {_sx(e)}")
    out.append(f"{pad})")
    return out

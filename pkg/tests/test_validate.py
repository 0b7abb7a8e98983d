from boardlang.parser import parse_game
from boardlang.topology import build_topology
from boardlang.validate import validate

from conftest import game_text


def check(text):
    spec = parse_game(text)
    topo = build_topology(spec.equipment.board)
    return validate(spec, topo)


BASE = """
(game "T"
  (players 2)
  (equipment (board (square 8)) (pieces ("stone" both)))
  (rules
    {start}
    (play (repeat (P1 P2) {mechanic}))
    (end {end})))
"""


def make(mechanic='(place "stone" (destination (empty)))',
         end='(if (full_board) (draw))', start=""):
    return BASE.format(mechanic=mechanic, end=end, start=start)


def test_clean_game_is_valid():
    assert check(make()).ok


def test_draughts_start_indices_in_range():
    assert check(game_text("english_draughts")).ok


def test_start_index_out_of_range():
    rep = check(make(start='(start (place "stone" P1 (64)))'))
    assert not rep.ok
    assert any("out of range" in m for _, m in rep)


def test_unknown_piece_reference():
    rep = check(make(mechanic='(place "queen" (destination (empty)))'))
    assert any("unknown piece" in m for _, m in rep)


def test_unknown_region_reference():
    rep = check(make(end='(if (exists (region "nowhere")) (draw))'))
    assert any("unknown region" in m for _, m in rep)


def test_duplicate_piece_names():
    text = make().replace('(pieces ("stone" both))',
                          '(pieces ("stone" both) ("stone" P1))')
    rep = check(text)
    assert any("duplicate piece" in m for _, m in rep)


def test_duplicate_start_cells():
    rep = check(make(start='(start (place "stone" P1 (3 3)))'))
    assert any("already used" in m for _, m in rep)


def test_wrong_player_count():
    rep = check(make().replace("(players 2)", "(players 3)"))
    assert any("2 players" in m for _, m in rep)


def test_piece_owner_constraint():
    text = make(start='(start (place "stone" P2 (0)))').replace(
        '(pieces ("stone" both))', '(pieces ("stone" P1))')
    rep = check(text)
    assert any("cannot be owned" in m for _, m in rep)


def test_relative_direction_needs_forward():
    rep = check(make(mechanic='(move (step "stone" direction:forward))'))
    assert any("set_forward" in m for _, m in rep)


def test_vertical_on_hexagon_rejected():
    text = make(mechanic='(move (step "stone" direction:vertical))') \
        .replace("(board (square 8))", "(board (hexagon 9))")
    rep = check(text)
    assert any("not available" in m for _, m in rep)


def test_corner_custodial_on_hex_rejected():
    text = make(end='(if (exists (corner_custodial "stone")) (draw))') \
        .replace("(board (square 8))", "(board (hexagon 9))")
    rep = check(text)
    assert any("corner_custodial" in m for _, m in rep)


def test_no_legal_actions_only_in_end_rules():
    rep = check(make(mechanic='(place "stone" (destination (empty)) '
                              '(result (no_legal_actions)))'))
    assert any("end conditions" in m for _, m in rep)


def test_row_out_of_range():
    rep = check(make(end='(if (exists (row 8)) (draw))'))
    assert any("row 8 out of range" in m for _, m in rep)


def test_dynamic_region_definition_rejected():
    text = make().replace(
        '(pieces ("stone" both))',
        '(pieces ("stone" both)) (regions ("zone" (occupied)))')
    rep = check(text)
    assert any("static" in m for _, m in rep)


def test_edge_left_on_hexagon_rejected():
    text = make(end='(if (exists (edge left)) (draw))') \
        .replace("(board (square 8))", "(board (hexagon 9))")
    rep = check(text)
    assert any("does not exist" in m for _, m in rep)


def test_report_paths_are_informative():
    rep = check(make(start='(start (place "stone" P1 (64)))'))
    paths = [p for p, _ in rep]
    assert any(p.startswith("rules.start") for p in paths)

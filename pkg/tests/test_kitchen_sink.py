"""One deliberately ornate program exercising grammar paths the corpus
games never touch: region-by-mask, hop piece: filters, slide distances,
pattern offsets with rotation, score arithmetic, both-result, multi-mask
exclusions, once_through phases, conditional else branches."""

import numpy as np
import pytest

import boardlang
from boardlang import engine
from boardlang.parser import parse_game, serialize
from boardlang.topology import build_topology
from boardlang.validate import validate

KITCHEN_SINK = """
(game "Kitchen Sink"
  (players 2 (set_forward (P1 right) (P2 left)))
  (equipment
    (board (rectangle 7 9))
    (pieces ("runner" both) ("wall" P2) ("crown" both))
    (regions
      ("throne" (31))
      ("rim" (edgesNoCorners))))
  (rules
    (start
      (place "runner" P1 (0 9))
      (place "wall" P2 (4 13 22))
      (place "crown" P2 (62)))
    (play
      (once_through (P2 P1)
        (place "runner" opponent
          (destination (and (empty) (not (region "rim"))))
          (result (not (full_board)))))
      (repeat (P1 P2 P2)
        (move
          (or
            (hop "runner" direction:forward piece:"wall" hop_over:P2 capture:true priority:0)
            (slide "runner" direction:(forward backward) distance:3 priority:1)
            (step "crown" direction:any priority:1))
          (effects
            (if (action_was mover hop)
              (increment_score mover (add 2 (count (captured))))
              else (set_score opponent (multiply (score opponent) 1)))
            (promote "runner" "crown" (region "throne"))
            (if (<= (subtract 9 (score mover)) 2)
              (extra_turn mover))))
        (force_pass)))
    (end
      (if (exists (and (prev_move mover) (region "throne"))) (both win))
      (if (>= (score mover) 11)
          (mover win))
      (if (and (passed both)
               (or (pattern "wall" (2 (0 1 3)) rotate:true player:P2)
                   (exists (adjacent (region "throne") direction:(up down)))))
          (by_score))
      (if (full_board) (draw))))
  (rendering
    (color P1 black)
    (color P2 white)
    (shape "crown" star)))
"""


@pytest.fixture(scope="module")
def sink():
    return boardlang.load_game(KITCHEN_SINK)


def test_parses_validates_and_round_trips():
    spec = parse_game(KITCHEN_SINK)
    topo = build_topology(spec.equipment.board)
    report = validate(spec, topo)
    assert report.ok, str(report)
    canon = serialize(spec)
    assert parse_game(canon) == spec
    assert serialize(parse_game(canon)) == canon


def test_compiles_with_expected_shape(sink):
    assert sink.codec.kind == "movement"
    assert sink.codec.has_pass           # force_pass + passed reference
    assert sink.codec.size == 63 * 63 + 1
    layout = sink.layout
    assert layout.scores and layout.passing and layout.last_action
    assert layout.transient_masks        # (captured) is read by an effect
    assert layout.phase                  # once_through phase present


def test_region_by_mask_expansion(sink):
    rim = sink.ctx.region_cells["rim"]
    topo = sink.topology
    expect = np.zeros(63, dtype=bool)
    for name in ("top", "bottom", "left", "right"):
        expect |= topo.edge_masks[name]
    expect &= ~topo.corners_mask
    assert (rim == expect).all()


def test_smoke_playouts(sink):
    po = engine.playout_random(sink, seed=5, batch_size=64, max_turns=200)
    assert po.final.terminated.all()


def test_batch_equals_sequential(sink):
    from boardlang import rng
    from boardlang.state import GameState
    seeds = rng.spawn_seeds(4, 6)
    batched = engine.playout_random(
        sink, state=sink.init(batch_size=6, seeds=seeds), max_turns=150).final
    singles = [engine.playout_random(
        sink, state=sink.init(batch_size=1, seeds=seeds[i:i + 1]),
        max_turns=150).final for i in range(6)]
    assert batched.digest() == GameState.concat(singles).digest()

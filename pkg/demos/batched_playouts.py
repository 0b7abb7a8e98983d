"""Batched lockstep simulation: thousands of independent games at once."""

import time

import numpy as np

import boardlang
from boardlang import engine

game = boardlang.load_game(open("games/reversi.ldx").read())

for batch in (1, 64, 1024):
    t0 = time.perf_counter()
    po = engine.playout_random(game, seed=9, batch_size=batch, max_turns=200)
    dt = time.perf_counter() - t0
    f = po.final
    steps = int(f.move_count.sum())
    print(f"batch {batch:5d}: {steps:7d} state-steps in {dt:6.2f}s "
          f"({steps / dt:10.0f} steps/s)  "
          f"P1 {int((f.outcome == 1).sum())} / P2 {int((f.outcome == 2).sum())} "
          f"/ draw {int((f.outcome == 0).sum())}")

# bookkeeping invariant: scores always equal on-board disc counts
f = engine.playout_random(game, seed=3, batch_size=256).final
assert (f.scores[:, 0] == (f.board_owner == 0).sum(axis=1)).all()
assert (f.scores[:, 1] == (f.board_owner == 1).sum(axis=1)).all()
print("score bookkeeping matches disc recounts for 256 games")

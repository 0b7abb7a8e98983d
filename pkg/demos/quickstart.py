"""Parse a game, inspect the compiled artifact, and play a few moves."""

import numpy as np

import boardlang
from boardlang import engine

game = boardlang.load_game(open("games/tic_tac_toe.ldx").read())
print("compiled:", game.describe())

state = engine.init(game, batch_size=1, seed=0)
print("\ninitial legal mask:", engine.legal_actions(game, state)[0].astype(int))

for action in (4, 0, 8, 2, 1, 7, 6):   # scripted opening; stops at the first win
    state = engine.step(game, state, action)
    print(f"after {action}: mover=P{int(state.current_player[0]) + 1} "
          f"terminated={bool(state.terminated[0])}")
    if state.terminated[0]:
        break

print("\noutcome:", engine.outcome_view(state))
po = engine.playout_random(game, seed=42, batch_size=5, record=True)
print("\na recorded random game, as trajectory JSON lines:")
print(po.to_jsonl(0))

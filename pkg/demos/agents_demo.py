"""MCTS against a uniform random player on Connect Four."""

import boardlang
from boardlang.agents import MctsConfig, MctsPolicy, RandomPolicy, play_match

game = boardlang.load_game(open("games/connect_four.ldx").read())
stats = play_match(game,
                   MctsPolicy(MctsConfig(iterations=100, seed=1)),
                   RandomPolicy(seed=2),
                   num_games=40, seed=3)
print(f"MCTS-100 vs random over {stats.games} games "
      f"(seats swap every game):")
print(f"  mcts wins {stats.wins_a}, random wins {stats.wins_b}, "
      f"draws {stats.draws}")
print(f"  average game length {stats.turns.mean():.1f} plies")
print(f"  turns with a real choice: "
      f"{stats.multi_choice_turns}/{stats.total_turns}")

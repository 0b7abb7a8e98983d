"""Random-policy throughput against batch size (reduced episode counts)."""

import boardlang
from boardlang.evaluation import benchmark_throughput

game = boardlang.load_game(open("games/tic_tac_toe.ldx").read())
report = benchmark_throughput(game, [1, 16, 256, 1024],
                              warmup_episodes=2, episodes=8, seed=5)
print(report.to_csv())
print("log-log TSV (gnuplot-ready):")
print(report.to_plot_tsv())

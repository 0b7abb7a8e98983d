"""Score game quality from agent-vs-agent playthroughs (reduced budget)."""

from boardlang.evaluation import EvalConfig, evaluate_game

text = open("games/yavalath.ldx").read()
report = evaluate_game(text, EvalConfig(matches=20, seed=1))
print(f"{report.name}: playable={report.playable}")
for name, value in report.scores.as_dict().items():
    print(f"  {name:16s} {value:.3f}")
print(f"  gavel score      {report.gavel_score:.3f} "
      f"-> interesting={report.interesting}")

"""Uniform random game programs: grammatical by construction, mostly junk."""

import boardlang
from boardlang.engine import playout_random
from boardlang.generator import SamplerConfig, sample_games
from boardlang.parser import parse_game
from boardlang.topology import build_topology
from boardlang.validate import validate

cfg = SamplerConfig(count=40, seed=11)
texts = sample_games(cfg)
playable = 0
for text in texts:
    try:
        spec = parse_game(text)
        topo = build_topology(spec.equipment.board)
        if not validate(spec, topo).ok:
            continue
        playout_random(boardlang.compile_game(spec, topo), seed=1,
                       batch_size=8, max_turns=200)
        playable += 1
    except Exception:
        continue
print(f"sampled {cfg.count} programs; {playable} survived compilation "
      f"and smoke playouts")
print("\nfirst sample:\n")
print(texts[0])

import boardlang
from boardlang.engine import playout_random
from boardlang.generator import (FORCED_TAIL, SamplerConfig, aggregate,
                                 generate_and_evaluate, sample_game,
                                 sample_games)
from boardlang.parser import parse_game
from boardlang.topology import build_topology
from boardlang.validate import validate


def test_every_sample_parses():
    cfg = SamplerConfig(count=1000, seed=99)
    for i in range(cfg.count):
        parse_game(sample_game(cfg, cfg.seed, i))


def test_fixed_seed_reproduces_text():
    cfg = SamplerConfig(count=1, seed=42)
    assert sample_game(cfg, 42, 0) == sample_game(cfg, 42, 0)
    assert sample_game(cfg, 42, 0) != sample_game(cfg, 42, 1)


def paren_depth(text):
    depth = best = 0
    in_string = False
    for ch in text:
        if ch == '"':
            in_string = not in_string
        elif not in_string:
            if ch == "(":
                depth += 1
                best = max(best, depth)
            elif ch == ")":
                depth -= 1
    return best


def test_depth_bound():
    cfg = SamplerConfig(count=300, seed=5, max_depth=5)
    worst = 0
    for i in range(cfg.count):
        worst = max(worst, paren_depth(sample_game(cfg, cfg.seed, i)))
    assert worst <= cfg.max_depth + FORCED_TAIL


def test_playable_fraction_band():
    cfg = SamplerConfig(count=100, seed=4)
    playable = 0
    for text in sample_games(cfg):
        try:
            spec = parse_game(text)
            topo = build_topology(spec.equipment.board)
            if not validate(spec, topo).ok:
                continue
            g = boardlang.compile_game(spec, topo)
            playout_random(g, seed=1, batch_size=8, max_turns=200)
            playable += 1
        except Exception:
            continue
    assert playable <= 15


def test_generate_and_evaluate_aggregate():
    from boardlang.evaluation import EvalConfig
    cfg = SamplerConfig(count=12, seed=8)
    eval_cfg = EvalConfig(matches=2, strong_iterations=6, weak_iterations=3,
                          smoke_playouts=4, seed=1)
    reports, agg = generate_and_evaluate(cfg, eval_cfg)
    assert len(reports) == 12
    assert agg["games"] == 12
    assert agg["interesting_pct"] <= agg["playable_pct"]
    assert 0 <= agg["playable_pct"] <= 100


def test_aggregate_empty():
    agg = aggregate([])
    assert agg["games"] == 0
    assert agg["playable_pct"] == 0.0

"""Command-line entry points.

Subcommands: validate, info, topology, play, bench, gavel, generate, serve.
Every failure exits nonzero with a message on stderr; --json selects
machine-readable output on stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import engine, load_game
from .errors import BoardLangError
from .parser import parse_game
from .topology import build_topology
from .validate import validate


def _read(path):
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def _fail(args, message, code=1):
    if getattr(args, "json", False):
        print(json.dumps({"ok": False, "error": message}))
    else:
        print(f"error: {message}", file=sys.stderr)
    return code


def cmd_validate(args):
    try:
        text = _read(args.file)
        spec = parse_game(text)
        topo = build_topology(spec.equipment.board)
    except (OSError, BoardLangError) as exc:
        return _fail(args, f"{type(exc).__name__}: {exc}")
    report = validate(spec, topo)
    if args.json:
        print(json.dumps({"ok": report.ok,
                          "errors": [{"path": p, "message": m} for p, m in report]}))
    elif report.ok:
        print(f"{spec.name}: valid")
    else:
        print(str(report), file=sys.stderr)
    return 0 if report.ok else 1


def cmd_info(args):
    try:
        compiled = load_game(_read(args.file))
    except (OSError, BoardLangError) as exc:
        return _fail(args, f"{type(exc).__name__}: {exc}")
    info = compiled.describe()
    info["topology"] = {
        "kind": compiled.topology.kind,
        "rows": compiled.topology.rows,
        "cols": compiled.topology.cols,
        "num_cells": compiled.topology.num_cells,
        "directions": list(compiled.topology.directions),
        "row_lengths": list(compiled.topology.row_lengths),
    }
    print(json.dumps(info, indent=None if args.json else 2))
    return 0


def cmd_topology(args):
    try:
        spec = parse_game(_read(args.file))
        topo = build_topology(spec.equipment.board)
    except (OSError, BoardLangError) as exc:
        return _fail(args, f"{type(exc).__name__}: {exc}")
    print(json.dumps(topo.to_dict()))
    return 0


_OWNER_GLYPHS = ("xX", "oO")


def render_board(compiled, state, i=0):
    """ASCII board: lowercase piece initial for P1, uppercase-ish for P2."""
    topo = compiled.topology
    names = compiled.piece_names
    lines = []
    cell = 0
    for r, length in enumerate(topo.row_lengths):
        indent = " " * (max(topo.row_lengths) - length)
        if topo.kind == "hex_rectangle":
            indent = " " * r
        row = []
        for _ in range(length):
            owner = state.board_owner[i, cell]
            piece = state.board_piece[i, cell]
            if owner < 0:
                row.append(".")
            else:
                ch = names[piece][0]
                row.append(ch.lower() if owner == 0 else ch.upper())
            cell += 1
        lines.append(indent + " ".join(row))
    return "\n".join(lines)


def _make_seat(spec_text, seed):
    from .agents import MctsConfig, MctsPolicy, RandomPolicy
    if spec_text == "human":
        return "human"
    if spec_text == "random":
        return RandomPolicy(seed=seed)
    if spec_text.startswith("mcts"):
        iters = int(spec_text.split(":", 1)[1]) if ":" in spec_text else 100
        return MctsPolicy(MctsConfig(iterations=iters, seed=seed))
    raise ValueError(f"unknown seat spec {spec_text!r} (use human|random|mcts:N)")


def cmd_play(args):
    try:
        compiled = load_game(_read(args.file))
        seats = {0: _make_seat(args.p1, args.seed + 1),
                 1: _make_seat(args.p2, args.seed + 2)}
    except (OSError, BoardLangError, ValueError) as exc:
        return _fail(args, f"{type(exc).__name__}: {exc}")
    state = compiled.init(batch_size=1, seed=args.seed)
    print(f"== {compiled.spec.name} ==")
    while not state.terminated[0] and state.move_count[0] < args.max_turns:
        mover = int(state.current_player[0])
        print(render_board(compiled, state))
        mask = compiled.legal_mask(state)[0]
        legal = np.nonzero(mask)[0]
        print(f"P{mover + 1} to move; {len(legal)} legal actions")
        seat = seats[mover]
        if seat == "human":
            action = _prompt_human(compiled, legal)
            if action is None:
                print("quit")
                return 0
        else:
            rows = np.ones(1, dtype=bool)
            action = int(seat.decide(compiled, state, rows)[0])
            print(f"P{mover + 1} ({seat.name}) plays {_action_text(compiled, action)}")
        state = compiled.step(state, np.array([action]))
    print(render_board(compiled, state))
    out = engine.outcome_view(state)
    if out is None:
        print(f"stopped at the {args.max_turns}-turn cap")
    else:
        print(f"result: P1 {out['p1']}, P2 {out['p2']}"
              + (" (truncated)" if out["truncated"] else ""))
    return 0


def _action_text(compiled, action):
    d = compiled.codec.describe(int(action))
    if d["kind"] == "pass":
        return "pass"
    if d["kind"] == "move":
        return f"{d['source']}->{d['dest']}"
    if d["kind"] == "place":
        return f"cell {d['dest']}"
    return d["direction"]


def _prompt_human(compiled, legal):
    kind = compiled.codec.kind
    hints = {
        "placement": "enter a cell index",
        "movement": "enter source,dest (cell indices)",
        "gridworld": f"enter a direction ({'/'.join(compiled.codec.directions)})",
    }[kind]
    while True:
        raw = input(f"your move ({hints}, 'pass', or 'q'): ").strip()
        if raw in ("q", "quit"):
            return None
        try:
            if raw == "pass":
                action = compiled.codec.pass_index
                if action is None:
                    print("this game has no pass action")
                    continue
            elif kind == "placement":
                action = int(raw)
            elif kind == "movement":
                s, d = raw.replace(" ", "").split(",")
                action = compiled.codec.encode(int(s), int(d))
            else:
                action = compiled.codec.encode_direction(raw)
        except (ValueError, IndexError):
            print("could not parse that")
            continue
        if action in legal:
            return int(action)
        print("not a legal action here")


def cmd_bench(args):
    from .evaluation import ThroughputReport, benchmark_throughput
    batch_sizes = [int(b) for b in args.batch_sizes.split(",")]
    report = ThroughputReport()
    for path in args.files:
        try:
            compiled = load_game(_read(path))
        except (OSError, BoardLangError) as exc:
            return _fail(args, f"{path}: {type(exc).__name__}: {exc}")
        benchmark_throughput(compiled, batch_sizes,
                             warmup_episodes=args.warmup,
                             episodes=args.episodes,
                             max_turns=args.max_turns,
                             seed=args.seed, report=report)
        for row in report.rows[-len(batch_sizes):]:
            print(f"{row['game']:24s} batch={row['batch_size']:5d} "
                  f"{row['steps_per_sec_mean']:12.0f} +- {row['steps_per_sec_std']:.0f} steps/s",
                  file=sys.stderr)
    if args.csv:
        with open(args.csv, "w") as f:
            f.write(report.to_csv())
    if args.tsv:
        with open(args.tsv, "w") as f:
            f.write(report.to_plot_tsv())
    if not args.csv:
        print(report.to_csv(), end="")
    return 0


def cmd_gavel(args):
    from .evaluation import EvalConfig, evaluate_game, gavel_csv
    config = EvalConfig(matches=args.matches, seed=args.seed)
    reports = []
    for path in args.files:
        try:
            text = _read(path)
        except OSError as exc:
            return _fail(args, str(exc))
        rep = evaluate_game(text, config)
        reports.append(rep)
        print(json.dumps(rep.as_dict()), file=sys.stderr)
    if args.csv:
        with open(args.csv, "w") as f:
            f.write(gavel_csv(reports))
    if args.json or not args.csv:
        print(json.dumps([r.as_dict() for r in reports]))
    return 0


def cmd_generate(args):
    from .generator import SamplerConfig, sample_game
    config = SamplerConfig(max_depth=args.max_depth, seed=args.seed,
                           count=args.count)
    os.makedirs(args.out, exist_ok=True)
    manifest = []
    for i in range(config.count):
        text = sample_game(config, config.seed, i)
        name = f"sample_{i:04d}.ldx"
        with open(os.path.join(args.out, name), "w") as f:
            f.write(text)
        entry = {"file": name, "seed": config.seed, "index": i}
        try:
            spec = parse_game(text)
            topo = build_topology(spec.equipment.board)
            entry["valid"] = validate(spec, topo).ok
        except BoardLangError:
            entry["valid"] = False
        manifest.append(entry)
    with open(os.path.join(args.out, "manifest.json"), "w") as f:
        json.dump({"v": 1, "max_depth": config.max_depth, "seed": config.seed,
                   "games": manifest}, f, indent=2)
    print(f"wrote {config.count} games to {args.out}")
    return 0


def cmd_serve(args):
    import uvicorn
    from .server import create_app
    app = create_app(games_dir=args.games_dir, snapshot_path=args.snapshot,
                     session_ttl=args.ttl)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="boardlang",
                                description="board-game DSL toolchain")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="parse + validate a game file")
    v.add_argument("file")
    v.add_argument("--json", action="store_true")
    v.set_defaults(fn=cmd_validate)

    i = sub.add_parser("info", help="compiled-game summary as JSON")
    i.add_argument("file")
    i.add_argument("--json", action="store_true")
    i.set_defaults(fn=cmd_info)

    t = sub.add_parser("topology", help="full topology dump as JSON")
    t.add_argument("file")
    t.add_argument("--json", action="store_true")
    t.set_defaults(fn=cmd_topology)

    pl = sub.add_parser("play", help="play a game in the terminal")
    pl.add_argument("file")
    pl.add_argument("--p1", default="human")
    pl.add_argument("--p2", default="mcts:100")
    pl.add_argument("--seed", type=int, default=0)
    pl.add_argument("--max-turns", type=int, default=200)
    pl.add_argument("--json", action="store_true")
    pl.set_defaults(fn=cmd_play)

    b = sub.add_parser("bench", help="random-policy throughput benchmark")
    b.add_argument("files", nargs="+")
    b.add_argument("--batch-sizes", default="1,64,1024")
    b.add_argument("--warmup", type=int, default=100)
    b.add_argument("--episodes", type=int, default=500)
    b.add_argument("--max-turns", type=int, default=200)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--csv")
    b.add_argument("--tsv")
    b.add_argument("--json", action="store_true")
    b.set_defaults(fn=cmd_bench)

    g = sub.add_parser("gavel", help="game-quality evaluation")
    g.add_argument("files", nargs="+")
    g.add_argument("--matches", type=int, default=100)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--csv")
    g.add_argument("--json", action="store_true")
    g.set_defaults(fn=cmd_gavel)

    ge = sub.add_parser("generate", help="sample random game programs")
    ge.add_argument("--count", type=int, default=100)
    ge.add_argument("--max-depth", type=int, default=5)
    ge.add_argument("--seed", type=int, default=0)
    ge.add_argument("--out", required=True)
    ge.add_argument("--json", action="store_true")
    ge.set_defaults(fn=cmd_generate)

    s = sub.add_parser("serve", help="HTTP/WebSocket play server")
    s.add_argument("--port", type=int,
                   default=int(os.environ.get("BOARDLANG_PORT", "8000")))
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--games-dir", default="games")
    s.add_argument("--snapshot")
    s.add_argument("--ttl", type=int, default=3600)
    s.add_argument("--json", action="store_true")
    s.set_defaults(fn=cmd_serve)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())

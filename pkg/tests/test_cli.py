import json
import os

from boardlang.cli import main

from conftest import game_path


def test_validate_ok(capsys):
    assert main(["validate", game_path("reversi")]) == 0
    assert "valid" in capsys.readouterr().out


def test_validate_rejects_garbage(tmp_path, capsys):
    bad = tmp_path / "garbage.txt"
    bad.write_text("this is not a game\n")
    assert main(["validate", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "line" in err


def test_validate_json_mode(tmp_path, capsys):
    bad = tmp_path / "bad.ldx"
    bad.write_text('(game "X" (players 2)')
    assert main(["validate", "--json", str(bad)]) == 1
    payload = json.loads(capsys.readouterr().out)
    assert payload["ok"] is False and "error" in payload


def test_validate_semantic_failure(tmp_path, capsys):
    bad = tmp_path / "oob.ldx"
    bad.write_text("""
    (game "OOB"
      (players 2)
      (equipment (board (square 8)) (pieces ("stone" both)))
      (rules
        (start (place "stone" P1 (64)))
        (play (repeat (P1 P2) (place "stone" (destination (empty)))))
        (end (if (full_board) (draw)))))
    """)
    assert main(["validate", str(bad)]) == 1


def test_info_draughts(capsys):
    assert main(["info", game_path("english_draughts")]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["action_space"]["size"] == 4096
    assert info["pieces"] == ["pawn", "king"]
    assert info["state_layout"]["must_move"] is True


def test_topology_dump(capsys):
    assert main(["topology", game_path("yavalath")]) == 0
    dump = json.loads(capsys.readouterr().out)
    assert dump["num_cells"] == 61
    assert dump["row_lengths"] == [5, 6, 7, 8, 9, 8, 7, 6, 5]
    assert set(dump["neighbors"]) == set(dump["directions"])


def test_play_agents_to_completion(capsys):
    rc = main(["play", game_path("tic_tac_toe"),
               "--p1", "random", "--p2", "random", "--seed", "3"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "result:" in out


def test_play_mcts_seat(capsys):
    rc = main(["play", game_path("tic_tac_toe"),
               "--p1", "mcts:10", "--p2", "random", "--seed", "1"])
    assert rc == 0


def test_bench_csv(tmp_path, capsys):
    out = tmp_path / "bench.csv"
    tsv = tmp_path / "bench.tsv"
    rc = main(["bench", game_path("tic_tac_toe"),
               "--batch-sizes", "1,8", "--warmup", "1", "--episodes", "3",
               "--csv", str(out), "--tsv", str(tsv)])
    assert rc == 0
    lines = out.read_text().strip().split("\n")
    assert len(lines) == 1 + 2  # header + |games| x |batch sizes|
    assert tsv.read_text().startswith("# game")


def test_gavel_csv(tmp_path, capsys):
    out = tmp_path / "gavel.csv"
    rc = main(["gavel", game_path("tic_tac_toe"), "--matches", "2",
               "--seed", "1", "--csv", str(out)])
    assert rc == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0].startswith("name,playable")
    assert len(lines) == 2


def test_generate_writes_manifest(tmp_path, capsys):
    out_dir = tmp_path / "sampled"
    rc = main(["generate", "--count", "5", "--seed", "3", "--out", str(out_dir)])
    assert rc == 0
    files = sorted(os.listdir(out_dir))
    assert "manifest.json" in files
    assert len([f for f in files if f.endswith(".ldx")]) == 5
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["v"] == 1
    assert len(manifest["games"]) == 5
    assert all("valid" in g for g in manifest["games"])


def test_unknown_file_fails(capsys):
    assert main(["info", "no_such_file.ldx"]) == 1

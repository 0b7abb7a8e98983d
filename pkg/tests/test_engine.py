import json

import numpy as np
import pytest

import boardlang
from boardlang import engine, rng
from boardlang.errors import EmptyMask, IllegalAction, TerminalState
from boardlang.state import GameState

from conftest import CORPUS, compiled


def test_init_ttt(ttt):
    s = engine.init(ttt, 1)
    assert (s.board_owner < 0).all()
    assert s.current_player[0] == 0
    assert s.move_count[0] == 0


def test_init_reversi(reversi):
    s = engine.init(reversi, 1)
    assert sorted(np.nonzero(s.board_owner[0] == 1)[0].tolist()) == [27, 36]
    assert sorted(np.nonzero(s.board_owner[0] == 0)[0].tolist()) == [28, 35]
    assert s.scores[0].tolist() == [2, 2]


def test_init_draughts(draughts):
    s = engine.init(draughts, 1)
    p1 = sorted(np.nonzero(s.board_owner[0] == 0)[0].tolist())
    assert p1 == [40, 42, 44, 46, 49, 51, 53, 55, 56, 58, 60, 62]
    assert (s.board_piece[0][p1] == 0).all()  # all pawns


def test_connect_four_initial_legal(connect_four):
    mask = engine.legal_actions(connect_four, engine.init(connect_four, 1))
    assert mask.sum() == 7
    assert sorted(np.nonzero(mask[0])[0].tolist()) == list(range(35, 42))


def test_reversi_initial_legal(reversi):
    mask = engine.legal_actions(reversi, engine.init(reversi, 1))
    assert sorted(np.nonzero(mask[0])[0].tolist()) == [19, 26, 37, 44]


def test_ttt_diagonal_win(ttt):
    s = engine.init(ttt, 1)
    for a in [0, 1, 4, 2, 8]:
        s = engine.step(ttt, s, a)
    assert s.terminated[0]
    assert engine.outcome_view(s) == {"p1": "win", "p2": "lose", "truncated": False}


def test_reversi_double_pass_ends_by_score(reversi):
    po = engine.playout_random(reversi, seed=12, batch_size=64, max_turns=200)
    f = po.final
    assert f.terminated.all() and not f.truncated.any()
    p1 = (f.board_owner == 0).sum(axis=1)
    p2 = (f.board_owner == 1).sum(axis=1)
    want = np.where(p1 > p2, 1, np.where(p2 > p1, 2, 0))
    assert (f.outcome == want).all()


def test_reversi_forced_pass_reachable(reversi):
    # search random games for a state where only pass is legal
    state = engine.init(reversi, batch_size=256, seed=3)
    saw_pass_only = False
    for _ in range(70):
        live = ~state.terminated
        if not live.any():
            break
        counts = reversi.legal_counts(state)
        mask = reversi.legal_mask(state)
        pass_only = live & mask[:, reversi.codec.pass_index] & (counts == 1)
        if pass_only.any():
            saw_pass_only = True
            i = int(np.argmax(pass_only))
            assert mask[i].sum() == 1
        u = rng.uniform(state.seeds, state.move_count.astype(np.uint64))
        reversi.step_into(state, reversi.sample_actions(state, u), rows=live,
                          verify=False)
    assert saw_pass_only


def test_illegal_action_raises(ttt):
    s = engine.init(ttt, 1)
    s = engine.step(ttt, s, 4)
    with pytest.raises(IllegalAction):
        engine.step(ttt, s, 4)


def test_terminal_state_raises(ttt):
    s = engine.init(ttt, 1)
    for a in [0, 1, 4, 2, 8]:
        s = engine.step(ttt, s, a)
    with pytest.raises(TerminalState):
        engine.step(ttt, s, 3)
    with pytest.raises(TerminalState):
        engine.legal_actions(ttt, s)


def test_mask_soundness_fuzz():
    # stepping any masked-off action raises IllegalAction
    gen = np.random.default_rng(5)
    for name in ("tic_tac_toe", "reversi", "english_draughts", "gridworld"):
        g = compiled(name)
        state = g.init(batch_size=1, seed=8)
        for _ in range(40):
            if state.terminated[0]:
                break
            mask = g.legal_mask(state)[0]
            illegal = np.nonzero(~mask)[0]
            if len(illegal):
                bad = int(gen.choice(illegal))
                with pytest.raises(IllegalAction):
                    g.step(state, np.array([bad]))
            legal = np.nonzero(mask)[0]
            state = g.step(state, np.array([int(gen.choice(legal))]))


def test_alternation_without_extra_turn(ttt):
    state = engine.init(ttt, batch_size=16, seed=2)
    prev = state.current_player.copy()
    for _ in range(6):
        live = ~state.terminated
        if not live.any():
            break
        u = rng.uniform(state.seeds, state.move_count.astype(np.uint64))
        state = ttt.step(state, ttt.sample_actions(state, u))
        flipped = state.current_player != prev
        assert (flipped | ~live)[live].all()
        prev = state.current_player.copy()


def test_conservation_placement_no_capture(gomoku):
    state = engine.init(gomoku, batch_size=8, seed=6)
    for _ in range(30):
        live = ~state.terminated
        if not live.any():
            break
        u = rng.uniform(state.seeds, state.move_count.astype(np.uint64))
        state = gomoku.step(state, gomoku.sample_actions(state, u))
        occupied = (state.board_owner >= 0).sum(axis=1)
        assert (occupied[live] == state.move_count[live]).all()


def test_reversi_conservation(reversi):
    state = engine.init(reversi, batch_size=32, seed=7)
    while not state.terminated.all():
        live = ~state.terminated
        occupied = (state.board_owner >= 0).sum(axis=1)
        assert (state.scores.sum(axis=1) == occupied).all()
        assert (occupied <= 64).all()
        u = rng.uniform(state.seeds, state.move_count.astype(np.uint64))
        reversi.step_into(state, reversi.sample_actions(state, u), rows=live,
                          verify=False)


def test_draughts_double_jump_keeps_mover(draughts):
    C = 64
    s = engine.init(draughts, 1)
    for a in (44 * C + 35, 21 * C + 30, 35 * C + 26):
        s = engine.step(draughts, s, a)
    s = engine.step(draughts, s, 17 * C + 35)
    # single capture without continuation: turn passes to P1
    assert s.current_player[0] == 0


def test_hex_no_draws_small(hex_game):
    po = engine.playout_random(hex_game, seed=21, batch_size=1000, max_turns=200)
    f = po.final
    assert f.terminated.all()
    assert not f.truncated.any()
    assert (f.outcome != 0).all()


def test_gridworld_actions(gridworld):
    s = engine.init(gridworld, 1)
    mask = engine.legal_actions(gridworld, s)[0]
    # walker at corner 0: only down and right are available
    dirs = gridworld.codec.directions
    legal = {dirs[i] for i in np.nonzero(mask)[0]}
    assert legal == {"down", "right"}
    a = gridworld.codec.encode_direction("right")
    s = engine.step(gridworld, s, a)
    assert s.board_owner[0, 1] == 0 and s.board_owner[0, 0] == -1
    assert s.current_player[0] == 0  # single-player order


def test_gridworld_danger_loses(gridworld):
    s = engine.init(gridworld, 1)
    right = gridworld.codec.encode_direction("right")
    down = gridworld.codec.encode_direction("down")
    s = engine.step(gridworld, s, right)   # 0 -> 1
    s = engine.step(gridworld, s, down)    # 1 -> 5 (danger)
    assert s.terminated[0]
    assert engine.outcome_view(s)["p1"] == "lose"


# -- batching --

@pytest.mark.parametrize("name", CORPUS)
def test_batch_equals_sequential(name):
    g = compiled(name)
    B = 8
    seeds = rng.spawn_seeds(1234, B)
    batch = g.init(batch_size=B, seeds=seeds)
    batched = engine.playout_random(g, state=batch, max_turns=200).final
    singles = [engine.playout_random(
        g, state=g.init(batch_size=1, seeds=seeds[i:i + 1]), max_turns=200).final
        for i in range(B)]
    assert batched.digest() == GameState.concat(singles).digest()


def test_partition_independence(reversi):
    seeds = rng.spawn_seeds(9, 16)
    whole = engine.playout_random(
        reversi, state=reversi.init(batch_size=16, seeds=seeds)).final
    left = engine.playout_random(
        reversi, state=reversi.init(batch_size=8, seeds=seeds[:8])).final
    right = engine.playout_random(
        reversi, state=reversi.init(batch_size=8, seeds=seeds[8:])).final
    assert whole.digest() == GameState.concat([left, right]).digest()


def test_playout_determinism(yavalath):
    a = engine.playout_random(yavalath, seed=77, batch_size=32).final
    b = engine.playout_random(yavalath, seed=77, batch_size=32).final
    assert a.digest() == b.digest()


def test_auto_reset_mode(ttt):
    state = engine.init(ttt, batch_size=4, seed=1)
    for _ in range(12):
        u = rng.uniform(state.seeds, state.move_count.astype(np.uint64))
        actions = ttt.sample_actions(state, u)
        # absorbing rows keep -1; feed them any index, they are ignored
        actions = np.where(actions < 0, 0, actions)
        state = engine.step_batch(ttt, state, actions, auto_reset=True)
        assert not state.terminated.all()


def test_truncation_marks_draw(dhs):
    po = engine.playout_random(dhs, seed=5, batch_size=16, max_turns=40)
    f = po.final
    trunc = f.truncated
    assert trunc.any()
    assert (f.outcome[trunc] == 0).all()
    assert (f.move_count[trunc] == 40).all()


# -- observations & trajectories --

def test_observe_empty_ttt(ttt):
    s = engine.init(ttt, 1)
    obs = engine.observe(ttt, s, 0)
    assert obs.planes.shape == (1, 3, 9)
    assert not obs.planes[0, 0].any() and not obs.planes[0, 1].any()
    assert obs.planes[0, 2].all()          # P1 is the mover
    assert not engine.observe(ttt, s, 1).planes[0, 2].any()


def test_observe_relative_swap(reversi):
    s = engine.init(reversi, 1)
    a = engine.observe(reversi, s, 0).planes[0]
    b = engine.observe(reversi, s, 1).planes[0]
    assert (a[0] == b[1]).all() and (a[1] == b[0]).all()


def test_observation_plane_count(draughts):
    assert draughts.observation_planes == 5
    s = engine.init(draughts, 1)
    assert engine.observe(draughts, s, 0).planes.shape == (1, 5, 64)


def test_trajectory_jsonl(ttt):
    po = engine.playout_random(ttt, seed=3, batch_size=2, record=True)
    text = po.to_jsonl(0)
    rows = [json.loads(line) for line in text.strip().split("\n")]
    assert rows[0]["move_count"] == 0
    assert rows[0]["mover"] == "P1"
    assert rows[-1]["terminated"] is True
    assert rows[-1]["outcome"] is not None
    for i, row in enumerate(rows):
        assert row["move_count"] == i
        assert set(row) == {"move_count", "mover", "action", "terminated", "outcome"}


def test_stuck_state_raises_empty_mask():
    text = """
    (game "Stuck"
      (players 2)
      (equipment (board (square 3)) (pieces ("stone" both)))
      (rules
        (play (repeat (P1 P2) (place "stone" (destination (captured)))))
        (end (if (full_board) (draw)))))
    """
    g = boardlang.load_game(text)
    with pytest.raises(EmptyMask):
        engine.playout_random(g, seed=1, batch_size=2)

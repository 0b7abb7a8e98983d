import numpy as np
import pytest

from boardlang import engine, rng
from boardlang.agents import (MctsConfig, MctsPolicy, RandomPolicy, _Node,
                              _Search, _Tree, mcts_search, play_match,
                              random_action)
from boardlang.errors import EmptyMask, TerminalState



def test_random_action_single_true():
    mask = np.zeros(10, dtype=bool)
    mask[7] = True
    assert random_action(mask, seed=1) == 7


def test_random_action_deterministic():
    mask = np.ones(9, dtype=bool)
    assert random_action(mask, seed=5, counter=3) == random_action(mask, seed=5, counter=3)


def test_random_action_empty_raises():
    with pytest.raises(EmptyMask):
        random_action(np.zeros(4, dtype=bool))


def test_connect_four_opening_uniform(connect_four):
    # 1e5 draws over the 7 legal openings: chi-square + 3-sigma bands
    n = 100_000
    state = connect_four.init(batch_size=n, seed=77)
    u = rng.uniform(state.seeds, state.move_count.astype(np.uint64))
    actions = connect_four.sample_actions(state, u)
    values, counts = np.unique(actions, return_counts=True)
    assert sorted(values.tolist()) == list(range(35, 42))
    expected = n / 7
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    assert chi2 < 22.46  # upper 0.1% quantile, 6 dof
    sigma = np.sqrt(n * (1 / 7) * (6 / 7))
    assert (np.abs(counts - expected) < 3 * sigma).all()


def _ttt_after(ttt, moves):
    s = engine.init(ttt, 1)
    for a in moves:
        s = engine.step(ttt, s, a)
    return s


def test_mcts_unique_winning_move(ttt):
    # P1 {0,1} P2 {3,4}: only action 2 wins (otherwise P2 wins with 5)
    s = _ttt_after(ttt, [0, 3, 1, 4])
    hits = sum(mcts_search(ttt, s, MctsConfig(iterations=100, seed=k)) == 2
               for k in range(100))
    assert hits >= 99


def test_mcts_forced_block(ttt):
    s = _ttt_after(ttt, [0, 4, 1])
    hits = sum(mcts_search(ttt, s, MctsConfig(iterations=100, seed=k)) == 2
               for k in range(100))
    assert hits >= 95


def test_mcts_single_iteration_returns_legal(ttt):
    s = _ttt_after(ttt, [0, 4, 1])
    a = mcts_search(ttt, s, MctsConfig(iterations=1, seed=0))
    assert engine.legal_actions(ttt, s)[0, a]


def test_mcts_terminal_state_raises(ttt):
    s = _ttt_after(ttt, [0, 1, 4, 2, 8])
    with pytest.raises(TerminalState):
        mcts_search(ttt, s, MctsConfig(iterations=10))


def test_mcts_deterministic(connect_four):
    s = engine.init(connect_four, 1, seed=4)
    cfg = MctsConfig(iterations=60, seed=9)
    assert mcts_search(connect_four, s, cfg) == mcts_search(connect_four, s, cfg)


def _search_tree(compiled_game, state, iterations, seed=0):
    cfg = MctsConfig(iterations=iterations, seed=seed)
    search = _Search(compiled_game, cfg.exploration, cfg.rollout_max_turns)
    sub = state.rows([0])
    keys = rng.hash_key(sub.seeds, sub.move_count.astype(np.uint64),
                        np.uint64(cfg.seed))
    masks = compiled_game.legal_mask(sub)
    root = _Node(sub, 0, int(sub.current_player[0]), False, -1,
                 stuck=not masks[0].any())
    tree = _Tree(root, keys[0])
    root.untried = search._action_order(masks[0], tree)
    search._forced_prefix([tree], sub, np.array([iterations]))
    start = min(iterations, len(root.untried) + len(root.children))
    for it in range(start, iterations):
        search._one_iteration([tree], [0])
    return tree


def test_visit_conservation(connect_four):
    state = engine.init(connect_four, 1, seed=2)
    tree = _search_tree(connect_four, state, 100, seed=5)
    root = tree.root
    assert root.N == 100
    # every iteration descends through exactly one root child
    assert sum(ch.N for ch in root.children.values()) == root.N

    def check(node):
        if not node.children:
            return
        assert sum(ch.N for ch in node.children.values()) == node.N - 1
        for ch in node.children.values():
            check(ch)

    for ch in root.children.values():
        check(ch)


def test_ucb_value_scaling_invariance(connect_four):
    # at c=0, selection is a pure argmax of Q; scaling all W by k>0
    # preserves the argmax child at every node
    state = engine.init(connect_four, 1, seed=2)
    tree = _search_tree(connect_four, state, 80, seed=3)
    search = _Search(connect_four, 0.0, 200)

    def check(node):
        if not node.children or all(ch.W == 0 for ch in node.children.values()):
            return
        before = search._select_child(node)
        for ch in node.children.values():
            ch.W *= 3.0
        after = search._select_child(node)
        assert before is after
        for ch in node.children.values():
            ch.W /= 3.0
        for ch in node.children.values():
            check(ch)

    check(tree.root)


def test_match_counts_sum(ttt):
    stats = play_match(ttt, RandomPolicy(1), RandomPolicy(2), num_games=1, seed=5)
    assert stats.wins_p1 + stats.wins_p2 + stats.draws + stats.truncations == 1


def test_match_swap_sides(ttt):
    stats = play_match(ttt, RandomPolicy(1), RandomPolicy(2), num_games=6, seed=5)
    assert stats.seat_of_a.tolist() == [0, 1, 0, 1, 0, 1]
    stats = play_match(ttt, RandomPolicy(1), RandomPolicy(2), num_games=4,
                       seed=5, swap_sides=False)
    assert stats.seat_of_a.tolist() == [0, 0, 0, 0]


def test_ttt_random_vs_random_distribution(ttt):
    # exhaustive weighted enumeration gives P1 58.49%, draw 12.70%
    stats = play_match(ttt, RandomPolicy(3), RandomPolicy(4),
                       num_games=10_000, seed=11)
    p1 = stats.wins_p1 / stats.games
    draw = stats.draws / stats.games
    assert abs(p1 - 0.5849) < 0.015
    assert abs(draw - 0.1270) < 0.015


def test_match_collects_gavel_inputs(connect_four):
    stats = play_match(connect_four, RandomPolicy(1), RandomPolicy(2),
                       num_games=8, seed=3)
    assert stats.turns.shape == (8,)
    assert stats.total_turns == int(stats.turns.sum())
    assert len(stats.legal_counts) == stats.total_turns
    assert stats.coverage.shape == (8,)
    assert ((stats.coverage > 0) & (stats.coverage <= 1)).all()


def test_merged_search_matches_separate_policies(ttt):
    # merged strong/weak batching must not change either seat's choices
    strong = MctsPolicy(MctsConfig(iterations=40, seed=1))
    weak = MctsPolicy(MctsConfig(iterations=20, seed=2))
    state = engine.init(ttt, batch_size=6, seed=13)
    seat_of_a = np.array([0, 1, 0, 1, 0, 1], dtype=np.int8)
    live = ~state.terminated
    a_rows = live & (state.current_player == seat_of_a)
    b_rows = live & ~a_rows
    merged = np.full(6, -1, dtype=np.int64)
    ca, cb = strong.config, weak.config
    budgets = np.where(a_rows, ca.iterations, cb.iterations)
    salt = np.where(a_rows, np.uint64(ca.seed), np.uint64(cb.seed))
    search = _Search(ttt, ca.exploration, ca.rollout_max_turns)
    merged = search.run(state, live, budgets.astype(np.int64),
                        salt.astype(np.uint64))
    sep = np.full(6, -1, dtype=np.int64)
    sep = np.where(a_rows, strong.decide(ttt, state, a_rows), sep)
    sep = np.where(b_rows, weak.decide(ttt, state, b_rows), sep)
    assert (merged == sep).all()

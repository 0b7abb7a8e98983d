"""Action-selection policies: uniform random and MCTS-UCB1, plus a match
runner.

The match runner plays many games in lockstep and batches every engine
interaction across them. For MCTS seats, each concurrent game owns its own
tree, but the per-iteration engine work (expansion steps and random
rollouts) is executed as one batch across all deciding games, and the
value-independent prefix of iterations (unvisited root children, selected
in seeded-random order) is expanded as a single mega-batch. Per-iteration
UCB1 semantics are exactly sequential: selection at any node always sees
every earlier backpropagation of its own tree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import EmptyMask, TerminalState
from .state import GameState, OUTCOME_DRAW

_ROLLOUT_CHUNK_CELLS = 2_000_000


@dataclass
class MctsConfig:
    iterations: int = 100
    exploration: float = math.sqrt(2.0)
    rollout_max_turns: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.exploration < 0:
            raise ValueError("exploration constant must be >= 0")


def random_action(mask, seed=0, counter=0):
    """Uniform choice over the true entries of a 1-D boolean mask."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise EmptyMask("no legal action to sample")
    u = float(rng.uniform(np.uint64(seed), np.uint64(counter)))
    idx = rng.masked_choice(mask[None, :], np.array([u]))
    return int(idx[0])


def _value_for(player, outcome):
    if outcome == OUTCOME_DRAW:
        return 0.0
    return 1.0 if outcome == player + 1 else -1.0


class _Node:
    __slots__ = ("src", "row", "_state", "to_move", "terminal", "outcome",
                 "children", "untried", "N", "W", "stuck")

    def __init__(self, src, row, to_move, terminal, outcome, stuck):
        self.src = src           # batch holding this node's state
        self.row = row
        self._state = None
        self.to_move = to_move
        self.terminal = terminal
        self.outcome = outcome
        self.stuck = stuck       # live but no legal action: treated as a draw
        self.children = {}
        self.untried = None      # seeded-random action order, lazily built
        self.N = 0
        self.W = 0.0

    def state(self):
        if self._state is None:
            self._state = self.src.rows([self.row])
            self.src = None
        return self._state


class _Tree:
    __slots__ = ("root", "key", "nodes_created")

    def __init__(self, root, key):
        self.root = root
        self.key = key
        self.nodes_created = 0


class _Search:
    """One batched MCTS decision over many concurrent games.

    Per-row iteration budgets allow a strong and a weak seat to share the
    same engine batches; each tree's UCB1 semantics are unaffected.
    """

    def __init__(self, compiled, exploration, rollout_max_turns):
        self.compiled = compiled
        self.exploration = exploration
        self.rollout_max_turns = rollout_max_turns

    def run(self, batch, rows, budgets, seeds_salt):
        compiled = self.compiled
        idx = np.nonzero(rows)[0]
        actions = np.full(batch.batch_size, -1, dtype=np.int64)
        if len(idx) == 0:
            return actions
        sub = batch.rows(idx)
        keys = rng.hash_key(sub.seeds, sub.move_count.astype(np.uint64),
                            seeds_salt[idx])
        masks = compiled.legal_mask(sub)
        trees = []
        for g in range(len(idx)):
            root = _Node(sub, g, int(sub.current_player[g]),
                         bool(sub.terminated[g]), int(sub.outcome[g]),
                         stuck=not masks[g].any())
            tree = _Tree(root, keys[g])
            root.untried = self._action_order(masks[g], tree)
            trees.append(tree)
        budgets = budgets[idx]

        self._forced_prefix(trees, sub, budgets)
        start_it = [min(int(budgets[g]),
                        len(t.root.untried) + len(t.root.children))
                    for g, t in enumerate(trees)]
        for it in range(int(budgets.max())):
            active = [g for g in range(len(trees))
                      if start_it[g] <= it < budgets[g]]
            if active:
                self._one_iteration(trees, active)

        for g, tree in enumerate(trees):
            actions[idx[g]] = self._best_action(tree)
        return actions

    def _action_order(self, mask_row, tree):
        actions = np.nonzero(mask_row)[0]
        if len(actions) == 0:
            return []
        order = np.argsort(rng.hash_key(tree.key, np.uint64(0xA11),
                                        actions.astype(np.uint64)),
                           kind="stable")
        return [int(a) for a in actions[order]]

    def _forced_prefix(self, trees, sub, budgets):
        """Expand the first min(budget, branching) root children at once.

        These selections never read Q values (unvisited-first), so running
        all their rollouts as one batch is exactly the sequential search.
        """
        parents = []
        actions = []
        owners = []
        for g, tree in enumerate(trees):
            root = tree.root
            if root.terminal or root.stuck:
                continue
            k = min(int(budgets[g]), len(root.untried))
            for _ in range(k):
                actions.append(root.untried.pop(0))
                parents.append(g)
                owners.append(tree)
        if not actions:
            return
        reps = np.bincount(np.array(parents), minlength=len(trees))
        stepped = GameState.repeat_rows(sub, reps)
        acts = np.array(actions, dtype=np.int64)
        self.compiled.step_into(stepped, acts, verify=False)
        self._attach_and_rollout(stepped, acts, [t.root for t in owners], owners)

    def _one_iteration(self, trees, active):
        compiled = self.compiled
        expand_parents = []
        expand_actions = []
        expand_paths = []
        expand_trees = []
        for g in active:
            tree = trees[g]
            node = tree.root
            path = [node]
            while True:
                if node.terminal or node.stuck:
                    self._backprop(path, node.outcome if node.terminal
                                   else OUTCOME_DRAW)
                    node = None
                    break
                if node.untried is None:
                    mask = compiled.legal_mask(node.state())[0]
                    node.untried = self._action_order(mask, tree)
                    if not node.untried and not node.children:
                        node.stuck = True
                        continue
                if node.untried:
                    break
                node = self._select_child(node)
                path.append(node)
            if node is None:
                continue
            expand_parents.append(node)
            expand_actions.append(node.untried.pop(0))
            expand_paths.append(path)
            expand_trees.append(tree)
        if not expand_parents:
            return
        stepped = GameState.concat([n.state() for n in expand_parents])
        acts = np.array(expand_actions, dtype=np.int64)
        compiled.step_into(stepped, acts, verify=False)
        self._attach_and_rollout(stepped, acts, expand_parents, expand_trees,
                                 expand_paths)

    def _attach_and_rollout(self, stepped, acts, parents, trees, paths=None):
        compiled = self.compiled
        counts = compiled.legal_counts(stepped)
        children = []
        for i, parent in enumerate(parents):
            tree = trees[i]
            child = _Node(stepped, i, int(stepped.current_player[i]),
                          bool(stepped.terminated[i]), int(stepped.outcome[i]),
                          stuck=(not stepped.terminated[i] and counts[i] == 0))
            parent.children[int(acts[i])] = child
            tree.nodes_created += 1
            children.append(child)
        need = [i for i, ch in enumerate(children)
                if not ch.terminal and not ch.stuck]
        outcomes = stepped.outcome.copy()
        if need:
            roll = stepped.rows(need)
            roll.seeds = rng.hash_key(
                np.array([trees[i].key for i in need], dtype=np.uint64),
                np.uint64(0x5011),
                np.array([trees[i].nodes_created for i in need],
                         dtype=np.uint64))
            finals = _rollout(compiled, roll, self.rollout_max_turns)
            outcomes[need] = finals
        for i, child in enumerate(children):
            path = (paths[i] if paths is not None else [trees[i].root])
            self._backprop(path + [child], int(outcomes[i]))

    def _select_child(self, node):
        c = self.exploration
        log_n = math.log(node.N)
        best = None
        best_score = -math.inf
        for action in sorted(node.children):
            ch = node.children[action]
            score = ch.W / ch.N + c * math.sqrt(log_n / ch.N)
            if score > best_score:
                best_score = score
                best = ch
        return best

    @staticmethod
    def _backprop(path, outcome):
        path[0].N += 1
        for parent, child in zip(path, path[1:]):
            child.N += 1
            child.W += _value_for(parent.to_move, outcome)

    @staticmethod
    def _best_action(tree):
        root = tree.root
        if not root.children:
            # terminal/stuck root or zero expansions: any legal action
            return root.untried[0] if root.untried else -1
        best = None
        best_key = None
        for action, ch in root.children.items():
            u = float(rng.uniform(tree.key, np.uint64(0x7E), np.uint64(action)))
            key = (ch.N, ch.W / max(ch.N, 1), u)
            if best_key is None or key > best_key:
                best_key = key
                best = action
    # u never collides in practice; (N, Q) ties resolve by the seeded draw
        return best


class MctsPolicy:
    """UCB1 MCTS: traversal, one-child expansion, uniform random rollout."""

    def __init__(self, config=None, **kw):
        self.config = config or MctsConfig(**kw)

    @property
    def name(self):
        return f"mcts:{self.config.iterations}"

    def decide(self, compiled, batch, rows):
        cfg = self.config
        search = _Search(compiled, cfg.exploration, cfg.rollout_max_turns)
        budgets = np.full(batch.batch_size, cfg.iterations, dtype=np.int64)
        salt = np.full(batch.batch_size, np.uint64(cfg.seed), dtype=np.uint64)
        return search.run(batch, rows, budgets, salt)


class RandomPolicy:
    """Uniform over legal actions, keyed by the per-state seed streams."""

    def __init__(self, seed=0):
        self.seed = seed

    @property
    def name(self):
        return "random"

    def decide(self, compiled, batch, rows):
        u = rng.uniform(batch.seeds, batch.move_count.astype(np.uint64),
                        np.uint64(self.seed))
        actions = compiled.sample_actions(batch, u)
        return np.where(rows, actions, -1)


def _rollout(compiled, states, max_turns):
    """Random playout to termination or the total-turn cap; (B,) outcomes.

    Long-tailed rollouts are periodically compacted to their live rows so
    a few stragglers do not keep full-width batches stepping.
    """
    chunk = max(1, _ROLLOUT_CHUNK_CELLS // max(compiled.num_cells, 1))
    outcomes = np.empty(states.batch_size, dtype=np.int8)
    for lo in range(0, states.batch_size, chunk):
        hi = min(states.batch_size, lo + chunk)
        part = states.rows(np.arange(lo, hi))
        index = np.arange(lo, hi)
        out = np.full(hi - lo, OUTCOME_DRAW, dtype=np.int8)
        while True:
            live = ~part.terminated & (part.move_count < max_turns)
            n_live = int(live.sum())
            if n_live == 0:
                out[index - lo] = np.where(part.terminated, part.outcome,
                                           OUTCOME_DRAW)
                break
            if n_live <= part.batch_size // 2 and part.batch_size > 32:
                done = ~live
                out[index[done] - lo] = np.where(part.terminated[done],
                                                 part.outcome[done],
                                                 OUTCOME_DRAW)
                keep = np.nonzero(live)[0]
                part = part.rows(keep)
                index = index[keep]
                live = np.ones(part.batch_size, dtype=bool)
            u = rng.uniform(part.seeds, part.move_count.astype(np.uint64))
            acts = compiled.sample_actions(part, u)
            stuck = live & (acts < 0)
            if stuck.any():
                # unreachable rules: score the stuck rollout as a draw
                part.terminated |= stuck
                part.outcome[stuck] = OUTCOME_DRAW
                live &= ~stuck
            if live.any():
                compiled.step_into(part, acts, rows=live, verify=False)
        outcomes[lo:hi] = out
    return outcomes


def _mergeable(a, b):
    return (isinstance(a, MctsPolicy) and isinstance(b, MctsPolicy)
            and a.config.exploration == b.config.exploration
            and a.config.rollout_max_turns == b.config.rollout_max_turns)


def mcts_search(compiled, state, config=None):
    """Best action for a single live state (batch row 0)."""
    if state.terminated.all():
        raise TerminalState("cannot search a terminated state")
    policy = MctsPolicy(config or MctsConfig())
    rows = np.zeros(state.batch_size, dtype=bool)
    rows[0] = True
    actions = policy.decide(compiled, state, rows)
    return int(actions[0])


@dataclass
class MatchStats:
    games: int
    wins_p1: int = 0
    wins_p2: int = 0
    draws: int = 0
    truncations: int = 0
    turns: np.ndarray = None            # (G,) plies per game
    legal_counts: np.ndarray = None     # per-turn legal-move counts, flat
    multi_choice_turns: int = 0
    total_turns: int = 0
    coverage: np.ndarray = None         # (G,) fraction of cells ever occupied
    seat_of_a: np.ndarray = None        # (G,) player id agent A played
    winner_agent: np.ndarray = None     # (G,) 0=A, 1=B, -1=none
    wins_a: int = 0
    wins_b: int = 0

    def check(self):
        assert self.wins_p1 + self.wins_p2 + self.draws + self.truncations \
            == self.games


def play_match(compiled, policy_a, policy_b, num_games, seed=0,
               swap_sides=True, max_turns=200, deadline=None):
    """Play policy_a vs policy_b over num_games lockstep games.

    deadline: optional absolute time.monotonic() limit; exceeding it raises
    TimeoutError between rounds (used to bound junk-game evaluations).
    """
    import time as _time
    batch = compiled.init(batch_size=num_games, seed=seed)
    seat_of_a = np.zeros(num_games, dtype=np.int8)
    if swap_sides:
        seat_of_a[1::2] = 1
    coverage = batch.board_owner >= 0
    legal_counts = []
    multi = 0
    total = 0
    while True:
        live = ~batch.terminated & (batch.move_count < max_turns)
        if not live.any():
            break
        if deadline is not None and _time.monotonic() > deadline:
            raise TimeoutError("match evaluation budget exceeded")
        counts = compiled.legal_counts(batch)
        lc = counts[live]
        legal_counts.append(lc)
        multi += int((lc > 1).sum())
        total += int(live.sum())
        a_rows = live & (batch.current_player == seat_of_a)
        b_rows = live & ~(batch.current_player == seat_of_a)
        actions = np.full(num_games, -1, dtype=np.int64)
        if _mergeable(policy_a, policy_b):
            # both seats share one engine-batched search with per-row budgets
            ca, cb = policy_a.config, policy_b.config
            budgets = np.where(a_rows, ca.iterations, cb.iterations)
            salt = np.where(a_rows, np.uint64(ca.seed), np.uint64(cb.seed))
            search = _Search(compiled, ca.exploration, ca.rollout_max_turns)
            actions = search.run(batch, live, budgets.astype(np.int64),
                                 salt.astype(np.uint64))
        else:
            for policy, rows in ((policy_a, a_rows), (policy_b, b_rows)):
                if rows.any():
                    got = policy.decide(compiled, batch, rows)
                    actions = np.where(rows, got, actions)
        stuck = live & (actions < 0)
        if stuck.any():
            batch.terminated |= stuck
            batch.truncated |= stuck
            batch.outcome[stuck] = OUTCOME_DRAW
            live &= ~stuck
            if not live.any():
                break
        compiled.step_into(batch, actions, rows=live, verify=False)
        coverage |= batch.board_owner >= 0
    trunc_rows = ~batch.terminated
    if trunc_rows.any():
        batch.terminated |= trunc_rows
        batch.truncated |= trunc_rows
        batch.outcome[trunc_rows] = OUTCOME_DRAW

    stats = MatchStats(games=num_games)
    stats.turns = batch.move_count.copy()
    stats.legal_counts = (np.concatenate(legal_counts)
                          if legal_counts else np.zeros(0, dtype=np.int64))
    stats.multi_choice_turns = multi
    stats.total_turns = total
    stats.coverage = coverage.mean(axis=1)
    stats.seat_of_a = seat_of_a
    stats.truncations = int(batch.truncated.sum())
    decisive_p1 = (batch.outcome == 1) & ~batch.truncated
    decisive_p2 = (batch.outcome == 2) & ~batch.truncated
    stats.wins_p1 = int(decisive_p1.sum())
    stats.wins_p2 = int(decisive_p2.sum())
    stats.draws = int(((batch.outcome == OUTCOME_DRAW) & ~batch.truncated).sum())
    winner_agent = np.full(num_games, -1, dtype=np.int8)
    winner_agent[decisive_p1 & (seat_of_a == 0)] = 0
    winner_agent[decisive_p2 & (seat_of_a == 1)] = 0
    winner_agent[decisive_p1 & (seat_of_a == 1)] = 1
    winner_agent[decisive_p2 & (seat_of_a == 0)] = 1
    stats.winner_agent = winner_agent
    stats.wins_a = int((winner_agent == 0).sum())
    stats.wins_b = int((winner_agent == 1).sum())
    stats.check()
    return stats

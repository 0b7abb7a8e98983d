"""Game compilation: spec + topology -> CompiledGame.

The compiler walks the validated AST once to decide the state layout and
action codec, builds per-phase mechanics/effects/end-rule closures from the
bottom up, and assembles the fixed-shape step/legality functions. All array
shapes (action space, state attributes) are constants fixed here.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from . import connectivity
from . import gamespec as gs
from .codec import make_codec
from .effects import compile_effects
from .exprs import (compile_end_predicate, compile_line_function, compile_mask,
                    compile_predicate, compile_would_custodial, resolve_side,
                    static_union)
from .mechanics import (GridworldMechanics, MovementMechanics, MoveGroup,
                        PlacementMechanics, direction_pairs)
from .state import (GameState, KIND_HOP, KIND_PASS, KIND_SLIDE, KIND_STEP,
                    OUTCOME_DRAW, StateLayout)
from .topology import resolve_direction

_ANCHOR_COST_THRESHOLD = 128


class CompileCtx:
    """Shared constants and services for expression compilation."""

    def __init__(self, spec, topo):
        self.spec = spec
        self.topo = topo
        self.num_cells = topo.num_cells
        self.piece_ids = {p.name: i for i, p in enumerate(spec.equipment.pieces)}
        self.forward_map = dict(spec.players.forward)
        self.anchored = False
        self.cache = {}
        self.region_cells = {}
        self._build_regions()
        self.conn_plans = []
        self._conn_keys = {}
        self.anchor_ok = set()
        self._cma_box = {"fn": None}   # wired after mechanics exist; shared by clones

    def _build_regions(self):
        for r in self.spec.equipment.regions:
            if r.cells:
                m = np.zeros(self.num_cells, dtype=bool)
                m[list(r.cells)] = True
            else:
                m = static_union(r.masks, self)
            m.setflags(write=False)
            self.region_cells[r.name] = m

    def can_move_again(self, state, mover, kind_id):
        return self._cma_box["fn"](state, mover, kind_id)

    def clone_anchored(self):
        out = CompileCtx.__new__(CompileCtx)
        out.__dict__.update(self.__dict__)
        out.anchored = True
        return out

    def direction_pairs(self, tokens):
        return direction_pairs(tokens, self.forward_map, self.topo)

    def connectivity_plan_for(self, node):
        dirs = tuple(resolve_direction(node.directions or ("any",), gs.P1,
                                       self.forward_map, self.topo))
        if dirs not in self._conn_keys:
            self._conn_keys[dirs] = len(self.conn_plans)
            self.conn_plans.append(dirs)
        return self._conn_keys[dirs]

    def line_anchoring_safe(self, node):
        return node in self.anchor_ok


class _StepScratch:
    __slots__ = ("moved", "conn_dirty", "next_override", "same_piece")

    def __init__(self, batch_size):
        self.moved = np.zeros(batch_size, dtype=bool)
        self.conn_dirty = np.zeros(batch_size, dtype=bool)
        self.next_override = np.full(batch_size, -1, dtype=np.int8)
        self.same_piece = np.zeros(batch_size, dtype=bool)


def _all_nodes(spec):
    for _, node in gs.walk(spec):
        yield node


def _scan(spec, topo, ctx):
    """Decide StateLayout and collect global facts in one AST pass."""
    nodes = list(_all_nodes(spec))
    types = {type(n) for n in nodes}
    has_flip = gs.FlipEffect in types
    promote_targets = {n.to_piece for n in nodes if isinstance(n, gs.PromoteEffect)}

    scores = any(t in types for t in (gs.ScoreFn, gs.SetScoreEffect,
                                      gs.IncrementScoreEffect))
    scores |= any(isinstance(n, gs.CaptureEffect) and n.increment_score for n in nodes)
    scores |= any(r.result.kind == "by_score" for r in spec.end_rules)

    passing = any(p.force_pass for p in spec.phases) or gs.PassedPred in types
    must_move = any(isinstance(n, gs.ExtraTurnEffect) and n.same_piece for n in nodes)
    transient = any(t in types for t in (gs.CapturedMask, gs.HoppedMask,
                                         gs.PromotedMask))
    last_action = any(t in types for t in (
        gs.ActionWasPred, gs.CanMoveAgainPred, gs.PrevMoveMask, gs.LastMoveInPred,
        gs.CustodialMask, gs.CornerCustodialMask, gs.ExtraTurnEffect))

    for n in nodes:
        if isinstance(n, gs.ConnectedFn):
            ctx.connectivity_plan_for(n)

    # anchored end-rule line candidates (static part of the soundness proof)
    candidates = []
    if not has_flip:
        for rule in spec.end_rules:
            for _, n in gs.walk(rule.condition):
                if isinstance(n, gs.FunctionPred) and isinstance(n.fn, gs.LineFn):
                    line = n.fn
                    if line.player != gs.MOVER:
                        continue
                    if line.piece in promote_targets:
                        continue
                    tuples, _, _ = topo.line_table(line.length, line.orientation)
                    if tuples.size > _ANCHOR_COST_THRESHOLD:
                        candidates.append(line)

    phase_mult = len(spec.phases) > 1 or any(p.kind == "once_through"
                                             for p in spec.phases)
    turn_pos = any(len(p.order) != len(set(p.order)) for p in spec.phases)

    layout = StateLayout(
        scores=scores,
        passing=passing,
        must_move=must_move,
        last_action=last_action or bool(candidates),
        transient_masks=transient,
        connectivity=len(ctx.conn_plans),
        phase=phase_mult,
        turn_pos=turn_pos,
    )
    needs_next_count = gs.NoLegalActionsPred in types
    return layout, candidates, last_action, needs_next_count


def _detect_gridworld(spec, ctx):
    """Single mover, step-only moves, one piece, no capture/flip effects."""
    players = {p for phase in spec.phases for p in phase.order}
    if len(players) != 1:
        return None
    player = players.pop()
    dirs = []
    piece = None
    for phase in spec.phases:
        mech = phase.mechanic
        if not isinstance(mech, gs.MoveMechanic):
            return None
        for mv in mech.moves:
            if not isinstance(mv, gs.StepMove):
                return None
            if piece is not None and mv.piece != piece:
                return None
            piece = mv.piece
            dirs.extend(resolve_direction(mv.directions or ("any",), player,
                                          ctx.forward_map, ctx.topo))
    for _, n in gs.walk(spec):
        if isinstance(n, (gs.CaptureEffect, gs.FlipEffect)):
            return None
    start_cells = sum(len(sp.cells) or int(static_union(sp.masks, ctx).sum())
                      for sp in spec.start if sp.player == player)
    if start_cells != 1:
        return None
    ordered = tuple(d for d in ctx.topo.directions if d in dirs)
    return player, piece, ordered


class CompiledPhase:
    __slots__ = ("kind", "order", "force_pass", "mechanics", "effects")

    def __init__(self, kind, order, force_pass, mechanics, effects):
        self.kind = kind
        self.order = order
        self.force_pass = force_pass
        self.mechanics = mechanics
        self.effects = effects


class CompiledGame:
    """Composed evaluator closures + codecs for one game (immutable)."""

    def __init__(self, spec, topo):
        self.spec = spec
        self.topology = topo
        self.num_cells = topo.num_cells
        ctx = CompileCtx(spec, topo)
        self.ctx = ctx
        self.piece_names = tuple(p.name for p in spec.equipment.pieces)

        layout, anchor_candidates, last_action_base, self._needs_next_count = \
            _scan(spec, topo, ctx)
        self.layout = layout

        grid = _detect_gridworld(spec, ctx)
        has_pass = any(p.force_pass for p in spec.phases) or any(
            isinstance(n, gs.PassedPred) for n in _all_nodes(spec))
        if grid is not None:
            self._grid_player, self._grid_piece, grid_dirs = grid
            self.codec = make_codec("gridworld", topo.num_cells, has_pass, grid_dirs)
        elif any(isinstance(p.mechanic, gs.MoveMechanic) for p in spec.phases):
            self.codec = make_codec("movement", topo.num_cells, has_pass)
        else:
            self.codec = make_codec("placement", topo.num_cells, has_pass)

        self.phases = []
        anchored_ctx = ctx.clone_anchored()
        for phase in spec.phases:
            mech = self._build_mechanics(phase, ctx, anchored_ctx, grid)
            eff_nodes = phase.mechanic.effects
            effects = compile_effects(eff_nodes, anchored_ctx) if eff_nodes else None
            self.phases.append(CompiledPhase(
                phase.kind, np.array(phase.order, dtype=np.int8),
                phase.force_pass, mech, effects))

        ctx._cma_box["fn"] = self._can_move_again

        # the cross-step legality cache is valid unless placement legality
        # reads transient masks (cleared at the start of the next step)
        unsafe = False
        for phase in spec.phases:
            mech = phase.mechanic
            if isinstance(mech, gs.PlaceMechanic):
                trees = [mech.destination]
                if mech.result is not None:
                    trees.append(mech.result)
                for tree in trees:
                    for _, n in gs.walk(tree):
                        if isinstance(n, (gs.CapturedMask, gs.HoppedMask,
                                          gs.PromotedMask)):
                            unsafe = True
        self._mech_cache_safe = not unsafe

        # one extra row marks the dead phase a finished once_through
        # sequence falls into (no legal actions; the game is out of rules)
        nphase = len(self.phases)
        maxord = max(len(p.order) for p in self.phases)
        self._order_table = np.zeros((nphase + 1, maxord), dtype=np.int8)
        self._order_len = np.ones(nphase + 1, dtype=np.int64)
        self._once = np.zeros(nphase + 1, dtype=bool)
        self._force_pass = np.zeros(nphase + 1, dtype=bool)
        self._pos_lookup = np.zeros((nphase + 1, 2), dtype=np.int8)
        for i, p in enumerate(self.phases):
            self._order_table[i, :len(p.order)] = p.order
            self._order_len[i] = len(p.order)
            self._once[i] = p.kind == "once_through"
            self._force_pass[i] = p.force_pass
            for player in (0, 1):
                hits = np.nonzero(p.order == player)[0]
                self._pos_lookup[i, player] = hits[0] if len(hits) else 0

        self._template = self._build_template()

        # anchored line predicates must be provably false at the start position
        for line in anchor_candidates:
            fn = compile_line_function(line, ctx)
            sat = any(fn(self._template, np.array([p], dtype=np.int8))[0] >= 1
                      for p in (0, 1))
            if not sat:
                ctx.anchor_ok.add(line)
        if anchor_candidates and not ctx.anchor_ok and not last_action_base:
            # anchoring fell through entirely; drop the speculative attribute
            self.layout = replace(layout, last_action=False)
            self._template = self._build_template()

        self._end_rules = [
            (compile_end_predicate(rule.condition, ctx), rule.result)
            for rule in spec.end_rules
        ]

    # -- construction --

    def _build_mechanics(self, phase, ctx, anchored_ctx, grid):
        mech = phase.mechanic
        if grid is not None:
            return GridworldMechanics(ctx.piece_ids[self._grid_piece],
                                      self.codec.directions, self.topology)
        if isinstance(mech, gs.PlaceMechanic):
            dest_fn = compile_mask(mech.destination, ctx)
            result_pred = None
            result_fast = None
            if mech.result is not None:
                result_pred = compile_predicate(mech.result, anchored_ctx)
                # (exists (custodial ...)) by the placing side evaluates
                # directly on the pre-placement board, skipping simulation
                if (isinstance(mech.result, gs.ExistsPred)
                        and isinstance(mech.result.mask, gs.CustodialMask)
                        and mech.result.mask.mover == mech.owner):
                    result_fast = compile_would_custodial(mech.result.mask, ctx)
            return PlacementMechanics(ctx.piece_ids[mech.piece], mech.owner,
                                      dest_fn, result_pred, self.topology,
                                      self.layout, ctx.conn_plans,
                                      result_fast=result_fast)
        groups = []
        for mv in mech.moves:
            pairs = ctx.direction_pairs(mv.directions or ("any",))
            pid = ctx.piece_ids[mv.piece]
            for pair in pairs:
                if isinstance(mv, gs.StepMove):
                    groups.append(MoveGroup(KIND_STEP, pid, mv.priority, pair,
                                            self.topology))
                elif isinstance(mv, gs.HopMove):
                    over_id = ctx.piece_ids[mv.over_piece] if mv.over_piece else -1
                    groups.append(MoveGroup(KIND_HOP, pid, mv.priority, pair,
                                            self.topology, over_piece_id=over_id,
                                            hop_over=mv.hop_over, capture=mv.capture))
                else:
                    groups.append(MoveGroup(KIND_SLIDE, pid, mv.priority, pair,
                                            self.topology, distance=mv.distance))
        return MovementMechanics(groups, self.topology, self.layout.must_move)

    def _build_template(self):
        t = GameState.allocate(1, self.num_cells, self.layout,
                               np.zeros(1, dtype=np.uint64))
        for sp in self.spec.start:
            if sp.cells:
                cells = list(sp.cells)
            else:
                cells = np.nonzero(static_union(sp.masks, self.ctx))[0].tolist()
            pid = self.ctx.piece_ids[sp.piece]
            t.board_piece[0, cells] = pid
            t.board_owner[0, cells] = sp.player
            if t.scores is not None:
                t.scores[0, sp.player] += len(cells)
        t.current_player[0] = self.phases[0].order[0]
        if t.comp_labels is not None:
            connectivity.init_labels(t, self.ctx.conn_plans, self.topology)
        return t

    # -- public surface --

    @property
    def action_space_size(self):
        return self.codec.size

    @property
    def pass_index(self):
        return self.codec.pass_index

    def init(self, batch_size=1, seed=0, seeds=None):
        from . import rng
        if seeds is None:
            seeds = rng.spawn_seeds(seed, batch_size)
        out = GameState.repeat_rows(self._template,
                                    np.full(1, batch_size, dtype=np.int64))
        out.seeds = np.asarray(seeds, dtype=np.uint64).reshape(batch_size).copy()
        return out

    def _phase_of(self, state):
        if state.phase is not None:
            return state.phase.astype(np.int64)
        return np.zeros(state.batch_size, dtype=np.int64)

    def _pos_of(self, state, phase):
        if state.turn_pos is not None:
            return state.turn_pos.astype(np.int64)
        return self._pos_lookup[phase, state.current_player.astype(np.int64)].astype(np.int64)

    def mech_of(self, p):
        return self.phases[p].mechanics

    def compute_all(self, state, mover):
        """Per-phase MechData (lazy per phase present in the batch)."""
        phase = self._phase_of(state)
        cache = state._mech_cache
        if cache is not None:
            cmover, cdatas, coverage = cache
            if ((coverage | state.terminated).all()
                    and (cmover[coverage] == mover[coverage]).all()):
                return phase, cdatas
        datas = [None] * len(self.phases)
        for p in range(len(self.phases)):
            if (phase == p).any():
                datas[p] = self.phases[p].mechanics.compute(state, mover)
        return phase, datas

    def legal_counts(self, state, mover=None):
        """(B,) number of legal actions (pass included when available)."""
        if mover is None:
            mover = state.current_player
        phase, datas = self.compute_all(state, mover)
        totals = np.zeros(state.batch_size, dtype=np.int64)
        for p, data in enumerate(datas):
            if data is None:
                continue
            rows = phase == p
            t = data.totals
            if self.codec.has_pass and self._force_pass[p]:
                t = np.where(t == 0, 1, t)
            totals = np.where(rows, t, totals)
        totals[state.terminated] = 0
        return totals

    def legal_mask(self, state, mover=None):
        """(B, action_space_size) boolean mask; all-false for terminated rows."""
        if mover is None:
            mover = state.current_player
        B = state.batch_size
        phase, datas = self.compute_all(state, mover)
        out = np.zeros((B, self.codec.size), dtype=bool)
        for p, data in enumerate(datas):
            if data is None:
                continue
            rows = phase == p
            m = self.phases[p].mechanics.full_mask(state, mover, data)
            width = m.shape[1]
            out[rows, :width] = m[rows]
            if self.codec.has_pass and self._force_pass[p]:
                out[rows, self.codec.pass_index] = data.totals[rows] == 0
        out[state.terminated] = False
        return out

    def sample_actions(self, state, u, mover=None):
        """Uniform legal action per row from a (B,) uniform draw; -1 if stuck."""
        if mover is None:
            mover = state.current_player
        phase, datas = self.compute_all(state, mover)
        actions = np.full(state.batch_size, -1, dtype=np.int64)
        for p, data in enumerate(datas):
            if data is None:
                continue
            rows = (phase == p) & ~state.terminated
            r = np.minimum((u * data.totals).astype(np.int64),
                           np.maximum(data.totals - 1, 0))
            acts = self.phases[p].mechanics.sample(data, state, mover, r)
            if self.codec.has_pass and self._force_pass[p]:
                acts = np.where(data.totals == 0, self.codec.pass_index, acts)
            actions = np.where(rows, acts, actions)
        return actions

    # -- stepping --

    def step(self, state, actions):
        """Pure step: returns the successor batch; terminated rows absorb."""
        out = state.copy()
        self.step_into(out, actions, verify=True)
        return out

    def step_into(self, state, actions, rows=None, verify=True):
        """In-place step core (engine internal)."""
        actions = np.asarray(actions, dtype=np.int64)
        if actions.ndim == 0:
            actions = actions.reshape(1)
        B = state.batch_size
        if rows is None:
            rows = ~state.terminated
        else:
            rows = rows & ~state.terminated
        if not rows.any():
            return
        movers = state.current_player.copy()
        scratch = _StepScratch(B)
        phase = self._phase_of(state)
        pos = self._pos_of(state, phase)

        if state.hopped_mask is not None:
            state.hopped_mask[rows] = False
            state.captured_mask[rows] = False
            state.promoted_mask[rows] = False

        if self.codec.has_pass:
            pass_rows = rows & (actions == self.codec.pass_index)
        else:
            pass_rows = np.zeros(B, dtype=bool)
        act_rows = rows & ~pass_rows

        if verify and pass_rows.any():
            _, datas = self.compute_all(state, movers)
            for p, data in enumerate(datas):
                if data is None:
                    continue
                bad = pass_rows & (phase == p) & (
                    (data.totals > 0) | (not self._force_pass[p]))
                if bad.any():
                    from .errors import IllegalAction
                    i = int(np.argmax(bad))
                    raise IllegalAction(f"pass is not legal in state row {i}")

        for p, cp in enumerate(self.phases):
            prow = act_rows & (phase == p)
            if prow.any():
                cp.mechanics.apply(state, prow, actions, movers, scratch,
                                   verify=verify)

        if state.last_kind is not None and pass_rows.any():
            state.last_kind[pass_rows] = KIND_PASS
            state.last_source[pass_rows] = -1
            state.last_dest[pass_rows] = -1
            state.last_mover[pass_rows] = movers[pass_rows]
        if state.pass_streak is not None:
            state.pass_streak[pass_rows] += 1
            state.pass_streak[act_rows] = 0
            idx = np.nonzero(pass_rows)[0]
            state.pass_flags[idx, movers[idx]] = True
            idx = np.nonzero(act_rows)[0]
            state.pass_flags[idx, movers[idx]] = False

        for p, cp in enumerate(self.phases):
            if cp.effects is not None:
                prow = act_rows & (phase == p)
                if prow.any():
                    cp.effects(state, prow, movers, scratch)

        if state.comp_labels is not None and scratch.conn_dirty.any():
            connectivity.full_recompute(state, scratch.conn_dirty & rows,
                                        self.ctx.conn_plans, self.topology)

        if state.scores is not None:
            np.maximum(state.scores, 0, out=state.scores)

        # advancement (computed before end rules: no_legal_actions looks ahead)
        nxt = pos + 1
        olen = self._order_len[phase]
        wrap = nxt >= olen
        next_phase = np.where(wrap & self._once[phase], phase + 1, phase)
        next_pos = np.where(wrap, 0, nxt)
        next_player = self._order_table[next_phase, next_pos].astype(np.int8)
        ov = scratch.next_override
        has_ov = ov >= 0
        next_player = np.where(has_ov, ov, next_player).astype(np.int8)
        next_phase = np.where(has_ov, phase, next_phase)
        next_pos = np.where(has_ov, pos, next_pos)

        if state.must_move is not None:
            state.must_move[rows] = -1
            sp = rows & has_ov & scratch.same_piece
            if sp.any():
                state.must_move[sp] = state.last_dest[sp]

        next_count = None
        state._mech_cache = None
        if self._needs_next_count:
            next_count = np.zeros(B, dtype=np.int64)
            next_datas = [None] * len(self.phases)
            for p, cp in enumerate(self.phases):
                prow = rows & (next_phase == p)
                if prow.any():
                    next_datas[p] = cp.mechanics.compute(state, next_player)
                    t = next_datas[p].totals
                    if self.codec.has_pass and self._force_pass[p]:
                        t = np.where(t == 0, 1, t)
                    next_count = np.where(prow, t, next_count)
            if self._mech_cache_safe:
                state._mech_cache = (next_player.copy(), next_datas, rows.copy())

        newly = np.zeros(B, dtype=bool)
        for pred, result in self._end_rules:
            live = rows & ~newly
            if not live.any():
                break
            fired = live & pred(state, movers, next_count)
            if not fired.any():
                continue
            state.outcome[fired] = self._result_values(result, movers, state)[fired]
            newly |= fired
        state.terminated |= newly

        state.move_count[rows] += 1
        state.current_player[rows] = next_player[rows]
        if state.phase is not None:
            state.phase[rows] = next_phase[rows].astype(np.int8)
        if state.turn_pos is not None:
            state.turn_pos[rows] = next_pos[rows].astype(np.int8)

    def _result_values(self, result, movers, state):
        B = len(movers)
        if result.kind == "draw":
            return np.full(B, OUTCOME_DRAW, dtype=np.int8)
        if result.kind == "by_score":
            s = state.scores
            out = np.full(B, OUTCOME_DRAW, dtype=np.int8)
            out[s[:, 0] > s[:, 1]] = 1
            out[s[:, 1] > s[:, 0]] = 2
            return out
        if result.who == gs.BOTH:
            return np.full(B, OUTCOME_DRAW, dtype=np.int8)
        side = resolve_side(result.who, movers)
        if result.kind == "lose":
            side = (1 - side).astype(np.int8)
        return (1 + side).astype(np.int8)

    def _can_move_again(self, state, mover, kind_id):
        phase = self._phase_of(state)
        out = np.zeros(state.batch_size, dtype=bool)
        for p, cp in enumerate(self.phases):
            rows = phase == p
            if rows.any():
                out = np.where(rows, cp.mechanics.can_move_again(state, mover, kind_id),
                               out)
        return out

    # -- observation --

    @property
    def observation_planes(self):
        return 2 * len(self.piece_names) + 1

    def observe(self, state, player):
        """(planes, cells) relative-owner observation + legal mask copy."""
        B = state.batch_size
        T = len(self.piece_names)
        planes = np.zeros((B, 2 * T + 1, self.num_cells), dtype=bool)
        player_arr = np.full(B, player, dtype=np.int8)
        for t in range(T):
            is_t = state.board_piece == t
            planes[:, 2 * t] = is_t & (state.board_owner == player_arr[:, None])
            planes[:, 2 * t + 1] = is_t & (state.board_owner == (1 - player_arr)[:, None])
        planes[:, 2 * T] = (state.current_player == player_arr)[:, None]
        return planes, self.legal_mask(state)

    def describe(self):
        board = self.spec.equipment.board
        return {
            "name": self.spec.name,
            "board": {"kind": board.kind, "rows": board.rows, "cols": board.cols},
            "num_cells": self.num_cells,
            "pieces": list(self.piece_names),
            "action_space": {"kind": self.codec.kind, "size": self.codec.size,
                             "has_pass": self.codec.has_pass},
            "observation_planes": self.observation_planes,
            "phases": len(self.phases),
            "state_layout": {
                "scores": self.layout.scores,
                "passing": self.layout.passing,
                "must_move": self.layout.must_move,
                "last_action": self.layout.last_action,
                "transient_masks": self.layout.transient_masks,
                "connectivity_plans": self.layout.connectivity,
                "phase_index": self.layout.phase,
                "turn_position": self.layout.turn_pos,
            },
            "state_bytes": self._template.nbytes(),
        }


def compile_game(spec, topology):
    """spec must already validate cleanly against topology."""
    return CompiledGame(spec, topology)

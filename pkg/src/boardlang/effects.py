"""Effect compilation: ordered state mutations after a move.

Each compiled effect is fn(state, rows, mover, scratch) applying in place to
the selected rows. ``scratch`` collects cross-cutting outcomes of the step
(extra-turn overrides, connectivity dirt).
"""

from __future__ import annotations

import numpy as np

from . import gamespec as gs
from .errors import UnsupportedConstruct
from .exprs import compile_function, compile_mask, compile_predicate, resolve_side


def compile_effects(nodes, ctx):
    fns = [_compile_effect(n, ctx) for n in nodes]

    def run_effects(state, rows, mover, scratch):
        for fn in fns:
            fn(state, rows, mover, scratch)
    return run_effects


def _compile_effect(node, ctx):
    t = type(node)

    if t is gs.CaptureEffect:
        mask_fn = compile_mask(node.mask, ctx)
        who = node.mover
        increment = node.increment_score

        def effect_capture(state, rows, mover, scratch):
            if not rows.any():
                return
            cells = mask_fn(state, mover) & rows[:, None] & (state.board_owner >= 0)
            if not cells.any():
                return
            if increment:
                gained = cells.sum(axis=1, dtype=np.int32)
                state.scores[np.arange(state.batch_size), mover] += gained
            state.board_piece[cells] = -1
            state.board_owner[cells] = -1
            if state.captured_mask is not None:
                state.captured_mask |= cells
            scratch.conn_dirty |= cells.any(axis=1)
        return effect_capture

    if t is gs.FlipEffect:
        mask_fn = compile_mask(node.mask, ctx)
        who = node.mover

        def effect_flip(state, rows, mover, scratch):
            if not rows.any():
                return
            cells = mask_fn(state, mover) & rows[:, None] & (state.board_owner >= 0)
            if not cells.any():
                return
            side = resolve_side(who, mover)
            np.copyto(state.board_owner,
                      np.broadcast_to(side[:, None], state.board_owner.shape),
                      where=cells)
            scratch.conn_dirty |= cells.any(axis=1)
        return effect_flip

    if t is gs.PromoteEffect:
        mask_fn = compile_mask(node.mask, ctx)
        from_id = ctx.piece_ids[node.from_piece]
        to_id = ctx.piece_ids[node.to_piece]
        who = node.mover

        def effect_promote(state, rows, mover, scratch):
            if not rows.any():
                return
            side = resolve_side(who, mover)
            cells = (mask_fn(state, mover) & rows[:, None]
                     & (state.board_piece == from_id)
                     & (state.board_owner == side[:, None]))
            if not cells.any():
                return
            state.board_piece[cells] = to_id
            if state.promoted_mask is not None:
                state.promoted_mask |= cells
        return effect_promote

    if t is gs.IncrementScoreEffect or t is gs.SetScoreEffect:
        fn = compile_function(node.fn, ctx)
        who = node.who
        is_set = t is gs.SetScoreEffect

        def effect_score(state, rows, mover, scratch):
            if not rows.any():
                return
            side = resolve_side(who, mover)
            vals = fn(state, mover).astype(np.int32)
            idx = np.nonzero(rows)[0]
            if is_set:
                state.scores[idx, side[idx]] = vals[idx]
            else:
                state.scores[idx, side[idx]] += vals[idx]
        return effect_score

    if t is gs.ExtraTurnEffect:
        who = node.who
        same_piece = node.same_piece

        def effect_extra_turn(state, rows, mover, scratch):
            if not rows.any():
                return
            side = resolve_side(who, mover)
            scratch.next_override = np.where(rows, side, scratch.next_override)
            if same_piece:
                scratch.same_piece |= rows
        return effect_extra_turn

    if t is gs.ConditionalEffect:
        pred = compile_predicate(node.condition, ctx)
        then_fn = _compile_effect(node.then_effect, ctx)
        else_fn = None
        if node.else_effect is not None:
            else_fn = _compile_effect(node.else_effect, ctx)

        def effect_conditional(state, rows, mover, scratch):
            if not rows.any():
                return
            cond = pred(state, mover) & rows
            then_fn(state, cond, mover, scratch)
            if else_fn is not None:
                else_fn(state, rows & ~cond, mover, scratch)
        return effect_conditional

    raise UnsupportedConstruct(f"cannot compile effect {t.__name__}")

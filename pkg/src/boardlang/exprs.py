"""Bottom-up compilation of masks, functions and predicates.

Every compiled node is a closure over its precomputed constants that maps
(state, mover) to a batch of values:

* mask      -> (B, num_cells) bool
* function  -> (B,) int64
* predicate -> (B,) bool

``mover`` is a per-state (B,) int8 array; references like ``opponent`` are
resolved against it row-wise. End-rule predicates take an extra
``next_count`` argument so ``no_legal_actions`` can see the next player's
legal-action count.
"""

from __future__ import annotations

import numpy as np

from . import gamespec as gs
from .errors import UnsupportedConstruct
from .state import KIND_HOP, KIND_SLIDE, KIND_STEP, MOVE_KIND_IDS
from .topology import INVERSE_DIR

_EDGE_OF_FACING = {"up": "top", "down": "bottom", "left": "left", "right": "right"}
_OPPOSITE_FACING = {"up": "down", "down": "up", "left": "right", "right": "left"}


def resolve_side(ref, mover):
    """(B,) player ids for a mover/opponent/P1/P2 reference."""
    if ref in (gs.MOVER, ""):
        return mover
    if ref == gs.OPPONENT:
        return (1 - mover).astype(np.int8)
    if ref in ("P1", 0):
        return np.zeros_like(mover)
    if ref in ("P2", 1):
        return np.ones_like(mover)
    raise UnsupportedConstruct(f"cannot resolve side reference {ref!r}")


def pad_cells(arr, fill):
    """Append one sentinel column so sentinel cell indices gather `fill`."""
    B = arr.shape[0]
    pad = np.full((B, 1), fill, dtype=arr.dtype)
    return np.concatenate([arr, pad], axis=1)


def _static_or_none(node, ctx):
    """(num_cells,) bool for geometry-only masks, else None."""
    t = type(node)
    topo = ctx.topo
    if t is gs.CenterMask:
        return topo.center_mask
    if t is gs.CornersMask:
        return topo.corners_mask
    if t is gs.RowMask:
        return np.asarray(topo.row_of == node.index)
    if t is gs.ColumnMask:
        return np.asarray(topo.col_of == node.index)
    if t is gs.EdgeMask and node.which not in ("forward", "backward"):
        return topo.edge_masks[node.which]
    if t is gs.RegionMask:
        return ctx.region_cells[node.region]
    if t is gs.MultiMask:
        out = np.zeros(topo.num_cells, dtype=bool)
        for m in topo.multi_mask(node.kind):
            out |= m
        return out
    if t is gs.MaskAnd:
        parts = [_static_or_none(i, ctx) for i in node.items]
        if any(p is None for p in parts):
            return None
        out = parts[0].copy()
        for p in parts[1:]:
            out &= p
        return out
    if t is gs.MaskOr:
        parts = [_static_or_none(i, ctx) for i in node.items]
        if any(p is None for p in parts):
            return None
        out = parts[0].copy()
        for p in parts[1:]:
            out |= p
        return out
    if t is gs.MaskNot:
        inner = _static_or_none(node.item, ctx)
        return None if inner is None else ~inner
    return None


def eval_static_mask(node, ctx):
    """Force a static mask (validation guarantees these node kinds)."""
    m = _static_or_none(node, ctx)
    if m is None:
        raise UnsupportedConstruct(f"{type(node).__name__} is not static")
    return m


def static_union(masks, ctx):
    out = np.zeros(ctx.topo.num_cells, dtype=bool)
    for m in masks:
        out |= eval_static_mask(m, ctx)
    return out


# ---------------------------------------------------------------- masks

def compile_mask(node, ctx):
    t = type(node)
    C = ctx.num_cells

    static = _static_or_none(node, ctx)
    if static is not None:
        frozen = static.copy()
        frozen.setflags(write=False)

        def mask_static(state, mover):
            return np.broadcast_to(frozen, (state.batch_size, C))
        return mask_static

    if t is gs.EmptyMask:
        def mask_empty(state, mover):
            return state.board_owner < 0
        return mask_empty

    if t is gs.OccupiedMask:
        who = node.who
        if not who:
            def mask_occupied_any(state, mover):
                return state.board_owner >= 0
            return mask_occupied_any

        def mask_occupied(state, mover):
            side = resolve_side(who, mover)
            return state.board_owner == side[:, None]
        return mask_occupied

    if t is gs.EdgeMask:  # forward / backward (static ones handled above)
        masks = []
        for player in (gs.P1, gs.P2):
            facing = ctx.forward_map[player]
            if node.which == "backward":
                facing = _OPPOSITE_FACING[facing]
            masks.append(ctx.topo.edge_masks[_EDGE_OF_FACING[facing]])
        m1, m2 = masks

        def mask_forward_edge(state, mover):
            return np.where((mover == 0)[:, None], m1, m2)
        return mask_forward_edge

    if t is gs.CapturedMask:
        def mask_captured(state, mover):
            return state.captured_mask
        return mask_captured

    if t is gs.HoppedMask:
        def mask_hopped(state, mover):
            return state.hopped_mask
        return mask_hopped

    if t is gs.PromotedMask:
        def mask_promoted(state, mover):
            return state.promoted_mask
        return mask_promoted

    if t is gs.PrevMoveMask:
        who = node.who

        def mask_prev_move(state, mover):
            side = resolve_side(who, mover)
            dest = state.last_dest_by_player[np.arange(state.batch_size), side]
            out = np.zeros((state.batch_size, C + 1), dtype=bool)
            out[np.arange(state.batch_size), np.where(dest >= 0, dest, C)] = True
            return out[:, :C]
        return mask_prev_move

    if t is gs.AdjacentMask:
        inner = compile_mask(node.inner, ctx)
        dir_pairs = ctx.direction_pairs(node.directions or ("any",))
        # shift(m, d)[x] is m at x's -d neighbor
        tables = [np.stack([ctx.topo.neighbor_table[INVERSE_DIR[d1]],
                            ctx.topo.neighbor_table[INVERSE_DIR[d2]]])
                  for d1, d2 in dir_pairs]

        def mask_adjacent(state, mover):
            B = state.batch_size
            m = pad_cells(inner(state, mover), False)
            rowsel = np.arange(B)[:, None]
            out = np.zeros((B, C), dtype=bool)
            for tab in tables:
                nbrs = tab[mover.astype(np.intp)][:, :C]
                out |= m[rowsel, nbrs]
            return out
        return mask_adjacent

    if t is gs.CustodialMask:
        return _compile_custodial(node, ctx)

    if t is gs.CornerCustodialMask:
        return _compile_corner_custodial(node, ctx)

    if t is gs.LineFn:
        return _compile_line_mask(node, ctx)

    if t is gs.MaskAnd:
        parts = [compile_mask(i, ctx) for i in node.items]

        def mask_and(state, mover):
            out = parts[0](state, mover).copy()
            for p in parts[1:]:
                out &= p(state, mover)
            return out
        return mask_and

    if t is gs.MaskOr:
        parts = [compile_mask(i, ctx) for i in node.items]

        def mask_or(state, mover):
            out = parts[0](state, mover).copy()
            for p in parts[1:]:
                out |= p(state, mover)
            return out
        return mask_or

    if t is gs.MaskNot:
        inner = compile_mask(node.item, ctx)

        def mask_not(state, mover):
            return ~inner(state, mover)
        return mask_not

    raise UnsupportedConstruct(f"cannot compile mask {t.__name__}")


def _custodial_dirs(node, ctx):
    """Both walk directions of every axis in the orientation."""
    axis_dirs = ctx.topo.orientation_dirs(node.orientation)
    dirs = []
    for d in axis_dirs:
        dirs.append(d)
        dirs.append(INVERSE_DIR[d])
    return dirs


def _compile_custodial(node, ctx):
    piece_id = ctx.piece_ids[node.piece]
    length = node.length
    who = node.mover
    dirs = _custodial_dirs(node, ctx)
    C = ctx.num_cells
    rays = [ctx.topo.ray(d) for d in dirs]

    if ctx.anchored:
        # gather the rays from the single anchor cell: (B, D, L) work arrays
        # keep cost independent of board size
        stacked = _stacked_rays(dirs, ctx)                 # (C, D, L)
        stacked_full = np.concatenate(
            [stacked, np.full((1,) + stacked.shape[1:], C, np.int16)])
        D, L = stacked.shape[1], stacked.shape[2]

        def mask_custodial_anchored(state, mover):
            B = state.batch_size
            side = resolve_side(who, mover)
            target = (1 - side).astype(np.int8)
            own_anchor = (state.last_dest >= 0) & (state.last_mover == side)
            anchor = np.where(own_anchor, state.last_dest, C)
            owner_pad = pad_cells(state.board_owner, -2)
            piece_pad = pad_cells(state.board_piece, -2)
            cells = stacked_full[anchor]                   # (B, D, L)
            rowsel = np.arange(B)[:, None, None]
            o = owner_pad[rowsel, cells]
            is_target = (o == target[:, None, None]) \
                & (piece_pad[rowsel, cells] == piece_id)
            run = np.logical_and.accumulate(is_target, axis=2)
            runlen = run.sum(axis=2, dtype=np.int16)       # (B, D)
            flank_idx = np.minimum(runlen, L - 1).astype(np.intp)
            flat_o = o.reshape(B * D, L)
            flank_owner = flat_o[np.arange(B * D), flank_idx.reshape(-1)] \
                .reshape(B, D)
            ok = (runlen >= 1) & (runlen < L) & (flank_owner == side[:, None])
            if length != "any":
                ok &= runlen == length
            marked = run & ok[:, :, None]                  # (B, D, L)
            # rays from one anchor never share cells, so a single flat
            # scatter is collision-free (sentinel column absorbs padding)
            out = np.zeros((B, C + 1), dtype=bool)
            out[np.arange(B)[:, None], cells.reshape(B, D * L)] = \
                marked.reshape(B, D * L)
            out[:, C] = False
            return out[:, :C]
        return mask_custodial_anchored

    def mask_custodial_global(state, mover):
        B = state.batch_size
        side = resolve_side(who, mover)
        target = (1 - side).astype(np.int8)
        owner_pad = pad_cells(state.board_owner, -2)
        piece_pad = pad_cells(state.board_piece, -2)
        out = np.zeros((B, C + 1), dtype=bool)
        flanker = state.board_owner == side[:, None]
        rowsel = np.arange(B)[:, None, None]
        for ray in rays:
            cells = ray[:C]                               # (C, L)
            o = owner_pad[:, cells]                       # (B, C, L)
            p = piece_pad[:, cells]
            is_target = (o == target[:, None, None]) & (p == piece_id)
            run = np.logical_and.accumulate(is_target, axis=2)
            runlen = run.sum(axis=2)
            L = cells.shape[1]
            flank_idx = np.minimum(runlen, L - 1)
            flank_owner = np.take_along_axis(o, flank_idx[:, :, None], axis=2)[:, :, 0]
            ok = flanker & (runlen >= 1) & (runlen < L) & (flank_owner == side[:, None])
            if length != "any":
                ok &= runlen == length
            marked = run & ok[:, :, None]
            np.logical_or.at(out, (rowsel, np.broadcast_to(cells, (B, C, L))), marked)
        return out[:, :C]
    return mask_custodial_global


def _stacked_rays(dirs, ctx):
    """(C, D, L) ray table over all directions, padded to a common length."""
    C = ctx.num_cells
    rays = [ctx.topo.ray(d)[:C] for d in dirs]
    L = max(r.shape[1] for r in rays)
    out = np.full((C, len(dirs), L), C, dtype=np.int16)
    for i, r in enumerate(rays):
        out[:, i, :r.shape[1]] = r
    out.setflags(write=False)
    return out


def compile_would_custodial(node, ctx):
    """(B, C) mask of cells whose placement would create the custodial
    arrangement, evaluated directly on the pre-placement board.

    Equivalent to simulating the placement per candidate cell and reading
    the anchored custodial mask: rays never include their anchor, so the
    only board change (the anchor itself) cannot affect the scan.

    Runs are propagated by shift composition on the whole board plane:
    z_k[x] = target at x..x+(k-1)d and flanker at x+kd, so a candidate c is
    legal along d iff z_k[c+d] for an admitted run length k.
    """
    piece_id = ctx.piece_ids[node.piece]
    length = node.length
    who = node.mover
    dirs = _custodial_dirs(node, ctx)
    C = ctx.num_cells
    D = len(dirs)
    nt_stack = np.stack([ctx.topo.neighbor_table[d] for d in dirs]).astype(np.intp)
    max_len = max(ctx.topo.ray(d).shape[1] for d in dirs)
    dsel = np.arange(D)[:, None]

    def would_custodial(state, mover):
        B = state.batch_size
        side = resolve_side(who, mover)
        target = (1 - side).astype(np.int8)
        t = np.zeros((B, 1, C + 1), dtype=bool)
        t[:, 0, :C] = ((state.board_owner == target[:, None])
                       & (state.board_piece == piece_id))
        s = np.zeros((B, C + 1), dtype=bool)
        s[:, :C] = state.board_owner == side[:, None]
        z = t & s[:, nt_stack]                       # (B, D, C+1)
        if length == "any":
            acc = z.copy()
            for _ in range(max_len - 2):
                if not z.any():
                    break
                z = t & z[:, dsel, nt_stack]
                acc |= z
        else:
            for _ in range(length - 1):
                z = t & z[:, dsel, nt_stack]
            acc = z
        return acc[:, dsel, nt_stack].any(axis=1)[:, :C]
    return would_custodial


def _compile_corner_custodial(node, ctx):
    piece_id = ctx.piece_ids[node.piece]
    who = node.mover
    C = ctx.num_cells
    anchored = ctx.anchored
    corners = []
    for c in ctx.topo.corner_cells:
        nbrs = [ctx.topo.neighbor(c, d) for d in ("up", "down", "left", "right")
                if ctx.topo.neighbor(c, d) is not None]
        if len(nbrs) == 2:
            corners.append((c, nbrs[0], nbrs[1]))

    def mask_corner_custodial(state, mover):
        B = state.batch_size
        side = resolve_side(who, mover)
        target = (1 - side).astype(np.int8)
        out = np.zeros((B, C), dtype=bool)
        for c, n1, n2 in corners:
            cond = ((state.board_owner[:, c] == target)
                    & (state.board_piece[:, c] == piece_id)
                    & (state.board_owner[:, n1] == side)
                    & (state.board_owner[:, n2] == side))
            if anchored:
                cond &= ((state.last_dest == n1) | (state.last_dest == n2))
                cond &= state.last_mover == side
            out[:, c] = cond
        return out
    return mask_corner_custodial


# ---------------------------------------------------------------- lines

class _LineTables:
    """Precomputed constants for one line node on one board."""

    def __init__(self, node, ctx):
        topo = ctx.topo
        tuples, ext_b, ext_a = topo.line_table(node.length, node.orientation)
        self.tuples = tuples
        self.ext_b = ext_b
        self.ext_a = ext_a
        self.length = node.length
        self.exact = node.exact
        self.piece_id = ctx.piece_ids[node.piece]
        self.player = node.player
        self.T = len(tuples)
        self.allowed = None
        if node.exclude is not None:
            excl_nodes = node.exclude if isinstance(node.exclude, tuple) else (node.exclude,)
            excl = static_union(excl_nodes, ctx)
            self.allowed = ~excl[tuples].any(axis=1) if self.T else np.zeros(0, bool)

    def satisfied(self, state, mover):
        """(B, T) bool of fully-owned (and exact, allowed) windows."""
        B = state.batch_size
        if self.T == 0:
            return np.zeros((B, 0), dtype=bool)
        side = resolve_side(self.player, mover)
        owner_pad = pad_cells(state.board_owner, -2)
        piece_pad = pad_cells(state.board_piece, -2)
        o = owner_pad[:, self.tuples]
        p = piece_pad[:, self.tuples]
        sat = ((o == side[:, None, None]) & (p == self.piece_id)).all(axis=2)
        if self.exact:
            for ext in (self.ext_b, self.ext_a):
                same = (owner_pad[:, ext] == side[:, None]) & (piece_pad[:, ext] == self.piece_id)
                sat &= ~same
        if self.allowed is not None:
            sat &= self.allowed
        return sat


def _line_tables(node, ctx):
    key = ("line", node)
    if key not in ctx.cache:
        ctx.cache[key] = _LineTables(node, ctx)
    return ctx.cache[key]


def compile_line_function(node, ctx):
    tables = _line_tables(node, ctx)

    def line_count(state, mover):
        return tables.satisfied(state, mover).sum(axis=1)
    return line_count


def _compile_line_mask(node, ctx):
    tables = _line_tables(node, ctx)
    C = ctx.num_cells
    if tables.T:
        membership = np.zeros((tables.T, C), dtype=np.uint8)
        for i, row in enumerate(tables.tuples):
            membership[i, row] = 1
    else:
        membership = np.zeros((0, C), dtype=np.uint8)

    def line_mask(state, mover):
        sat = tables.satisfied(state, mover)
        return (sat.astype(np.uint8) @ membership) > 0
    return line_mask


def compile_line_anchored_exists(node, ctx):
    """Fast end-rule form: does a satisfied window pass through last_dest?

    Sound only under conditions the compiler checks (no flips, no promotion
    into this piece type, player is the acting mover, false at init).
    """
    tables = _line_tables(node, ctx)
    C = ctx.num_cells
    # per-cell membership lists, padded with T (sentinel window)
    per_cell = [[] for _ in range(C + 1)]
    for i, row in enumerate(tables.tuples):
        for c in set(int(x) for x in row):
            per_cell[c].append(i)
    width = max((len(v) for v in per_cell), default=0)
    width = max(width, 1)
    cell_tuples = np.full((C + 1, width), tables.T, dtype=np.int32)
    for c, lst in enumerate(per_cell):
        cell_tuples[c, :len(lst)] = lst
    T = tables.T
    tuples_pad = np.concatenate([tables.tuples,
                                 np.full((1, tables.length), C, dtype=np.int16)])
    ext_b_pad = np.concatenate([tables.ext_b, np.int16([C])])
    ext_a_pad = np.concatenate([tables.ext_a, np.int16([C])])
    allowed_pad = None
    if tables.allowed is not None:
        allowed_pad = np.concatenate([tables.allowed, [False]])

    def line_anchored(state, mover):
        B = state.batch_size
        dest = np.where((state.last_dest >= 0) & (state.last_mover == mover),
                        state.last_dest, C)
        tt = cell_tuples[dest]                        # (B, M)
        cells = tuples_pad[tt]                        # (B, M, L)
        side = resolve_side(tables.player, mover)
        owner_pad = pad_cells(state.board_owner, -2)
        piece_pad = pad_cells(state.board_piece, -2)
        rowsel = np.arange(B)[:, None, None]
        o = owner_pad[rowsel, cells]
        p = piece_pad[rowsel, cells]
        sat = ((o == side[:, None, None]) & (p == tables.piece_id)).all(axis=2)
        sat &= tt < T
        if tables.exact:
            rows2 = np.arange(B)[:, None]
            for ext in (ext_b_pad, ext_a_pad):
                ec = ext[tt]
                same = ((owner_pad[rows2, ec] == side[:, None])
                        & (piece_pad[rows2, ec] == tables.piece_id))
                sat &= ~same
        if allowed_pad is not None:
            sat &= allowed_pad[tt]
        return sat.any(axis=1)
    return line_anchored


# ---------------------------------------------------------------- functions

def compile_function(node, ctx):
    t = type(node)

    if t is gs.ConstantFn:
        value = np.int64(node.value)

        def fn_const(state, mover):
            return np.full(state.batch_size, value, dtype=np.int64)
        return fn_const

    if t is gs.AddFn or t is gs.MultiplyFn:
        parts = [compile_function(i, ctx) for i in node.items]
        mul = t is gs.MultiplyFn

        def fn_arith(state, mover):
            out = parts[0](state, mover).astype(np.int64)
            for p in parts[1:]:
                if mul:
                    out = out * p(state, mover)
                else:
                    out = out + p(state, mover)
            return out
        return fn_arith

    if t is gs.SubtractFn:
        fa = compile_function(node.a, ctx)
        fb = compile_function(node.b, ctx)

        def fn_sub(state, mover):
            return fa(state, mover).astype(np.int64) - fb(state, mover)
        return fn_sub

    if t is gs.CountFn:
        m = compile_mask(node.mask, ctx)

        def fn_count(state, mover):
            return m(state, mover).sum(axis=1, dtype=np.int64)
        return fn_count

    if t is gs.ScoreFn:
        who = node.who

        def fn_score(state, mover):
            side = resolve_side(who, mover)
            return state.scores[np.arange(state.batch_size), side].astype(np.int64)
        return fn_score

    if t is gs.LineFn:
        return compile_line_function(node, ctx)

    if t is gs.PatternFn:
        return _compile_pattern(node, ctx)

    if t is gs.ConnectedFn:
        return _compile_connected(node, ctx)

    raise UnsupportedConstruct(f"cannot compile function {t.__name__}")


def _compile_pattern(node, ctx):
    topo = ctx.topo
    if node.shape is not None:
        offsets = topo.shape_offsets(node.shape)
    else:
        offsets = [(i // node.width, i % node.width) for i in node.offsets]
    placements = topo.pattern_table(offsets, rotate=node.rotate)
    piece_id = ctx.piece_ids[node.piece]
    player = node.player
    allowed = None
    if node.exclude is not None:
        excl_nodes = node.exclude if isinstance(node.exclude, tuple) else (node.exclude,)
        excl = static_union(excl_nodes, ctx)
        if len(placements):
            allowed = ~excl[placements].any(axis=1)

    def fn_pattern(state, mover):
        B = state.batch_size
        if len(placements) == 0:
            return np.zeros(B, dtype=np.int64)
        side = resolve_side(player, mover)
        o = state.board_owner[:, placements]
        p = state.board_piece[:, placements]
        sat = ((o == side[:, None, None]) & (p == piece_id)).all(axis=2)
        if allowed is not None:
            sat &= allowed
        return sat.sum(axis=1, dtype=np.int64)
    return fn_pattern


def _compile_connected(node, ctx):
    plan = ctx.connectivity_plan_for(node)
    if isinstance(node.masks, gs.MultiMask):
        targets = ctx.topo.multi_mask(node.masks.kind)
    else:
        targets = [eval_static_mask(m, ctx) for m in node.masks]
    who = node.mover
    C = ctx.num_cells

    def fn_connected(state, mover):
        B = state.batch_size
        side = resolve_side(who, mover)
        labels = state.comp_labels[:, plan, :]
        mine = state.board_owner == side[:, None]
        rowsel = np.arange(B)[:, None]
        hits = None
        for tgt in targets:
            sel = np.where(mine & tgt, labels, C).astype(np.int64)
            h = np.zeros((B, C + 1), dtype=bool)
            h[rowsel, sel] = True
            h[:, C] = False
            hits = h if hits is None else (hits & h)
        return hits.any(axis=1).astype(np.int64)
    return fn_connected


# ---------------------------------------------------------------- predicates

def compile_predicate(node, ctx):
    t = type(node)

    if t is gs.PredAnd or t is gs.PredOr:
        parts = [compile_predicate(i, ctx) for i in node.items]
        is_and = t is gs.PredAnd

        def pred_bool(state, mover):
            out = parts[0](state, mover).copy()
            for p in parts[1:]:
                if is_and:
                    if not out.any():
                        break
                    out &= p(state, mover)
                else:
                    if out.all():
                        break
                    out |= p(state, mover)
            return out
        return pred_bool

    if t is gs.PredNot:
        inner = compile_predicate(node.item, ctx)

        def pred_not(state, mover):
            return ~inner(state, mover)
        return pred_not

    if t is gs.FunctionPred:
        fn = compile_function(node.fn, ctx)

        def pred_fn(state, mover):
            return fn(state, mover) >= 1
        return pred_fn

    if t is gs.ExistsPred:
        m = compile_mask(node.mask, ctx)

        def pred_exists(state, mover):
            return m(state, mover).any(axis=1)
        return pred_exists

    if t is gs.FullBoardPred:
        def pred_full(state, mover):
            return (state.board_owner >= 0).all(axis=1)
        return pred_full

    if t is gs.MoverIsPred:
        player = node.player

        def pred_mover_is(state, mover):
            return mover == player
        return pred_mover_is

    if t is gs.EqualsPred:
        parts = [compile_function(i, ctx) for i in node.items]

        def pred_eq(state, mover):
            first = parts[0](state, mover)
            out = np.ones(state.batch_size, dtype=bool)
            for p in parts[1:]:
                out &= first == p(state, mover)
            return out
        return pred_eq

    if t is gs.GreaterEqPred or t is gs.LessEqPred:
        fa = compile_function(node.a, ctx)
        fb = compile_function(node.b, ctx)
        ge = t is gs.GreaterEqPred

        def pred_cmp(state, mover):
            a, b = fa(state, mover), fb(state, mover)
            return a >= b if ge else a <= b
        return pred_cmp

    if t is gs.LastMoveInPred:
        m = compile_mask(node.mask, ctx)
        C = ctx.num_cells

        def pred_last_move_in(state, mover):
            B = state.batch_size
            dest = np.where((state.last_dest >= 0) & (state.last_mover == mover),
                            state.last_dest, C)
            return pad_cells(m(state, mover), False)[np.arange(B), dest]
        return pred_last_move_in

    if t is gs.ActionWasPred:
        who = node.who
        kind_id = MOVE_KIND_IDS[node.kind]

        def pred_action_was(state, mover):
            side = resolve_side(who, mover)
            return (state.last_mover == side) & (state.last_kind == kind_id)
        return pred_action_was

    if t is gs.CanMoveAgainPred:
        kind_id = {"hop": KIND_HOP, "step": KIND_STEP, "slide": KIND_SLIDE}[node.kind]

        def pred_can_move_again(state, mover):
            return ctx.can_move_again(state, mover, kind_id)
        return pred_can_move_again

    if t is gs.PassedPred:
        who = node.who
        if who == gs.BOTH:
            def pred_passed_both(state, mover):
                return state.pass_streak >= 2
            return pred_passed_both

        def pred_passed(state, mover):
            side = resolve_side(who, mover)
            return state.pass_flags[np.arange(state.batch_size), side]
        return pred_passed

    if t is gs.NoLegalActionsPred:
        raise UnsupportedConstruct("no_legal_actions outside an end condition")

    raise UnsupportedConstruct(f"cannot compile predicate {t.__name__}")


def compile_end_predicate(node, ctx):
    """End-rule predicate: fn(state, mover, next_count) -> (B,) bool."""
    t = type(node)
    if t is gs.NoLegalActionsPred:
        def end_no_legal(state, mover, next_count):
            return next_count == 0
        return end_no_legal
    if t in (gs.PredAnd, gs.PredOr):
        parts = [compile_end_predicate(i, ctx) for i in node.items]
        is_and = t is gs.PredAnd

        def end_bool(state, mover, next_count):
            out = parts[0](state, mover, next_count).copy()
            for p in parts[1:]:
                if is_and:
                    if not out.any():
                        break
                    out &= p(state, mover, next_count)
                else:
                    if out.all():
                        break
                    out |= p(state, mover, next_count)
            return out
        return end_bool
    if t is gs.PredNot:
        inner = compile_end_predicate(node.item, ctx)

        def end_not(state, mover, next_count):
            return ~inner(state, mover, next_count)
        return end_not
    if t is gs.FunctionPred and isinstance(node.fn, gs.LineFn) \
            and ctx.line_anchoring_safe(node.fn):
        fast = compile_line_anchored_exists(node.fn, ctx)

        def end_line(state, mover, next_count):
            return fast(state, mover)
        return end_line
    plain = compile_predicate(node, ctx)

    def end_plain(state, mover, next_count):
        return plain(state, mover)
    return end_plain

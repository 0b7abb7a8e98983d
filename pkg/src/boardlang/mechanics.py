"""Play-mechanic compilation: legality, uniform sampling, application.

Movement legality is kept in compact per-source count matrices rather than
materialized (num_cells ** 2) masks; rollouts sample directly from the
counts, and the full action mask is only built when explicitly requested.

A group is one (move alternative, direction slot). Direction slots pair
each player's resolved direction so relative directions (forward_left, ...)
compile to a per-player neighbor table indexed by the mover.
"""

from __future__ import annotations

import numpy as np

from . import gamespec as gs
from .errors import IllegalAction
from .state import KIND_HOP, KIND_PLACE, KIND_SLIDE, KIND_STEP
from . import connectivity
from .topology import resolve_direction

_BIG_PRIO = 10 ** 6


def direction_pairs(tokens, forward_map, topo):
    """Pair P1's and P2's resolved directions slot-by-slot."""
    if not tokens:
        tokens = ("any",)
    pairs = []
    for word in tokens:
        d1 = resolve_direction((word,), gs.P1, forward_map, topo)
        d2 = resolve_direction((word,), gs.P2, forward_map, topo)
        if len(d1) == len(d2):
            pairs.extend(zip(d1, d2))
        else:  # asymmetric expansion cannot happen for grammar keywords
            pairs.extend((d, d) for d in d1)
    out = []
    for p in pairs:
        if p not in out:
            out.append(p)
    return tuple(out)


class MoveGroup:
    __slots__ = ("kind", "piece_id", "priority", "nt", "nt2", "ray",
                 "symmetric", "over_piece_id", "hop_over", "capture",
                 "distance", "max_reach")

    def __init__(self, kind, piece_id, priority, dir_pair, topo,
                 over_piece_id=-1, hop_over="", capture=False, distance=0):
        self.kind = kind
        self.piece_id = piece_id
        self.priority = priority
        self.over_piece_id = over_piece_id
        self.hop_over = hop_over
        self.capture = capture
        self.distance = distance
        d1, d2 = dir_pair
        self.symmetric = d1 == d2
        nt1 = topo.neighbor_table[d1]
        nt2_ = topo.neighbor_table[d2]
        self.nt = np.stack([nt1, nt2_])
        if kind == KIND_HOP:
            self.nt2 = np.stack([nt1[nt1], nt2_[nt2_]])
        else:
            self.nt2 = None
        if kind == KIND_SLIDE:
            r1, r2 = topo.ray(d1), topo.ray(d2)
            L = max(r1.shape[1], r2.shape[1])
            if distance:
                L = min(L, distance)

            def fit(r):
                C = topo.num_cells
                out = np.full((C + 1, L), C, dtype=np.int16)
                w = min(L, r.shape[1])
                out[:, :w] = r[:, :w]
                return out
            self.ray = np.stack([fit(r1), fit(r2)])
            self.max_reach = L
        else:
            self.ray = None


class MechData:
    """Legality snapshot for one phase mechanic on one batch."""

    __slots__ = ("counts", "group_totals", "active", "totals", "aux")

    def __init__(self, counts, group_totals, active, totals, aux):
        self.counts = counts
        self.group_totals = group_totals
        self.active = active
        self.totals = totals
        self.aux = aux


def _pad_bool(arr):
    B = arr.shape[0]
    return np.concatenate([arr, np.zeros((B, 1), dtype=bool)], axis=1)


class MovementMechanics:
    kind = "movement"

    def __init__(self, groups, topo, must_move_used):
        self.groups = groups
        self.topo = topo
        self.C = topo.num_cells
        self.must_move_used = must_move_used
        self.multi_priority = len({g.priority for g in groups}) > 1
        self._cellgrid = np.arange(self.C, dtype=np.int16)[None, :]

    # -- shared sub-computations --

    def _src_ok(self, state, mover, cache, piece_id):
        key = piece_id
        got = cache.get(key)
        if got is not None:
            return got
        ok = (state.board_piece == piece_id) & (state.board_owner == mover[:, None])
        if self.must_move_used and state.must_move is not None:
            ok = ok & ((state.must_move < 0)[:, None]
                       | (self._cellgrid == state.must_move[:, None]))
        cache[key] = ok
        return ok

    def _gather_pair(self, table, mover):
        """Per-row neighbor row from a (2, C+1) table: (B, C) submatrix."""
        if np.array_equal(table[0], table[1]):
            return np.broadcast_to(table[0][:self.C], (len(mover), self.C))
        return table[mover.astype(np.intp)][:, :self.C]

    def compute(self, state, mover):
        B = state.batch_size
        C = self.C
        empty_pad = _pad_bool(state.board_owner < 0)
        rowsel = np.arange(B)[:, None]
        cache = {}
        counts = []
        aux = []
        for g in self.groups:
            src = self._src_ok(state, mover, cache, g.piece_id)
            if g.kind == KIND_STEP:
                dest = self._gather_pair(g.nt, mover)
                ok = src & (dest != C) & empty_pad[rowsel, dest]
                counts.append(ok.astype(np.int16))
                aux.append(dest)
            elif g.kind == KIND_HOP:
                mid = self._gather_pair(g.nt, mover)
                dest = self._gather_pair(g.nt2, mover)
                mid_owner = np.concatenate(
                    [state.board_owner, np.full((B, 1), -2, np.int8)], axis=1
                )[rowsel, mid]
                over_ok = mid_owner >= 0
                if g.hop_over != "":
                    from .exprs import resolve_side
                    side = resolve_side(g.hop_over, mover)
                    over_ok &= mid_owner == side[:, None]
                if g.over_piece_id >= 0:
                    mid_piece = np.concatenate(
                        [state.board_piece, np.full((B, 1), -2, np.int8)], axis=1
                    )[rowsel, mid]
                    over_ok &= mid_piece == g.over_piece_id
                ok = src & over_ok & (dest != C) & empty_pad[rowsel, dest]
                counts.append(ok.astype(np.int16))
                aux.append(dest)
            else:  # slide: prefix-empty reach along the ray, unrolled
                if g.symmetric:
                    cells = g.ray[0][:C]                      # (C, L)
                    ray_b = None
                    reach = empty_pad[:, cells[:, 0]]
                    planes = [reach]
                    cnt = reach.astype(np.int16)
                    for k in range(1, cells.shape[1]):
                        reach = reach & empty_pad[:, cells[:, k]]
                        planes.append(reach)
                        cnt = cnt + reach
                    reach = np.stack(planes, axis=2)          # (B, C, L)
                else:
                    ray_b = g.ray[mover.astype(np.intp)][:, :C]  # (B, C, L)
                    empty_ray = empty_pad[np.arange(B)[:, None, None], ray_b]
                    reach = np.logical_and.accumulate(empty_ray, axis=2)
                    cnt = reach.sum(axis=2, dtype=np.int16)
                cnt[~src] = 0
                counts.append(cnt)
                aux.append((reach, ray_b))
        group_totals = np.stack([c.sum(axis=1, dtype=np.int64) for c in counts])
        if self.multi_priority:
            prios = np.array([g.priority for g in self.groups])[:, None]
            present = np.where(group_totals > 0, prios, _BIG_PRIO)
            min_prio = present.min(axis=0)
            active = prios == min_prio[None, :]
        else:
            active = np.ones((len(self.groups), B), dtype=bool)
        totals = np.where(active, group_totals, 0).sum(axis=0)
        return MechData(counts, group_totals, active, totals, aux)

    def sample(self, data, state, mover, rem):
        """rem: (B,) int64 in [0, totals). Returns actions; -1 where none."""
        B = state.batch_size
        C = self.C
        actions = np.full(B, -1, dtype=np.int64)
        remaining = rem.copy()
        chosen = np.full(B, -1, dtype=np.int64)
        for gi in range(len(self.groups)):
            tot = np.where(data.active[gi], data.group_totals[gi], 0)
            take = (chosen < 0) & (data.totals > 0) & (remaining < tot)
            chosen[take] = gi
            remaining = np.where((chosen < 0), remaining - tot, remaining)
        rowsel = np.arange(B)
        for gi, g in enumerate(self.groups):
            rows = chosen == gi
            if not rows.any():
                continue
            cnt = data.counts[gi]
            cum = np.cumsum(cnt, axis=1, dtype=np.int32)
            src = np.argmax(cum > rem0(remaining, rows)[:, None], axis=1)
            before = cum[rowsel, src] - cnt[rowsel, src]
            kk = remaining - before
            if g.kind == KIND_SLIDE:
                reach, ray_b = data.aux[gi]
                if ray_b is None:
                    cells = g.ray[0][:C]
                    dest = cells[src, np.minimum(kk, cells.shape[1] - 1)]
                else:
                    dest = ray_b[rowsel, src, np.minimum(kk, ray_b.shape[2] - 1)]
            else:
                dest = data.aux[gi][rowsel, src]
            act = src * C + dest
            actions[rows] = act[rows]
        return actions

    def full_mask(self, state, mover, data=None):
        B = state.batch_size
        C = self.C
        A = C * C
        if data is None:
            data = self.compute(state, mover)
        out = np.zeros((B, A + 1), dtype=bool)
        rowsel = np.arange(B)[:, None]
        srcact = (np.arange(C, dtype=np.int64) * C)[None, :]
        for gi, g in enumerate(self.groups):
            ok = (data.counts[gi] > 0) & data.active[gi][:, None]
            if g.kind == KIND_SLIDE:
                reach, ray_b = data.aux[gi]
                if ray_b is None:
                    cells = g.ray[0][:C][None, :, :]
                else:
                    cells = ray_b
                act = np.where(cells == C, A,
                               (np.arange(C, dtype=np.int64) * C)[None, :, None] + cells)
                vals = reach & ok[:, :, None]
                tmp = np.zeros((B, A + 1), dtype=bool)
                tmp[rowsel[:, :, None][:, 0:1, :] * 0 + np.arange(B)[:, None, None],
                    act] = vals
                tmp[:, A] = False
                out |= tmp
            else:
                dest = data.aux[gi]
                act = np.where(dest == C, A, srcact + dest)
                tmp = np.zeros((B, A + 1), dtype=bool)
                tmp[rowsel, act] = ok & (dest != C)
                tmp[:, A] = False
                out |= tmp
        return out[:, :A]

    def apply(self, state, rows, actions, mover, scratch, verify=True):
        if not rows.any():
            return
        B = state.batch_size
        C = self.C
        rowsel = np.arange(B)
        src = np.where(rows, actions // C, 0).astype(np.int64)
        dst = np.where(rows, actions % C, 0).astype(np.int64)
        empty_pad = _pad_bool(state.board_owner < 0)
        cache = {}
        claimed = np.zeros(B, dtype=bool)
        kinds = np.full(B, -1, dtype=np.int8)
        hop_mid = np.full(B, -1, dtype=np.int64)
        hop_capture = np.zeros(B, dtype=bool)
        claim_prio = np.full(B, _BIG_PRIO, dtype=np.int64)
        for g in self.groups:
            need = rows & ~claimed
            if not need.any():
                break
            src_ok = self._src_ok(state, mover, cache, g.piece_id)[rowsel, src]
            if g.kind == KIND_STEP:
                nbr = g.nt[mover.astype(np.intp), src]
                match = need & src_ok & (nbr == dst) & empty_pad[rowsel, dst]
            elif g.kind == KIND_HOP:
                mid = g.nt[mover.astype(np.intp), src]
                two = g.nt2[mover.astype(np.intp), src]
                mid_safe = np.minimum(mid, C)
                mid_owner = _pad_val(state.board_owner, -2)[rowsel, mid_safe]
                over_ok = mid_owner >= 0
                if g.hop_over != "":
                    from .exprs import resolve_side
                    side = resolve_side(g.hop_over, mover)
                    over_ok &= mid_owner == side
                if g.over_piece_id >= 0:
                    mid_piece = _pad_val(state.board_piece, -2)[rowsel, mid_safe]
                    over_ok &= mid_piece == g.over_piece_id
                match = need & src_ok & (two == dst) & over_ok & empty_pad[rowsel, dst]
                hop_mid = np.where(match, mid, hop_mid)
                hop_capture = np.where(match, g.capture, hop_capture)
            else:  # slide: walk the ray from src looking for dst with clear path
                nt = g.nt[mover.astype(np.intp)]
                pos = nt[rowsel, src]
                clear = np.ones(B, dtype=bool)
                arrived = np.zeros(B, dtype=bool)
                steps = g.max_reach
                for _ in range(steps):
                    at = empty_pad[rowsel, pos]
                    clear = clear & at
                    arrived |= clear & (pos == dst)
                    pos = nt[rowsel, np.minimum(pos, C)]
                match = need & src_ok & arrived
            if match.any():
                claimed |= match
                kinds[match] = g.kind
                claim_prio = np.where(match, g.priority, claim_prio)
        if verify:
            bad = rows & ~claimed
            if bad.any():
                i = int(np.argmax(bad))
                raise IllegalAction(
                    f"action {int(actions[i])} is not legal in state row {i}")
            if self.multi_priority:
                data = self.compute(state, mover)
                prios = np.array([g.priority for g in self.groups])[:, None]
                present = np.where(data.group_totals > 0, prios, _BIG_PRIO)
                min_prio = present.min(axis=0)
                viol = rows & (claim_prio > min_prio)
                if viol.any():
                    i = int(np.argmax(viol))
                    raise IllegalAction(
                        f"action {int(actions[i])} violates move priority in row {i}")
        move_rows = rows & claimed
        idx = np.nonzero(move_rows)[0]
        piece_v = state.board_piece[idx, src[idx]]
        owner_v = state.board_owner[idx, src[idx]]
        state.board_piece[idx, src[idx]] = -1
        state.board_owner[idx, src[idx]] = -1
        state.board_piece[idx, dst[idx]] = piece_v
        state.board_owner[idx, dst[idx]] = owner_v
        hop_rows = move_rows & (hop_mid >= 0)
        if hop_rows.any():
            hidx = np.nonzero(hop_rows)[0]
            if state.hopped_mask is not None:
                state.hopped_mask[hidx, hop_mid[hidx]] = True
            cap = hop_rows & hop_capture
            if cap.any():
                cidx = np.nonzero(cap)[0]
                state.board_piece[cidx, hop_mid[cidx]] = -1
                state.board_owner[cidx, hop_mid[cidx]] = -1
                if state.captured_mask is not None:
                    state.captured_mask[cidx, hop_mid[cidx]] = True
        if state.last_kind is not None:
            state.last_kind[move_rows] = kinds[move_rows]
            state.last_source[move_rows] = src[move_rows].astype(np.int16)
            state.last_dest[move_rows] = dst[move_rows].astype(np.int16)
            state.last_mover[move_rows] = mover[move_rows]
            state.last_dest_by_player[idx, mover[idx]] = dst[idx].astype(np.int16)
        scratch.moved |= move_rows
        scratch.conn_dirty |= move_rows

    def can_move_again(self, state, mover, kind_id):
        """Would the just-moved piece (at last_dest) have a kind_id move?"""
        B = state.batch_size
        C = self.C
        rowsel = np.arange(B)
        src = np.where(state.last_dest >= 0, state.last_dest, 0).astype(np.int64)
        valid = (state.last_dest >= 0) & (state.last_mover == mover)
        empty_pad = _pad_bool(state.board_owner < 0)
        out = np.zeros(B, dtype=bool)
        for g in self.groups:
            if g.kind != kind_id:
                continue
            src_ok = ((state.board_piece[rowsel, src] == g.piece_id)
                      & (state.board_owner[rowsel, src] == mover))
            if g.kind == KIND_STEP:
                nbr = g.nt[mover.astype(np.intp), src]
                ok = src_ok & (nbr != C) & empty_pad[rowsel, nbr]
            elif g.kind == KIND_HOP:
                mid = g.nt[mover.astype(np.intp), src]
                two = g.nt2[mover.astype(np.intp), src]
                mid_safe = np.minimum(mid, C)
                mid_owner = _pad_val(state.board_owner, -2)[rowsel, mid_safe]
                over_ok = mid_owner >= 0
                if g.hop_over != "":
                    from .exprs import resolve_side
                    side = resolve_side(g.hop_over, mover)
                    over_ok &= mid_owner == side
                if g.over_piece_id >= 0:
                    mid_piece = _pad_val(state.board_piece, -2)[rowsel, mid_safe]
                    over_ok &= mid_piece == g.over_piece_id
                ok = src_ok & over_ok & (two != C) & empty_pad[rowsel, two]
            else:
                nbr = g.nt[mover.astype(np.intp), src]
                ok = src_ok & (nbr != C) & empty_pad[rowsel, nbr]
            out |= ok & valid
        return out


def rem0(remaining, rows):
    return np.where(rows, remaining, 0)


def _pad_val(arr, fill):
    B = arr.shape[0]
    return np.concatenate([arr, np.full((B, 1), fill, arr.dtype)], axis=1)


class PlacementMechanics:
    kind = "placement"

    def __init__(self, piece_id, owner_ref, dest_fn, result_pred, topo,
                 layout, conn_plans, result_fast=None, scratch_limit=4_000_000):
        self.piece_id = piece_id
        self.owner_ref = owner_ref
        self.dest_fn = dest_fn
        self.result_pred = result_pred
        self.result_fast = result_fast   # direct (B, C) would-satisfy mask fn
        self.topo = topo
        self.C = topo.num_cells
        self.layout = layout
        self.conn_plans = conn_plans
        self.scratch_limit = scratch_limit
        self.multi_priority = False

    def legal_cells(self, state, mover):
        # placement targets empty cells; the destination mask narrows further
        legal = (state.board_owner < 0) & self.dest_fn(state, mover)
        if self.result_fast is not None:
            legal = legal & self.result_fast(state, mover)
        elif self.result_pred is not None:
            legal = legal & self._simulate(state, mover, legal)
        return legal

    def _owner_side(self, mover):
        from .exprs import resolve_side
        return resolve_side(self.owner_ref, mover)

    def _simulate(self, state, mover, candidates):
        """Evaluate the result predicate on hypothetical placements."""
        B = state.batch_size
        C = self.C
        out = np.zeros((B, C), dtype=bool)
        chunk = max(1, self.scratch_limit // max(C * C, 1))
        for lo in range(0, B, chunk):
            hi = min(B, lo + chunk)
            sub = state.rows(np.arange(lo, hi))
            n = hi - lo
            scratch = sub.repeat_rows(sub, np.full(n, C))
            mv = np.repeat(mover[lo:hi], C)
            cand = np.tile(np.arange(C, dtype=np.int64), n)
            self._write_placement(scratch, np.ones(n * C, dtype=bool), cand, mv)
            res = self.result_pred(scratch, mv)
            out[lo:hi] = res.reshape(n, C)
        return out

    def _write_placement(self, state, rows, cells, mover):
        idx = np.nonzero(rows)[0]
        side = self._owner_side(mover)
        state.board_piece[idx, cells[idx]] = self.piece_id
        state.board_owner[idx, cells[idx]] = side[idx]
        if state.hopped_mask is not None:
            state.hopped_mask[idx] = False
            state.captured_mask[idx] = False
            state.promoted_mask[idx] = False
        if state.last_kind is not None:
            state.last_kind[rows] = KIND_PLACE
            state.last_source[rows] = -1
            state.last_dest[rows] = cells[rows].astype(np.int16)
            state.last_mover[rows] = side[rows]
            state.last_dest_by_player[idx, side[idx]] = cells[idx].astype(np.int16)
        if state.comp_labels is not None:
            connectivity.place_update(state, rows, cells, self.conn_plans, self.topo)

    def compute(self, state, mover):
        legal = self.legal_cells(state, mover)
        counts = legal.astype(np.int16)
        totals = legal.sum(axis=1, dtype=np.int64)
        active = np.ones((1, state.batch_size), dtype=bool)
        return MechData([counts], totals[None, :], active, totals, [None])

    def sample(self, data, state, mover, rem):
        cnt = data.counts[0]
        cum = np.cumsum(cnt, axis=1, dtype=np.int32)
        cell = np.argmax(cum > rem[:, None], axis=1)
        return np.where(data.totals > 0, cell, -1).astype(np.int64)

    def full_mask(self, state, mover, data=None):
        if data is None:
            return self.legal_cells(state, mover)
        return data.counts[0] > 0

    def apply(self, state, rows, actions, mover, scratch, verify=True):
        if not rows.any():
            return
        cells = np.where(rows, actions, 0).astype(np.int64)
        if verify:
            legal = self.legal_cells(state, mover)
            ok = legal[np.arange(state.batch_size), cells]
            bad = rows & ~ok
            if bad.any():
                i = int(np.argmax(bad))
                raise IllegalAction(
                    f"placement at cell {int(cells[i])} is not legal in row {i}")
        self._write_placement(state, rows, cells, mover)
        scratch.moved |= rows

    def can_move_again(self, state, mover, kind_id):
        return np.zeros(state.batch_size, dtype=bool)


class GridworldMechanics:
    kind = "gridworld"

    def __init__(self, piece_id, directions, topo):
        self.piece_id = piece_id
        self.directions = tuple(directions)
        self.topo = topo
        self.C = topo.num_cells
        self.tables = [topo.neighbor_table[d] for d in self.directions]
        self.multi_priority = False

    def _src(self, state, mover):
        mine = (state.board_piece == self.piece_id) & (state.board_owner == mover[:, None])
        return np.argmax(mine, axis=1)

    def compute(self, state, mover):
        B = state.batch_size
        src = self._src(state, mover)
        empty_pad = _pad_bool(state.board_owner < 0)
        rowsel = np.arange(B)
        counts = []
        aux = []
        for nt in self.tables:
            dest = nt[src]
            ok = (dest != self.C) & empty_pad[rowsel, dest]
            counts.append(ok.astype(np.int16)[:, None])
            aux.append(dest)
        group_totals = np.stack([c[:, 0].astype(np.int64) for c in counts])
        totals = group_totals.sum(axis=0)
        active = np.ones((len(self.tables), B), dtype=bool)
        return MechData(counts, group_totals, active, totals, aux)

    def sample(self, data, state, mover, rem):
        B = state.batch_size
        actions = np.full(B, -1, dtype=np.int64)
        remaining = rem.copy()
        chosen = np.full(B, -1, dtype=np.int64)
        for gi in range(len(self.tables)):
            tot = data.group_totals[gi]
            take = (chosen < 0) & (data.totals > 0) & (remaining < tot)
            chosen[take] = gi
            remaining = np.where(chosen < 0, remaining - tot, remaining)
        for gi in range(len(self.tables)):
            actions[chosen == gi] = gi
        return actions

    def full_mask(self, state, mover, data=None):
        if data is None:
            data = self.compute(state, mover)
        return np.stack([data.counts[g][:, 0] > 0
                         for g in range(len(self.tables))], axis=1)

    def apply(self, state, rows, actions, mover, scratch, verify=True):
        if not rows.any():
            return
        B = state.batch_size
        rowsel = np.arange(B)
        src = self._src(state, mover)
        dest = np.zeros(B, dtype=np.int64)
        ok = np.zeros(B, dtype=bool)
        empty_pad = _pad_bool(state.board_owner < 0)
        for gi, nt in enumerate(self.tables):
            m = rows & (actions == gi)
            d = nt[src]
            ok |= m & (d != self.C) & empty_pad[rowsel, d]
            dest = np.where(m, d, dest)
        if verify:
            bad = rows & ~ok
            if bad.any():
                i = int(np.argmax(bad))
                raise IllegalAction(f"direction action {int(actions[i])} illegal in row {i}")
        idx = np.nonzero(rows & ok)[0]
        state.board_piece[idx, dest[idx]] = self.piece_id
        state.board_owner[idx, dest[idx]] = mover[idx]
        state.board_piece[idx, src[idx]] = -1
        state.board_owner[idx, src[idx]] = -1
        m = rows & ok
        if state.last_kind is not None:
            state.last_kind[m] = KIND_STEP
            state.last_source[m] = src[m].astype(np.int16)
            state.last_dest[m] = dest[m].astype(np.int16)
            state.last_mover[m] = mover[m]
            state.last_dest_by_player[idx, mover[idx]] = dest[idx].astype(np.int16)
        scratch.moved |= m
        scratch.conn_dirty |= m

    def can_move_again(self, state, mover, kind_id):
        if kind_id != KIND_STEP:
            return np.zeros(state.batch_size, dtype=bool)
        data = self.compute(state, mover)
        return data.totals > 0

"""Incremental connected-component labels over board cells.

Labels live in state.comp_labels as (B, plans, C) int16: each occupied cell
holds the smallest cell index of its same-owner component; empty cells hold
-1. Placements merge locally; owner-changing effects (flip, capture,
movement) trigger a full recompute for the affected rows.
"""

from __future__ import annotations

import numpy as np

_BIG = np.int16(32000)


def place_update(state, rows, cells, plans, topo):
    """Merge after placements at ``cells`` (B,) on ``rows`` (B,) bool."""
    if not rows.any():
        return
    B = state.batch_size
    C = topo.num_cells
    rowidx = np.arange(B)
    cell_safe = np.where(rows, cells, 0).astype(np.intp)
    owner = state.board_owner[rowidx, cell_safe]
    for p, dirs in enumerate(plans):
        lab = state.comp_labels[:, p, :]
        lab_pad = np.concatenate([lab, np.full((B, 1), -1, np.int16)], axis=1)
        owner_pad = np.concatenate([state.board_owner,
                                    np.full((B, 1), -2, np.int8)], axis=1)
        nbr_labels = []
        nbr_ok = []
        new = cells.astype(np.int16)
        for d in dirs:
            nbr = topo.neighbor_table[d][cell_safe]
            ok = rows & (nbr != C) & (owner_pad[rowidx, nbr] == owner)
            nl = lab_pad[rowidx, nbr]
            nbr_labels.append(nl)
            nbr_ok.append(ok)
            new = np.minimum(new, np.where(ok & (nl >= 0), nl, _BIG).astype(np.int16))
        lab[rowidx[rows], cell_safe[rows]] = new[rows]
        for nl, ok in zip(nbr_labels, nbr_ok):
            need = ok & (nl != new) & (nl >= 0)
            if need.any():
                m = need[:, None] & (lab == nl[:, None])
                np.copyto(lab, np.broadcast_to(new[:, None], lab.shape), where=m)


def full_recompute(state, rows, plans, topo):
    """Rebuild labels from scratch for the selected rows."""
    if not rows.any():
        return
    B = state.batch_size
    C = topo.num_cells
    occupied = state.board_owner >= 0
    base = np.where(occupied, np.arange(C, dtype=np.int16), np.int16(-1))
    owner_pad = np.concatenate([state.board_owner,
                                np.full((B, 1), -2, np.int8)], axis=1)
    for p, dirs in enumerate(plans):
        lab = base.copy()
        tables = [topo.neighbor_table[d][:C] for d in dirs]
        while True:
            lab_pad = np.concatenate([lab, np.full((B, 1), _BIG, np.int16)], axis=1)
            work = np.where(occupied, lab, _BIG)
            best = work.copy()
            for d, nt in zip(dirs, tables):
                nl = lab_pad[:, nt]
                same = owner_pad[:, nt] == state.board_owner
                cand = np.where(same & occupied & (nl >= 0), nl, _BIG)
                best = np.minimum(best, cand)
            best = np.where(occupied, best, np.int16(-1))
            changed = rows[:, None] & (best != lab) & occupied
            if not changed.any():
                break
            lab = np.where(rows[:, None], best, lab)
        state.comp_labels[rows, p, :] = lab[rows]


def init_labels(state, plans, topo):
    """Label the start position (all rows)."""
    rows = np.ones(state.batch_size, dtype=bool)
    full_recompute(state, rows, plans, topo)

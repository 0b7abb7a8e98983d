import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boardlang.errors import InvalidShapeParam, MissingForwardAssignment
from boardlang.gamespec import BoardShape
from boardlang.topology import INVERSE_DIR, build_topology, resolve_direction


def shapes_under_test():
    return [
        BoardShape("square", 3),
        BoardShape("square", 8),
        BoardShape("rectangle", 6, 7),
        BoardShape("hexagon", 9),
        BoardShape("hexagon", 5),
        BoardShape("hex_rectangle", 11, 11),
        BoardShape("hex_rectangle", 4, 6),
    ]


def test_cell_counts():
    assert build_topology(BoardShape("square", 3)).num_cells == 9
    assert build_topology(BoardShape("rectangle", 6, 7)).num_cells == 42
    assert build_topology(BoardShape("hex_rectangle", 11, 11)).num_cells == 121
    # hexagon with diameter d: 3s^2 - 3s + 1 cells where s = (d+1)/2
    for d in (1, 3, 5, 7, 9, 11):
        s = (d + 1) // 2
        assert build_topology(BoardShape("hexagon", d)).num_cells == 3 * s * s - 3 * s + 1


def test_hexagon9_row_lengths():
    topo = build_topology(BoardShape("hexagon", 9))
    assert topo.num_cells == 61
    assert topo.row_lengths == (5, 6, 7, 8, 9, 8, 7, 6, 5)


def test_square_has_eight_directions_hex_has_six():
    assert len(build_topology(BoardShape("square", 3)).directions) == 8
    assert len(build_topology(BoardShape("hexagon", 9)).directions) == 6
    assert len(build_topology(BoardShape("hex_rectangle", 11, 11)).directions) == 6


def test_hex_rectangle_interior_neighbor_count():
    topo = build_topology(BoardShape("hex_rectangle", 11, 11))
    interior = 0
    for c in range(topo.num_cells):
        n = sum(topo.neighbor(c, d) is not None for d in topo.directions)
        r, q = topo.row_of[c], topo.col_of[c]
        if 0 < r < 10 and 0 < q < 10:
            assert n == 6
            interior += 1
    assert interior == 81


@pytest.mark.parametrize("shape", shapes_under_test(), ids=str)
def test_neighbor_symmetry(shape):
    topo = build_topology(shape)
    for d in topo.directions:
        nt = topo.neighbor_table[d]
        inv = topo.neighbor_table[INVERSE_DIR[d]]
        for c in range(topo.num_cells):
            j = nt[c]
            if j != topo.sentinel:
                assert inv[j] == c


def test_invalid_shapes():
    with pytest.raises(InvalidShapeParam):
        build_topology(BoardShape("hexagon", 8))
    with pytest.raises(InvalidShapeParam):
        build_topology(BoardShape("square", 0))


# -- line tables --

def brute_force_lines(topo, length, dirs):
    seen = set()
    for d in dirs:
        for start in range(topo.num_cells):
            cells = [start]
            ok = True
            for _ in range(length - 1):
                nxt = topo.neighbor(cells[-1], d)
                if nxt is None:
                    ok = False
                    break
                cells.append(nxt)
            if ok:
                seen.add(tuple(cells))
    return seen


def test_line_counts_small():
    topo = build_topology(BoardShape("square", 3))
    tuples, _, _ = topo.line_table(3, "any")
    assert len(tuples) == 8  # 3 rows + 3 cols + 2 diagonals


def test_line_counts_connect_four():
    topo = build_topology(BoardShape("rectangle", 6, 7))
    tuples, _, _ = topo.line_table(4, "any")
    assert len(tuples) == 69


@pytest.mark.parametrize("shape,length", [
    (BoardShape("square", 8), 5),
    (BoardShape("rectangle", 6, 7), 4),
    (BoardShape("square", 19), 5),
    (BoardShape("hexagon", 9), 4),
    (BoardShape("hex_rectangle", 7, 9), 3),
])
def test_line_tables_match_brute_force(shape, length):
    topo = build_topology(shape)
    tuples, ext_b, ext_a = topo.line_table(length, "any")
    dirs = topo.orientation_dirs("any")
    brute = brute_force_lines(topo, length, dirs)
    got = {tuple(int(c) for c in row) for row in tuples}
    assert got == brute
    # every window's cells are distinct and in bounds
    for row, eb, ea in zip(tuples, ext_b, ext_a):
        assert len(set(row.tolist())) == length
        assert all(0 <= c < topo.num_cells for c in row)
        for ext, end, d in ((eb, row[0], None), (ea, row[-1], None)):
            if ext != topo.sentinel:
                assert 0 <= ext < topo.num_cells


def test_gomoku_center_line_has_both_extensions():
    topo = build_topology(BoardShape("square", 15))
    tuples, ext_b, ext_a = topo.line_table(5, "horizontal")
    mid = 7 * 15 + 5  # centered horizontal window
    for row, eb, ea in zip(tuples, ext_b, ext_a):
        if row[0] == mid:
            assert eb != topo.sentinel and ea != topo.sentinel
            return
    raise AssertionError("window not found")


# -- rays and patterns --

def test_ray_from_corner():
    topo = build_topology(BoardShape("square", 8))
    ray = topo.ray("down_right")[0]
    cells = [c for c in ray.tolist() if c != topo.sentinel]
    assert cells == [9, 18, 27, 36, 45, 54, 63]


def test_square2_pattern_on_square3():
    topo = build_topology(BoardShape("square", 3))
    offsets = topo.shape_offsets(BoardShape("square", 2))
    placements = topo.pattern_table(offsets)
    assert len(placements) == 4


def brute_force_placements(topo, variants):
    found = set()
    for var in variants:
        for i in range(topo.num_cells):
            a, b = topo.coord_of(i)
            cells = []
            for da, db in var:
                j = topo.cell_at((a + da, b + db))
                if j is None:
                    break
                cells.append(j)
            else:
                found.add(tuple(sorted(cells)))
    return found


def test_l_pattern_rotations_deduplicated():
    topo = build_topology(BoardShape("square", 5))
    offsets = [(0, 0), (1, 0), (1, 1)]   # L triomino
    placements = topo.pattern_table(offsets, rotate=True)
    variants = set()
    cur = offsets
    for _ in range(4):
        variants.add(topo._normalize(cur))
        cur = [(b, -a) for a, b in cur]
    brute = brute_force_placements(topo, variants)
    assert {tuple(r.tolist()) for r in placements} == brute
    assert len(placements) == len(set(map(tuple, placements.tolist())))


# -- edges, corners, center --

def test_edge_masks_partition():
    topo = build_topology(BoardShape("square", 8))
    assert topo.edge_masks["top"].sum() == 8
    corners = np.nonzero(topo.corners_mask)[0]
    assert list(corners) == [0, 7, 56, 63]
    for c in corners:
        inside = sum(topo.edge_masks[e][c] for e in ("top", "bottom", "left", "right"))
        assert inside == 2


def test_hexagon_edges():
    topo = build_topology(BoardShape("hexagon", 9))
    assert topo.edge_masks["top"].sum() == 5
    assert topo.edge_masks["bottom"].sum() == 5
    assert len(topo.corner_cells) == 6
    assert "left" not in topo.edge_masks


def test_center_masks():
    assert build_topology(BoardShape("square", 19)).center_mask.sum() == 1
    assert np.nonzero(build_topology(BoardShape("square", 19)).center_mask)[0][0] == 180
    assert build_topology(BoardShape("square", 8)).center_mask.sum() == 4
    assert build_topology(BoardShape("hexagon", 9)).center_mask.sum() == 1


# -- direction resolution --

def test_relative_directions():
    topo = build_topology(BoardShape("square", 8))
    fwd = {0: "up", 1: "down"}
    assert resolve_direction(("forward_left",), 0, fwd, topo) == ("up_left",)
    assert resolve_direction(("forward_left",), 1, fwd, topo) == ("down_right",)
    assert resolve_direction(("forward_left", "forward_right"), 1, fwd, topo) \
        == ("down_left", "down_right")


def test_any_expansion():
    topo = build_topology(BoardShape("square", 8))
    assert set(resolve_direction(("any",), 0, {}, topo)) == set(topo.directions)


def test_hex_rectangle_diagonal():
    topo = build_topology(BoardShape("hex_rectangle", 11, 11))
    assert set(resolve_direction(("diagonal",), 0, {}, topo)) \
        == {"up_right", "down_left"}


def test_missing_forward_raises():
    topo = build_topology(BoardShape("square", 8))
    with pytest.raises(MissingForwardAssignment):
        resolve_direction(("forward",), 0, {}, topo)


def test_unsupported_keyword_raises():
    topo = build_topology(BoardShape("hexagon", 9))
    with pytest.raises(KeyError):
        resolve_direction(("vertical",), 0, {}, topo)


@settings(max_examples=30, deadline=None)
@given(rows=st.integers(2, 19), cols=st.integers(2, 19))
def test_rectangle_neighbor_symmetry_property(rows, cols):
    topo = build_topology(BoardShape("rectangle", rows, cols))
    for d in topo.directions:
        nt = topo.neighbor_table[d][:topo.num_cells]
        inv = topo.neighbor_table[INVERSE_DIR[d]]
        valid = nt != topo.sentinel
        back = inv[nt[valid]]
        assert (back == np.nonzero(valid)[0]).all()

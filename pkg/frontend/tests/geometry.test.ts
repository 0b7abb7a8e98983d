import { describe, expect, it } from "vitest";

import { boardLayout, cellAt, cellApothem, minCenterDistance } from "../src/geometry.js";
import { TopologyMeta } from "../src/types.js";

function squareTopo(n: number): TopologyMeta {
  const row_of: number[] = [];
  const col_of: number[] = [];
  for (let r = 0; r < n; r += 1) {
    for (let c = 0; c < n; c += 1) {
      row_of.push(r);
      col_of.push(c);
    }
  }
  return { kind: "square", rows: n, cols: n, num_cells: n * n,
           row_lengths: Array(n).fill(n), row_of, col_of };
}

function hexRectTopo(n: number): TopologyMeta {
  const t = squareTopo(n);
  return { ...t, kind: "hex_rectangle" };
}

function hexagonTopo(d: number): TopologyMeta {
  const radius = (d - 1) / 2;
  const row_lengths: number[] = [];
  const row_of: number[] = [];
  const col_of: number[] = [];
  let cells = 0;
  for (let r = 0; r < d; r += 1) {
    const len = d - Math.abs(r - radius);
    row_lengths.push(len);
    for (let c = 0; c < len; c += 1) {
      row_of.push(r);
      col_of.push(c);
      cells += 1;
    }
  }
  return { kind: "hexagon", rows: d, cols: d, num_cells: cells,
           row_lengths, row_of, col_of };
}

describe("board layouts", () => {
  const topologies: [string, TopologyMeta][] = [
    ["square 8", squareTopo(8)],
    ["square 19", squareTopo(19)],
    ["hex_rectangle 11x11", hexRectTopo(11)],
    ["hexagon 9", hexagonTopo(9)],
  ];

  it.each(topologies)("renders every cell of %s without overlap", (_name, topo) => {
    const layout = boardLayout(topo);
    expect(layout.cells.length).toBe(topo.num_cells);
    // non-overlap: centers at least two apothems apart
    const apothem = cellApothem(layout);
    expect(minCenterDistance(layout)).toBeGreaterThanOrEqual(2 * apothem - 1e-6);
    // and everything fits in the reported canvas
    for (const c of layout.cells) {
      expect(c.x).toBeGreaterThanOrEqual(0);
      expect(c.y).toBeGreaterThanOrEqual(0);
      expect(c.x).toBeLessThanOrEqual(layout.width);
      expect(c.y).toBeLessThanOrEqual(layout.height);
    }
  });

  it("hexagon 9 has 61 cells", () => {
    expect(hexagonTopo(9).num_cells).toBe(61);
  });

  it("cellAt resolves centers and rejects gaps", () => {
    const layout = boardLayout(squareTopo(3));
    const c4 = layout.cells[4];
    expect(cellAt(layout, c4.x, c4.y)).toBe(4);
    expect(cellAt(layout, -500, -500)).toBeNull();
  });
});

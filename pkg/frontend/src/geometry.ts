// Board layouts. Square boards are a plain grid; hex boards use a flat-top
// axial embedding derived from the topology's row-major indexing, so every
// neighbor relation in the engine is a touching edge on screen.

import { TopologyMeta } from "./types.js";

export interface CellGeometry {
  x: number;
  y: number;
  r: number; // circumradius of the cell polygon
}

export interface BoardLayout {
  cells: CellGeometry[];
  width: number;
  height: number;
  hex: boolean;
}

const SQRT3 = Math.sqrt(3);

function axialOf(topo: TopologyMeta, cell: number): { q: number; r: number } {
  const row = topo.row_of[cell];
  const col = topo.col_of[cell];
  if (topo.kind === "hexagon") {
    const radius = (topo.rows - 1) / 2;
    return { q: col - Math.min(radius, row), r: row - radius };
  }
  return { q: col, r: row };
}

export function boardLayout(topo: TopologyMeta, size = 26): BoardLayout {
  const hex = topo.kind === "hexagon" || topo.kind === "hex_rectangle";
  const cells: CellGeometry[] = [];
  if (!hex) {
    const step = size * 2;
    for (let i = 0; i < topo.num_cells; i += 1) {
      cells.push({
        x: (topo.col_of[i] + 0.5) * step,
        y: (topo.row_of[i] + 0.5) * step,
        r: size,
      });
    }
  } else {
    // flat-top axial: x advances 1.5*s per q, y advances sqrt3*s per r
    for (let i = 0; i < topo.num_cells; i += 1) {
      const { q, r } = axialOf(topo, i);
      cells.push({
        x: 1.5 * size * q,
        y: SQRT3 * size * (r + q / 2),
        r: size,
      });
    }
    const minX = Math.min(...cells.map((c) => c.x)) - size;
    const minY = Math.min(...cells.map((c) => c.y)) - size;
    for (const c of cells) {
      c.x -= minX;
      c.y -= minY;
    }
  }
  const width = Math.max(...cells.map((c) => c.x)) + size;
  const height = Math.max(...cells.map((c) => c.y)) + size;
  return { cells, width, height, hex };
}

export function hexPoints(x: number, y: number, size: number): string {
  const pts: string[] = [];
  for (let i = 0; i < 6; i += 1) {
    const angle = (Math.PI / 180) * (60 * i);
    pts.push(`${x + size * Math.cos(angle)},${y + size * Math.sin(angle)}`);
  }
  return pts.join(" ");
}

export function squarePoints(x: number, y: number, size: number): string {
  const s = size * 0.98;
  return [
    `${x - s},${y - s}`, `${x + s},${y - s}`,
    `${x + s},${y + s}`, `${x - s},${y + s}`,
  ].join(" ");
}

// nearest cell within its own radius, or null when the click is off-board
export function cellAt(layout: BoardLayout, px: number, py: number): number | null {
  let best = -1;
  let bestDist = Infinity;
  for (let i = 0; i < layout.cells.length; i += 1) {
    const c = layout.cells[i];
    const d = Math.hypot(c.x - px, c.y - py);
    if (d < bestDist) {
      bestDist = d;
      best = i;
    }
  }
  if (best < 0 || bestDist > layout.cells[best].r) {
    return null;
  }
  return best;
}

// smallest center-to-center distance; rendering overlaps iff this is less
// than twice the apothem
export function minCenterDistance(layout: BoardLayout): number {
  let best = Infinity;
  for (let i = 0; i < layout.cells.length; i += 1) {
    for (let j = i + 1; j < layout.cells.length; j += 1) {
      const a = layout.cells[i];
      const b = layout.cells[j];
      best = Math.min(best, Math.hypot(a.x - b.x, a.y - b.y));
    }
  }
  return best;
}

export function cellApothem(layout: BoardLayout, size = 26): number {
  return layout.hex ? (SQRT3 / 2) * size : size;
}

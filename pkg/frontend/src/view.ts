// Pure view logic: everything here is derived from the last server state
// view, never computed from game rules. Clicking resolves to either a
// request body, a source (re)selection, or nothing at all.

import { LegalMove, SessionView, StateView } from "./types.js";

export type ClickOutcome =
  | { type: "submit"; body: Record<string, unknown> }
  | { type: "select"; cell: number }
  | { type: "clear" }
  | { type: "none" };

export function legalSources(state: StateView): Set<number> {
  const out = new Set<number>();
  for (const m of state.legal_moves) {
    if (m.kind !== "pass" && m.source !== null && m.source !== undefined) {
      out.add(m.source);
    }
  }
  return out;
}

export function legalDests(state: StateView, source: number | null): Set<number> {
  const out = new Set<number>();
  for (const m of state.legal_moves) {
    if (m.kind === "pass" || m.dest === null || m.dest === undefined) {
      continue;
    }
    if (source === null || m.source === source) {
      out.add(m.dest);
    }
  }
  return out;
}

export function passLegal(state: StateView): boolean {
  return state.legal_moves.some((m) => m.kind === "pass");
}

// cells to highlight for the current selection state
export function highlights(view: SessionView, selected: number | null): {
  sources: Set<number>;
  dests: Set<number>;
} {
  const state = view.state;
  if (state.terminated) {
    return { sources: new Set(), dests: new Set() };
  }
  if (view.game.codec === "placement") {
    return { sources: new Set(), dests: legalDests(state, null) };
  }
  if (selected === null) {
    return { sources: legalSources(state), dests: new Set() };
  }
  return { sources: new Set([selected]), dests: legalDests(state, selected) };
}

export function clickCell(view: SessionView, selected: number | null,
                          cell: number): ClickOutcome {
  const state = view.state;
  if (state.terminated) {
    return { type: "none" };
  }
  if (view.game.codec === "placement") {
    return legalDests(state, null).has(cell)
      ? { type: "submit", body: { dest: cell } }
      : { type: "none" };
  }
  if (view.game.codec === "gridworld") {
    return legalDests(state, null).has(cell)
      ? { type: "submit", body: { dest: cell } }
      : { type: "none" };
  }
  // movement: first click picks a source with at least one destination,
  // second click a highlighted destination
  if (selected !== null) {
    if (legalDests(state, selected).has(cell)) {
      return { type: "submit", body: { source: selected, dest: cell } };
    }
    if (cell === selected) {
      return { type: "clear" };
    }
    if (legalSources(state).has(cell)) {
      return { type: "select", cell };
    }
    return { type: "none" };
  }
  if (legalSources(state).has(cell)) {
    return { type: "select", cell };
  }
  return { type: "none" };
}

export function outcomeText(state: StateView): string {
  if (!state.terminated || state.outcome === null) {
    return "";
  }
  const o = state.outcome;
  const suffix = o.truncated ? " (turn cap reached)" : "";
  if (o.p1 === "draw") {
    return `Draw${suffix}`;
  }
  const winner = o.p1 === "win" ? "P1" : "P2";
  return `${winner} wins${suffix}`;
}

export interface InspectorRow {
  label: string;
  value: string;
}

export function inspectorRows(view: SessionView): InspectorRow[] {
  const s = view.state;
  const rows: InspectorRow[] = [
    { label: "game", value: view.game.name },
    { label: "move", value: String(s.move_count) },
    { label: "to move", value: s.mover },
    { label: "phase", value: String(s.phase) },
  ];
  if (s.scores !== null) {
    rows.push({ label: "scores", value: `P1 ${s.scores[0]} : P2 ${s.scores[1]}` });
  }
  if (s.passes > 0) {
    rows.push({ label: "consecutive passes", value: String(s.passes) });
  }
  if (s.last_action !== null) {
    const a = s.last_action;
    const move = a.source >= 0 ? `${a.source} -> ${a.dest}`
      : (a.dest >= 0 ? `cell ${a.dest}` : "pass");
    rows.push({ label: "last action", value: `${a.mover} ${a.kind} ${move}` });
  }
  if (s.terminated) {
    rows.push({ label: "result", value: outcomeText(s) });
  }
  return rows;
}

// default piece fill per rendering hints; P1 dark / P2 light when unspecified
export function pieceColor(view: SessionView, owner: "P1" | "P2"): string {
  const hinted = view.game.rendering.colors[owner];
  if (hinted === "black") return "#222222";
  if (hinted === "white") return "#f4f1e8";
  return owner === "P1" ? "#222222" : "#f4f1e8";
}

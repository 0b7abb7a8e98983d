// Page wiring: SVG board, click-to-move, state inspector, agent controls.
// The board is rendered exclusively from the latest server state view.

import * as api from "./api.js";
import { BoardLayout, boardLayout, cellAt, hexPoints, squarePoints } from "./geometry.js";
import { SessionView } from "./types.js";
import { clickCell, highlights, inspectorRows, outcomeText, passLegal,
         pieceColor } from "./view.js";

const SVG_NS = "http://www.w3.org/2000/svg";

interface UiState {
  view: SessionView | null;
  layout: BoardLayout | null;
  selected: number | null;
  autoAgent: boolean;
  ws: WebSocket | null;
  busy: boolean;
}

const ui: UiState = { view: null, layout: null, selected: null,
                      autoAgent: false, ws: null, busy: false };

function el<K extends keyof HTMLElementTagNameMap>(tag: K, attrs: Record<string, string> = {},
                                                   text = ""): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) {
    node.setAttribute(k, v);
  }
  if (text) {
    node.textContent = text;
  }
  return node;
}

function seatValue(id: string): string {
  return (document.getElementById(id) as HTMLSelectElement).value;
}

async function boot(): Promise<void> {
  const games = await api.listGames();
  const select = document.getElementById("game-select") as HTMLSelectElement;
  for (const name of games) {
    select.appendChild(el("option", { value: name }, name));
  }
  (document.getElementById("new-game") as HTMLButtonElement).onclick = newGame;
  (document.getElementById("agent-move") as HTMLButtonElement).onclick = agentMove;
  (document.getElementById("undo") as HTMLButtonElement).onclick = undoOne;
  (document.getElementById("pass") as HTMLButtonElement).onclick = submitPass;
  const auto = document.getElementById("auto-agent") as HTMLInputElement;
  auto.onchange = () => {
    ui.autoAgent = auto.checked;
    void maybeAutoMove();
  };
  const replay = document.getElementById("replay") as HTMLInputElement;
  replay.oninput = () => void replayTo(parseInt(replay.value, 10));
}

async function newGame(): Promise<void> {
  const name = seatValue("game-select");
  const seats = { p1: seatValue("seat-p1"), p2: seatValue("seat-p2") };
  const view = await api.createSession(name, seats);
  attach(view);
}

function attach(view: SessionView): void {
  if (ui.ws) {
    ui.ws.close();
    ui.ws = null;
  }
  ui.selected = null;
  accept(view);
  ui.ws = api.openStream(view.session_id, accept, () => {
    // reconnect path: refetch the authoritative state once
    if (ui.view) {
      void api.getState(ui.view.session_id).then(accept).catch(() => undefined);
    }
  });
}

function accept(view: SessionView): void {
  ui.view = view;
  ui.layout = boardLayout(view.game.topology);
  if (ui.selected !== null) {
    const stillLegal = view.state.legal_moves.some(
      (m) => m.source === ui.selected);
    if (!stillLegal) {
      ui.selected = null;
    }
  }
  render();
  void maybeAutoMove();
}

function humanToMove(view: SessionView): boolean {
  const seat = view.state.mover === "P1" ? view.seats.p1 : view.seats.p2;
  return seat === "human";
}

async function maybeAutoMove(): Promise<void> {
  const view = ui.view;
  if (!ui.autoAgent || ui.busy || !view || view.state.terminated
      || humanToMove(view)) {
    return;
  }
  await agentMove();
}

async function agentMove(): Promise<void> {
  if (!ui.view || ui.busy) {
    return;
  }
  ui.busy = true;
  try {
    accept(await api.agentMove(ui.view.session_id));
  } catch (err) {
    toast((err as Error).message);
  } finally {
    ui.busy = false;
  }
  void maybeAutoMove();
}

async function undoOne(): Promise<void> {
  if (!ui.view || ui.view.history_length === 0) {
    return;
  }
  try {
    accept(await api.undo(ui.view.session_id));
  } catch (err) {
    toast((err as Error).message);
  }
}

async function replayTo(k: number): Promise<void> {
  if (!ui.view) {
    return;
  }
  try {
    accept(await api.undo(ui.view.session_id, k));
  } catch (err) {
    toast((err as Error).message);
  }
}

async function submitPass(): Promise<void> {
  if (!ui.view) {
    return;
  }
  await submit({ pass: true });
}

async function submit(body: Record<string, unknown>): Promise<void> {
  if (!ui.view) {
    return;
  }
  try {
    ui.selected = null;
    accept(await api.submitAction(ui.view.session_id, body));
  } catch (err) {
    toast((err as Error).message);
    // desync guard: pull the authoritative state
    accept(await api.getState(ui.view.session_id));
  }
}

function onBoardClick(ev: MouseEvent): void {
  const view = ui.view;
  const layout = ui.layout;
  if (!view || !layout || !humanToMove(view)) {
    return;
  }
  const svg = document.getElementById("board") as unknown as SVGSVGElement;
  const rect = svg.getBoundingClientRect();
  const cell = cellAt(layout, ev.clientX - rect.left, ev.clientY - rect.top);
  if (cell === null) {
    return;
  }
  const result = clickCell(view, ui.selected, cell);
  if (result.type === "none") {
    return;              // no request leaves the server untouched
  }
  if (result.type === "select") {
    ui.selected = result.cell;
    render();
    return;
  }
  if (result.type === "clear") {
    ui.selected = null;
    render();
    return;
  }
  void submit(result.body);
}

function toast(message: string): void {
  const node = document.getElementById("toast")!;
  node.textContent = message;
  node.classList.add("visible");
  window.setTimeout(() => node.classList.remove("visible"), 2500);
}

function render(): void {
  const view = ui.view;
  const layout = ui.layout;
  if (!view || !layout) {
    return;
  }
  const svg = document.getElementById("board")!;
  svg.setAttribute("width", String(layout.width));
  svg.setAttribute("height", String(layout.height));
  while (svg.firstChild) {
    svg.removeChild(svg.firstChild);
  }
  const marks = highlights(view, ui.selected);
  const last = view.state.last_action;
  for (let i = 0; i < layout.cells.length; i += 1) {
    const c = layout.cells[i];
    const poly = document.createElementNS(SVG_NS, "polygon");
    poly.setAttribute("points", layout.hex
      ? hexPoints(c.x, c.y, c.r * 0.96)
      : squarePoints(c.x, c.y, c.r));
    let cls = "cell";
    if (marks.dests.has(i)) {
      cls += " dest";
    } else if (marks.sources.has(i)) {
      cls += " source";
    }
    if (last && (last.dest === i || last.source === i)) {
      cls += " last";
    }
    poly.setAttribute("class", cls);
    svg.appendChild(poly);
    const cellView = view.state.cells[i];
    if (cellView) {
      const piece = document.createElementNS(SVG_NS, "circle");
      piece.setAttribute("cx", String(c.x));
      piece.setAttribute("cy", String(c.y));
      piece.setAttribute("r", String(c.r * 0.55));
      piece.setAttribute("fill", pieceColor(view, cellView.owner));
      piece.setAttribute("class", "piece");
      svg.appendChild(piece);
      if (view.game.pieces.length > 1) {
        const label = document.createElementNS(SVG_NS, "text");
        label.setAttribute("x", String(c.x));
        label.setAttribute("y", String(c.y + 4));
        label.setAttribute("class",
          `glyph ${cellView.owner === "P1" ? "on-dark" : "on-light"}`);
        label.textContent = cellView.piece[0].toUpperCase();
        svg.appendChild(label);
      }
    }
  }
  svg.onclick = onBoardClick as any;

  const info = document.getElementById("inspector")!;
  info.innerHTML = "";
  for (const row of inspectorRows(view)) {
    const div = el("div", { class: "row" });
    div.appendChild(el("span", { class: "label" }, row.label));
    div.appendChild(el("span", { class: "value" }, row.value));
    info.appendChild(div);
  }
  const banner = document.getElementById("outcome")!;
  banner.textContent = outcomeText(view.state);
  (document.getElementById("pass") as HTMLButtonElement).style.display =
    passLegal(view.state) && humanToMove(view) ? "inline-block" : "none";
  const replay = document.getElementById("replay") as HTMLInputElement;
  replay.max = String(view.history_length);
  replay.value = String(view.history_length);
}

window.addEventListener("DOMContentLoaded", () => void boot());

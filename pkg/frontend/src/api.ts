// Thin typed client for the play server; one WebSocket per session with
// reconnect-by-refetch semantics.

import { SessionView } from "./types.js";

async function asJson(res: Response): Promise<any> {
  const body = await res.json();
  if (!res.ok) {
    const detail = body && body.detail ? body.detail : body;
    const err = new Error(detail && detail.error ? detail.error : res.statusText);
    (err as any).detail = detail;
    (err as any).status = res.status;
    throw err;
  }
  return body;
}

export async function listGames(): Promise<string[]> {
  const body = await asJson(await fetch("/games"));
  return body.games;
}

export async function createSession(gameName: string,
                                    seats: { p1: string; p2: string }):
                                    Promise<SessionView> {
  const res = await fetch("/sessions", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ game_name: gameName, seats }),
  });
  const body = await asJson(res);
  return body.state;
}

export async function getState(sessionId: string): Promise<SessionView> {
  return asJson(await fetch(`/sessions/${sessionId}/state`));
}

export async function submitAction(sessionId: string,
                                   body: Record<string, unknown>):
                                   Promise<SessionView> {
  const res = await fetch(`/sessions/${sessionId}/actions`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  return asJson(res);
}

export async function agentMove(sessionId: string): Promise<SessionView> {
  const res = await fetch(`/sessions/${sessionId}/agent-move`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: "{}",
  });
  return asJson(res);
}

export async function undo(sessionId: string, to?: number):
                           Promise<SessionView> {
  const res = await fetch(`/sessions/${sessionId}/undo`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(to === undefined ? {} : { to }),
  });
  return asJson(res);
}

export async function history(sessionId: string): Promise<number[]> {
  const body = await asJson(await fetch(`/sessions/${sessionId}/history`));
  return body.actions;
}

export function openStream(sessionId: string,
                           onView: (view: SessionView) => void,
                           onDrop: () => void): WebSocket {
  const proto = location.protocol === "https:" ? "wss" : "ws";
  const ws = new WebSocket(`${proto}://${location.host}/sessions/${sessionId}/stream`);
  ws.onmessage = (ev) => onView(JSON.parse(ev.data));
  ws.onclose = onDrop;
  ws.onerror = onDrop;
  return ws;
}

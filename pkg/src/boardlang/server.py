"""HTTP/WebSocket play server bridging the engine to browsers and scripts.

In-memory sessions, one writer lock per session, JSON payloads versioned
with a top-level "v": 1. The action endpoint accepts raw action indices,
semantic {source, dest} / {dest} / {direction} forms, or a pass, so clients
never hard-code the action encoding.
"""

from __future__ import annotations

import asyncio
import json
import os
import threading
import time
import uuid
import zlib

import numpy as np
from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import RedirectResponse
from fastapi.staticfiles import StaticFiles

from . import engine, load_game
from .agents import MctsConfig, MctsPolicy, RandomPolicy
from .errors import BoardLangError, IllegalAction

_PLAYERS = ("P1", "P2")


def _seat_policy(spec_text, seed):
    if spec_text == "random":
        return RandomPolicy(seed=seed)
    if spec_text.startswith("mcts"):
        iters = int(spec_text.split(":", 1)[1]) if ":" in spec_text else 100
        return MctsPolicy(MctsConfig(iterations=iters, seed=seed))
    return None


class Session:
    def __init__(self, sid, game_text, compiled, seats):
        self.id = sid
        self.game_text = game_text
        self.compiled = compiled
        self.seats = {"p1": seats.get("p1", "human"),
                      "p2": seats.get("p2", "human")}
        self.state = compiled.init(batch_size=1, seed=_seed_of(sid))
        self.history = []
        self.lock = threading.Lock()
        self.created = time.time()
        self.last_active = self.created
        self.watchers = []

    def touch(self):
        self.last_active = time.time()

    def replay_to(self, length):
        state = self.compiled.init(batch_size=1, seed=_seed_of(self.id))
        for action in self.history[:length]:
            state = self.compiled.step(state, np.array([action]))
        self.history = self.history[:length]
        self.state = state

    def apply(self, action):
        self.state = self.compiled.step(self.state, np.array([action]))
        self.history.append(int(action))

    def notify(self, view):
        for loop, queue in list(self.watchers):
            loop.call_soon_threadsafe(queue.put_nowait, view)


def _seed_of(sid):
    return zlib.crc32(sid.encode()) & 0x7FFFFFFF


def _topology_meta(topo):
    return {
        "kind": topo.kind,
        "rows": topo.rows,
        "cols": topo.cols,
        "num_cells": topo.num_cells,
        "row_lengths": list(topo.row_lengths),
        "row_of": topo.row_of.tolist(),
        "col_of": topo.col_of.tolist(),
    }


def _rendering_meta(spec):
    if spec.rendering is None:
        return {"colors": {}, "shapes": {}}
    return {
        "colors": {_PLAYERS[p]: c for p, c in spec.rendering.colors},
        "shapes": dict(spec.rendering.shapes),
    }


def _legal_moves(compiled, state):
    mask = compiled.legal_mask(state)[0]
    moves = []
    src_cell = None
    if compiled.codec.kind == "gridworld":
        mover = state.current_player
        mine = (state.board_owner[0] >= 0)
        src_cell = int(np.argmax(mine))
    for action in np.nonzero(mask)[0]:
        d = compiled.codec.describe(int(action))
        d["action"] = int(action)
        if d["kind"] == "direction":
            d["source"] = src_cell
            nbr = compiled.topology.neighbor(src_cell, d["direction"])
            d["dest"] = nbr
        moves.append(d)
    return moves


def state_view(session):
    compiled = session.compiled
    state = session.state
    names = compiled.piece_names
    cells = []
    for i in range(compiled.num_cells):
        owner = int(state.board_owner[0, i])
        if owner < 0:
            cells.append(None)
        else:
            cells.append({"piece": names[int(state.board_piece[0, i])],
                          "owner": _PLAYERS[owner]})
    last = None
    if state.last_kind is not None and int(state.last_kind[0]) >= 0:
        kind = ["place", "step", "hop", "slide", "pass"][int(state.last_kind[0])]
        last = {"mover": _PLAYERS[int(state.last_mover[0])], "kind": kind,
                "source": int(state.last_source[0]),
                "dest": int(state.last_dest[0])}
    view = {
        "v": 1,
        "session_id": session.id,
        "game": {
            "name": compiled.spec.name,
            "pieces": list(names),
            "action_space": compiled.codec.size,
            "codec": compiled.codec.kind,
            "topology": _topology_meta(compiled.topology),
            "rendering": _rendering_meta(compiled.spec),
        },
        "seats": session.seats,
        "history_length": len(session.history),
        "state": {
            "move_count": int(state.move_count[0]),
            "mover": _PLAYERS[int(state.current_player[0])],
            "phase": int(state.phase[0]) if state.phase is not None else 0,
            "terminated": bool(state.terminated[0]),
            "outcome": engine.outcome_view(state),
            "scores": state.scores[0].tolist() if state.scores is not None else None,
            "passes": state.pass_streak[0].item() if state.pass_streak is not None else 0,
            "cells": cells,
            "last_action": last,
            "legal_moves": [] if state.terminated[0] else _legal_moves(compiled, state),
        },
    }
    return view


def _decode_action(compiled, body, state):
    if body.get("pass") is True or body.get("move") == "pass":
        idx = compiled.codec.pass_index
        if idx is None:
            raise HTTPException(409, detail={"v": 1, "error": "game has no pass action"})
        return idx
    if "action_index" in body:
        a = int(body["action_index"])
        if not (0 <= a < compiled.codec.size):
            raise HTTPException(409, detail={"v": 1, "error": "action index out of range"})
        return a
    if "direction" in body:
        try:
            return compiled.codec.encode_direction(body["direction"])
        except ValueError:
            raise HTTPException(409, detail={"v": 1, "error": "unknown direction"})
    if "dest" in body:
        dest = int(body["dest"])
        if compiled.codec.kind == "movement":
            if "source" not in body:
                raise HTTPException(422, detail={"v": 1, "error": "movement actions need source and dest"})
            return compiled.codec.encode(int(body["source"]), dest)
        if compiled.codec.kind == "gridworld":
            mine = state.board_owner[0] >= 0
            src = int(np.argmax(mine))
            for di, name in enumerate(compiled.codec.directions):
                if compiled.topology.neighbor(src, name) == dest:
                    return di
            raise HTTPException(409, detail={"v": 1, "error": "dest is not one step away"})
        return compiled.codec.encode(None, dest)
    raise HTTPException(422, detail={"v": 1, "error": "provide action_index, {source,dest}, {direction} or pass"})


def create_app(games_dir="games", snapshot_path=None, session_ttl=3600.0,
               static_dir=None):
    app = FastAPI(title="boardlang play server")
    sessions = {}
    registry_lock = threading.Lock()

    def corpus():
        out = {}
        if games_dir and os.path.isdir(games_dir):
            for name in sorted(os.listdir(games_dir)):
                if name.endswith(".ldx"):
                    out[name[:-4]] = os.path.join(games_dir, name)
        return out

    def evict():
        now = time.time()
        with registry_lock:
            dead = [k for k, s in sessions.items()
                    if now - s.last_active > session_ttl]
            for k in dead:
                del sessions[k]

    def get_session(sid):
        evict()
        with registry_lock:
            session = sessions.get(sid)
        if session is None:
            raise HTTPException(404, detail={"v": 1, "error": f"unknown session {sid}"})
        session.touch()
        return session

    def mutated(session):
        view = state_view(session)
        session.notify(view)
        return view

    @app.get("/games")
    def list_games():
        return {"v": 1, "games": sorted(corpus())}

    @app.post("/sessions")
    def create_session(body: dict):
        text = body.get("game_text")
        if text is None:
            name = body.get("game_name")
            paths = corpus()
            if name not in paths:
                raise HTTPException(404, detail={"v": 1, "error": f"unknown game {name!r}"})
            with open(paths[name], "r", encoding="utf-8") as f:
                text = f.read()
        try:
            compiled = load_game(text)
        except BoardLangError as exc:
            raise HTTPException(422, detail={"v": 1, "error": str(exc),
                                             "error_type": type(exc).__name__})
        sid = uuid.uuid4().hex[:12]
        session = Session(sid, text, compiled, body.get("seats") or {})
        with registry_lock:
            sessions[sid] = session
        return {"v": 1, "session_id": sid, "state": state_view(session)}

    @app.get("/sessions/{sid}/state")
    def get_state(sid: str):
        return state_view(get_session(sid))

    @app.get("/sessions/{sid}/history")
    def get_history(sid: str):
        session = get_session(sid)
        return {"v": 1, "actions": list(session.history)}

    @app.post("/sessions/{sid}/actions")
    def post_action(sid: str, body: dict):
        session = get_session(sid)
        with session.lock:
            compiled = session.compiled
            if session.state.terminated[0]:
                raise HTTPException(409, detail={"v": 1, "error": "game is over"})
            action = _decode_action(compiled, body, session.state)
            mask = compiled.legal_mask(session.state)[0]
            if not mask[action]:
                raise HTTPException(409, detail={
                    "v": 1, "error": "illegal action",
                    "legal_moves": _legal_moves(compiled, session.state)})
            session.apply(action)
            return mutated(session)

    @app.post("/sessions/{sid}/agent-move")
    def agent_move(sid: str):
        session = get_session(sid)
        with session.lock:
            state = session.state
            if state.terminated[0]:
                raise HTTPException(409, detail={"v": 1, "error": "game is over"})
            mover = int(state.current_player[0])
            seat = session.seats["p1" if mover == 0 else "p2"]
            policy = _seat_policy(seat, _seed_of(session.id) + mover)
            if policy is None:
                raise HTTPException(409, detail={
                    "v": 1, "error": f"seat P{mover + 1} is {seat!r}, not an agent"})
            rows = np.ones(1, dtype=bool)
            action = int(policy.decide(session.compiled, state, rows)[0])
            session.apply(action)
            return mutated(session)

    @app.post("/sessions/{sid}/undo")
    def undo(sid: str, body: dict = None):
        session = get_session(sid)
        with session.lock:
            target = len(session.history) - 1
            if body and "to" in body:
                target = int(body["to"])
            if target < 0 or target > len(session.history):
                raise HTTPException(409, detail={"v": 1, "error": "nothing to undo"})
            session.replay_to(target)
            return mutated(session)

    @app.websocket("/sessions/{sid}/stream")
    async def stream(ws: WebSocket, sid: str):
        await ws.accept()
        with registry_lock:
            session = sessions.get(sid)
        if session is None:
            await ws.send_json({"v": 1, "error": f"unknown session {sid}"})
            await ws.close()
            return
        queue = asyncio.Queue()
        entry = (asyncio.get_running_loop(), queue)
        session.watchers.append(entry)
        try:
            await ws.send_json(state_view(session))
            while True:
                view = await queue.get()
                await ws.send_json(view)
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            if entry in session.watchers:
                session.watchers.remove(entry)

    def snapshot():
        if not snapshot_path:
            return
        with registry_lock:
            data = [{"id": s.id, "game_text": s.game_text, "seats": s.seats,
                     "history": s.history} for s in sessions.values()]
        with open(snapshot_path, "w") as f:
            json.dump({"v": 1, "sessions": data}, f)

    def restore():
        if not snapshot_path or not os.path.exists(snapshot_path):
            return
        try:
            with open(snapshot_path, "r") as f:
                data = json.load(f)
        except (OSError, ValueError):
            return
        for row in data.get("sessions", []):
            try:
                compiled = load_game(row["game_text"])
                session = Session(row["id"], row["game_text"], compiled,
                                  row.get("seats") or {})
                for action in row.get("history", []):
                    session.apply(action)
                with registry_lock:
                    sessions[row["id"]] = session
            except (BoardLangError, IllegalAction, KeyError):
                continue

    app.on_event("startup")(restore)
    app.on_event("shutdown")(snapshot)

    static = static_dir or os.path.join(os.path.dirname(games_dir or "."),
                                        "frontend", "dist")
    if static and os.path.isdir(static):
        app.mount("/ui", StaticFiles(directory=static, html=True), name="ui")

        @app.get("/")
        def index():
            return RedirectResponse("/ui/")

    app.state.sessions = sessions
    return app

"""Websocket session service: the wire protocol consumed by the browser
client and any other external controller.

Every server message carries {type, session_id, seq}; seq increases per
connection. The schema is documented in docs/protocol.md and pinned by
golden-file tests.
"""

from __future__ import annotations

import asyncio
import logging
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .forward import GameEvent
from .model import Action, ActionCategory, Coord, GameState
from .runner import Session, SessionStatus

log = logging.getLogger("stratagem.server")


def action_to_json(action: Action) -> dict:
    return {
        "category": action.category.label,
        "unit_id": action.unit_id,
        "target": None if action.target is None else [action.target.x, action.target.y],
    }


def action_from_json(doc: dict) -> Action:
    category = ActionCategory.parse(str(doc.get("category")))
    if category is ActionCategory.END_TURN:
        return Action(category)
    target = doc.get("target")
    if not isinstance(target, (list, tuple)) or len(target) != 2:
        raise ValueError("action target must be [x, y]")
    return Action(category, int(doc["unit_id"]), Coord(int(target[0]), int(target[1])))


def _fog_rows(state: GameState) -> Optional[list[str]]:
    """Visibility mask for fogged snapshots: '1' seen, '0' hidden. The client
    renders from this instead of re-deriving sight rules."""
    if not state.is_fogged or state.observer is None:
        return None
    width, height = state.board.width, state.board.height
    seen = [[False] * width for _ in range(height)]
    for unit in state.units.values():
        if unit.owner != state.observer:
            continue
        r = state.types.unit_type(unit.type).line_of_sight_range
        for dy in range(-r, r + 1):
            y = unit.position.y + dy
            if not 0 <= y < height:
                continue
            span = r - abs(dy)
            for x in range(max(0, unit.position.x - span), min(width - 1, unit.position.x + span) + 1):
                seen[y][x] = True
    return ["".join("1" if cell else "0" for cell in row) for row in seen]


def observation_to_json(state: GameState) -> dict:
    symbols = {t.id: t.symbol for t in state.types.tile_types}
    type_names = {t.id: t.name for t in state.types.unit_types}
    rows = [
        "".join(symbols[state.board.tiles[y * state.board.width + x]] for x in range(state.board.width))
        for y in range(state.board.height)
    ]
    units = [
        {
            "unit_id": u.unit_id,
            "owner": u.owner,
            "type": type_names[u.type],
            "position": [u.position.x, u.position.y],
            "health": u.health,
            "spent": sorted(c.label for c in u.spent_actions),
        }
        for _, u in sorted(state.units.items())
    ]
    return {
        "width": state.board.width,
        "height": state.board.height,
        "rows": rows,
        "fog_rows": _fog_rows(state),
        "units": units,
        "players": [{"player_id": p.player_id, "alive": p.alive} for p in state.players],
        "current_player": state.current_player,
        "turn_number": state.turn_number,
        "is_fogged": state.is_fogged,
        "default_tile_symbol": symbols[state.types.default_tile],
    }


def event_to_json(event: GameEvent) -> dict:
    payload = {}
    for key, value in event.payload.items():
        if isinstance(value, Coord):
            payload[key] = [value.x, value.y]
        else:
            payload[key] = value
    return {"kind": event.kind.value, "payload": payload}


def status_to_json(status: SessionStatus) -> dict:
    result = None
    if status.result is not None:
        result = {"outcome": "draw" if status.result.is_draw else "winner", "winner": status.result.winner}
    return {"phase": status.phase, "awaiting": status.awaiting, "result": result}


class _Connection:
    def __init__(self, websocket: WebSocket, session: Session, player: Optional[int]):
        self.ws = websocket
        self.session = session
        self.player = player
        self.seq = 0

    async def send(self, message: dict) -> None:
        message["session_id"] = self.session.session_id
        message["seq"] = self.seq
        self.seq += 1
        await self.ws.send_json(message)

    async def send_state(self) -> None:
        obs, status = self.session.poll_observation(self.player)
        your_turn = (
            self.player is not None
            and status.phase in ("running", "awaiting_external")
            and obs.current_player == self.player
        )
        legal = self.session.legal_actions(self.player) if your_turn else []
        await self.send(
            {
                "type": "state",
                "observation": observation_to_json(obs),
                "status": status_to_json(status),
                "your_turn": your_turn,
                "legal_actions": [action_to_json(a) for a in legal],
            }
        )

    async def send_game_over(self, status: SessionStatus) -> None:
        await self.send({"type": "game_over", "result": status_to_json(status)["result"]})


def build_app(session: Session, ui_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="stratagem session")

    @app.get("/session")
    def session_info() -> dict:
        _, status = session.poll_observation(None)
        return {
            "session_id": session.session_id,
            "status": status_to_json(status),
            "seats": {str(p): label for p, label in session.labels.items()},
        }

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket) -> None:
        await websocket.accept()
        try:
            hello = await websocket.receive_json()
        except WebSocketDisconnect:
            return
        if hello.get("type") != "hello":
            await websocket.close(code=4000, reason="expected hello")
            return
        player = hello.get("player_id")
        conn = _Connection(websocket, session, player if player is None else int(player))
        await conn.send_state()

        loop = asyncio.get_running_loop()
        updates = session.subscribe()

        async def pump() -> None:
            while True:
                message = await loop.run_in_executor(None, updates.get)
                kind = message.get("kind")
                if kind == "advance":
                    for event in message["events"]:
                        await conn.send({"type": "event", **event_to_json(event)})
                    await conn.send_state()
                elif kind == "awaiting":
                    await conn.send_state()
                elif kind == "game_over":
                    _, status = session.poll_observation(None)
                    await conn.send_game_over(status)

        async def reader() -> None:
            while True:
                doc = await websocket.receive_json()
                if doc.get("type") != "action":
                    await conn.send({"type": "ack", "result": "rejected", "reason": "expected action message"})
                    continue
                if conn.player is None:
                    await conn.send({"type": "ack", "result": "rejected", "reason": "spectators cannot act"})
                    continue
                try:
                    action = action_from_json(doc)
                except (ValueError, KeyError, TypeError) as exc:
                    await conn.send({"type": "ack", "result": "rejected", "reason": f"malformed action: {exc}"})
                    continue
                verdict, reason = await loop.run_in_executor(None, session.submit_action, conn.player, action)
                await conn.send({"type": "ack", "result": verdict, "reason": reason})

        pump_task = asyncio.create_task(pump())
        try:
            await reader()
        except WebSocketDisconnect:
            pass
        finally:
            pump_task.cancel()
            session.unsubscribe(updates)

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app

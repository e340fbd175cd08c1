// Message types for the session protocol (see ../../docs/protocol.md).
// The client never invents rules: everything it knows arrives in these
// messages, and every action it sends is one the server offered.

export type Coord = [number, number];

export interface ActionMsg {
  category: string;
  unit_id: number | null;
  target: Coord | null;
}

export interface UnitView {
  unit_id: number;
  owner: number;
  type: string;
  position: Coord;
  health: number;
  spent: string[];
}

export interface PlayerView {
  player_id: number;
  alive: boolean;
}

export interface Observation {
  width: number;
  height: number;
  rows: string[];
  fog_rows: string[] | null;
  units: UnitView[];
  players: PlayerView[];
  current_player: number;
  turn_number: number;
  is_fogged: boolean;
  default_tile_symbol: string;
}

export interface GameResult {
  outcome: "winner" | "draw";
  winner: number | null;
}

export interface SessionStatus {
  phase: "lobby" | "running" | "awaiting_external" | "finished";
  awaiting: number | null;
  result: GameResult | null;
}

export interface StateMsg {
  type: "state";
  session_id: string;
  seq: number;
  observation: Observation;
  status: SessionStatus;
  your_turn: boolean;
  legal_actions: ActionMsg[];
}

export interface AckMsg {
  type: "ack";
  session_id: string;
  seq: number;
  result: "accepted" | "ignored" | "rejected";
  reason: string | null;
}

export interface EventMsg {
  type: "event";
  session_id: string;
  seq: number;
  kind: string;
  payload: Record<string, unknown>;
}

export interface GameOverMsg {
  type: "game_over";
  session_id: string;
  seq: number;
  result: GameResult;
}

export type ServerMsg = StateMsg | AckMsg | EventMsg | GameOverMsg;

export function parseServerMessage(raw: string): ServerMsg | null {
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof doc !== "object" || doc === null) return null;
  const type = (doc as { type?: unknown }).type;
  if (type === "state" || type === "ack" || type === "event" || type === "game_over") {
    return doc as ServerMsg;
  }
  return null;
}

export function sameAction(a: ActionMsg, b: ActionMsg): boolean {
  return (
    a.category === b.category &&
    a.unit_id === b.unit_id &&
    ((a.target === null && b.target === null) ||
      (a.target !== null && b.target !== null && a.target[0] === b.target[0] && a.target[1] === b.target[1]))
  );
}

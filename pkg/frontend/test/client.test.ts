import { describe, expect, it } from "vitest";

import { GameClient, SocketLike } from "../src/client.js";
import { ActionMsg, StateMsg } from "../src/protocol.js";

import helloState from "../../tests/golden/hello_state.json";

const REFERENCE = helloState as unknown as StateMsg;

class FakeSocket implements SocketLike {
  sent: string[] = [];
  closed = false;
  onopen: (() => void) | null = null;
  onmessage: ((data: string) => void) | null = null;
  onclose: (() => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
    this.onclose?.();
  }

  // test-side controls
  open(): void {
    this.onopen?.();
  }

  push(message: unknown): void {
    this.onmessage?.(JSON.stringify(message));
  }

  drop(): void {
    this.onclose?.();
  }
}

function harness(playerId: number | null = 0) {
  const sockets: FakeSocket[] = [];
  const toasts: string[] = [];
  const client = new GameClient(
    "ws://test/ws",
    playerId,
    () => {
      const socket = new FakeSocket();
      sockets.push(socket);
      return socket;
    },
    { onToast: (text) => toasts.push(text) },
    { reconnectDelayMs: 1 },
  );
  client.connect();
  sockets[0].open();
  return { client, sockets, toasts };
}

function stateMsg(overrides: Partial<StateMsg> = {}): StateMsg {
  return { ...REFERENCE, ...overrides };
}

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

describe("GameClient", () => {
  it("opens with a hello handshake carrying the seat and envelope", () => {
    const { sockets } = harness(0);
    expect(JSON.parse(sockets[0].sent[0])).toMatchObject({ type: "hello", player_id: 0, seq: 0 });
    expect(JSON.parse(sockets[0].sent[0])).toHaveProperty("session_id");
  });

  it("spectators send a null seat and cannot submit", () => {
    const { client, sockets } = harness(null);
    sockets[0].push(stateMsg({ your_turn: false, legal_actions: [] }));
    expect(JSON.parse(sockets[0].sent[0])).toMatchObject({ type: "hello", player_id: null });
    expect(client.endTurn()).toBe(false);
    expect(sockets[0].sent).toHaveLength(1);
  });

  it("refuses to submit when it is not our turn", () => {
    const { client, sockets } = harness(0);
    sockets[0].push(stateMsg({ your_turn: false, legal_actions: [] }));
    expect(client.submit({ category: "EndTurn", unit_id: null, target: null })).toBe(false);
    expect(sockets[0].sent).toHaveLength(1); // hello only
  });

  it("never fabricates: only server-listed actions go on the wire", () => {
    const { client, sockets } = harness(0);
    sockets[0].push(stateMsg());
    const fabricated: ActionMsg = { category: "Move", unit_id: 0, target: [4, 4] };
    expect(client.submit(fabricated)).toBe(false);
    const legal = REFERENCE.legal_actions[0];
    expect(client.submit({ ...legal, target: [...legal.target!] as [number, number] })).toBe(true);
    const sent = JSON.parse(sockets[0].sent[1]);
    expect(sent).toMatchObject({ type: "action", ...legal });
    expect(sent.session_id).toBe(REFERENCE.session_id);
  });

  it("only one submission may be in flight", () => {
    const { client, sockets } = harness(0);
    sockets[0].push(stateMsg());
    expect(client.submit(REFERENCE.legal_actions[0])).toBe(true);
    expect(client.submit(REFERENCE.legal_actions[1])).toBe(false);
    sockets[0].push({ type: "ack", session_id: "s", seq: 1, result: "accepted", reason: null });
    expect(client.state.pending).toBeNull();
  });

  it("ignored and rejected acks clear the pending action and toast", () => {
    const { client, sockets, toasts } = harness(0);
    sockets[0].push(stateMsg());
    client.submit(REFERENCE.legal_actions[0]);
    sockets[0].push({ type: "ack", session_id: "s", seq: 1, result: "ignored", reason: null });
    expect(client.state.pending).toBeNull();
    expect(toasts.some((t) => t.includes("ignored"))).toBe(true);

    client.submit(REFERENCE.legal_actions[0]);
    sockets[0].push({ type: "ack", session_id: "s", seq: 2, result: "rejected", reason: "not applicable" });
    expect(client.state.pending).toBeNull();
    expect(toasts.some((t) => t.includes("not applicable"))).toBe(true);
  });

  it("malformed messages keep the previous view", () => {
    const { client, sockets, toasts } = harness(0);
    sockets[0].push(stateMsg());
    const before = client.state.lastState;
    sockets[0].onmessage?.("{nonsense");
    expect(client.state.lastState).toBe(before);
    expect(toasts.some((t) => t.includes("unreadable"))).toBe(true);
  });

  it("reconnects after a drop and resends a still-legal queued action once", async () => {
    const { client, sockets } = harness(0);
    sockets[0].push(stateMsg());
    client.submit(REFERENCE.legal_actions[0]);
    sockets[0].drop();
    expect(client.state.connection).toBe("closed");
    await sleep(10);
    expect(sockets).toHaveLength(2);
    sockets[1].open();
    expect(JSON.parse(sockets[1].sent[0])).toMatchObject({ type: "hello", player_id: 0 });
    sockets[1].push(stateMsg()); // resync: action still legal
    const resent = sockets[1].sent.map((s) => JSON.parse(s)).filter((m) => m.type === "action");
    expect(resent).toHaveLength(1);
    expect(resent[0]).toMatchObject({ type: "action", ...REFERENCE.legal_actions[0] });
    // further states do not re-send it again
    sockets[1].push(stateMsg());
    expect(sockets[1].sent.map((s) => JSON.parse(s)).filter((m) => m.type === "action")).toHaveLength(1);
  });

  it("drops a queued action that is no longer legal after resync", async () => {
    const { client, sockets, toasts } = harness(0);
    sockets[0].push(stateMsg());
    client.submit(REFERENCE.legal_actions[0]);
    sockets[0].drop();
    await sleep(10);
    sockets[1].open();
    sockets[1].push(stateMsg({ your_turn: false, legal_actions: [] }));
    expect(client.state.pending).toBeNull();
    expect(sockets[1].sent.map((s) => JSON.parse(s)).filter((m) => m.type === "action")).toHaveLength(0);
    expect(toasts.some((t) => t.includes("no longer valid"))).toBe(true);
  });

  it("selection only works on own visible units and clears when they vanish", () => {
    const { client, sockets } = harness(0);
    sockets[0].push(stateMsg());
    client.selectUnit(1); // enemy unit
    expect(client.state.selectedUnit).toBeNull();
    client.selectUnit(0);
    expect(client.state.selectedUnit).toBe(0);
    const emptied = structuredClone(REFERENCE) as StateMsg;
    emptied.observation = { ...emptied.observation, units: [] };
    sockets[0].push(emptied);
    expect(client.state.selectedUnit).toBeNull();
  });

  it("records events and the final result", () => {
    const { client, sockets } = harness(0);
    sockets[0].push({ type: "event", session_id: "s", seq: 5, kind: "UnitMoved", payload: { unit_id: 0 } });
    sockets[0].push({ type: "game_over", session_id: "s", seq: 6, result: { outcome: "winner", winner: 0 } });
    expect(client.state.events).toHaveLength(1);
    expect(client.state.gameOver).toEqual({ outcome: "winner", winner: 0 });
  });
});

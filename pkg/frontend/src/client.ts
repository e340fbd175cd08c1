// Connection and client-side game state. The socket is injected so tests can
// drive the client with a scripted fake; the browser entry point passes the
// native WebSocket.

import {
  ActionMsg,
  EventMsg,
  GameResult,
  parseServerMessage,
  sameAction,
  StateMsg,
} from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((data: string) => void) | null;
  onclose: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientState {
  connection: ConnectionStatus;
  lastState: StateMsg | null;
  selectedUnit: number | null;
  pending: ActionMsg | null;
  events: EventMsg[];
  gameOver: GameResult | null;
}

export interface ClientHooks {
  onState?: (state: ClientState) => void;
  onToast?: (text: string, kind: "info" | "error") => void;
  onGameOver?: (result: GameResult) => void;
}

export interface ClientOptions {
  reconnectDelayMs?: number;
  maxEventFeed?: number;
}

export class GameClient {
  readonly url: string;
  readonly playerId: number | null;
  readonly state: ClientState = {
    connection: "closed",
    lastState: null,
    selectedUnit: null,
    pending: null,
    events: [],
    gameOver: null,
  };

  private factory: SocketFactory;
  private hooks: ClientHooks;
  private socket: SocketLike | null = null;
  private reconnectDelayMs: number;
  private maxEventFeed: number;
  private stopped = false;
  private resendAfterResync = false;
  private sendSeq = 0;
  private sessionId = "";

  constructor(
    url: string,
    playerId: number | null,
    factory: SocketFactory,
    hooks: ClientHooks = {},
    options: ClientOptions = {},
  ) {
    this.url = url;
    this.playerId = playerId;
    this.factory = factory;
    this.hooks = hooks;
    this.reconnectDelayMs = options.reconnectDelayMs ?? 1000;
    this.maxEventFeed = options.maxEventFeed ?? 50;
  }

  connect(): void {
    this.stopped = false;
    this.open();
  }

  stop(): void {
    this.stopped = true;
    this.socket?.close();
    this.socket = null;
  }

  private sendMessage(payload: Record<string, unknown>): void {
    if (this.socket === null) return;
    this.socket.send(JSON.stringify({ ...payload, session_id: this.sessionId, seq: this.sendSeq }));
    this.sendSeq += 1;
  }

  get yourTurn(): boolean {
    return this.state.lastState?.your_turn ?? false;
  }

  get legalActions(): ActionMsg[] {
    return this.state.lastState?.legal_actions ?? [];
  }

  selectUnit(unitId: number | null): void {
    // only own, currently-visible units are selectable
    if (unitId !== null) {
      const unit = this.state.lastState?.observation.units.find((u) => u.unit_id === unitId);
      if (!unit || unit.owner !== this.playerId) return;
    }
    this.state.selectedUnit = unitId;
    this.notify();
  }

  /** Submit an action. Returns false (and sends nothing) unless it is our
   * turn and the action is one the server listed in legal_actions; the
   * byte-equal server entry is what goes on the wire. */
  submit(action: ActionMsg): boolean {
    if (!this.yourTurn || this.state.pending !== null || this.socket === null) return false;
    const canonical = this.legalActions.find((a) => sameAction(a, action));
    if (canonical === undefined) return false;
    this.state.pending = canonical;
    this.sendMessage({ type: "action", ...canonical });
    this.notify();
    return true;
  }

  endTurn(): boolean {
    return this.submit({ category: "EndTurn", unit_id: null, target: null });
  }

  // ---------------------------------------------------------------- internals

  private open(): void {
    this.state.connection = "connecting";
    this.notify();
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.state.connection = "open";
      this.sendMessage({ type: "hello", player_id: this.playerId });
      this.notify();
    };
    socket.onmessage = (data) => this.handleMessage(data);
    socket.onclose = () => {
      if (this.socket !== socket) return;
      this.socket = null;
      this.state.connection = "closed";
      if (this.state.pending !== null) {
        // resolve the in-flight submission against the post-resync state
        this.resendAfterResync = true;
      }
      this.notify();
      if (!this.stopped) {
        setTimeout(() => {
          if (!this.stopped) this.open();
        }, this.reconnectDelayMs);
      }
    };
  }

  private handleMessage(raw: string): void {
    const msg = parseServerMessage(raw);
    if (msg === null) {
      this.hooks.onToast?.("unreadable message from server", "error");
      return; // keep the previous view
    }
    switch (msg.type) {
      case "state": {
        this.state.lastState = msg;
        this.sessionId = msg.session_id;
        // drop a stale selection and resolve a reconnect-queued submission
        if (
          this.state.selectedUnit !== null &&
          !msg.observation.units.some((u) => u.unit_id === this.state.selectedUnit)
        ) {
          this.state.selectedUnit = null;
        }
        if (this.resendAfterResync && this.state.pending !== null) {
          this.resendAfterResync = false;
          const pending = this.state.pending;
          const stillLegal = msg.your_turn && msg.legal_actions.some((a) => sameAction(a, pending));
          if (stillLegal && this.socket !== null) {
            // resend exactly once; the resulting ack resolves it
            this.sendMessage({ type: "action", ...pending });
          } else {
            this.state.pending = null;
            this.hooks.onToast?.("connection dropped; queued action no longer valid", "error");
          }
        }
        this.notify();
        break;
      }
      case "ack": {
        this.state.pending = null;
        if (msg.result === "ignored") {
          this.hooks.onToast?.("not your turn; action ignored", "error");
        } else if (msg.result === "rejected") {
          this.hooks.onToast?.(`action rejected: ${msg.reason ?? "unknown reason"}`, "error");
        }
        this.notify();
        break;
      }
      case "event": {
        this.state.events.push(msg);
        if (this.state.events.length > this.maxEventFeed) {
          this.state.events.splice(0, this.state.events.length - this.maxEventFeed);
        }
        this.notify();
        break;
      }
      case "game_over": {
        this.state.gameOver = msg.result;
        this.hooks.onGameOver?.(msg.result);
        this.notify();
        break;
      }
    }
  }

  private notify(): void {
    this.hooks.onState?.(this.state);
  }
}

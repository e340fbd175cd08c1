// Browser wiring: render the board view into the DOM, route clicks to unit
// selection and action submission, show toasts and the event feed.
// Configuration via query params: ?server=ws://host:port&player=0
// (omit player to spectate).

import { buildBoardView } from "./board.js";
import { ClientState, GameClient, SocketLike } from "./client.js";

const params = new URLSearchParams(window.location.search);
const defaultUrl = `${window.location.protocol === "https:" ? "wss" : "ws"}://${window.location.host}/ws`;
const serverUrl = params.get("server") ?? defaultUrl;
const playerParam = params.get("player");
const playerId = playerParam === null || playerParam === "" ? null : Number(playerParam);

const boardEl = document.getElementById("board") as HTMLElement;
const statusEl = document.getElementById("status") as HTMLElement;
const bannerEl = document.getElementById("banner") as HTMLElement;
const toastEl = document.getElementById("toast") as HTMLElement;
const feedEl = document.getElementById("feed") as HTMLElement;
const endTurnEl = document.getElementById("end-turn") as HTMLButtonElement;

const OWNER_COLORS = ["#4878a8", "#b5543a", "#6aa84f", "#8a5fa8"];

function browserSocket(url: string): SocketLike {
  const ws = new WebSocket(url);
  const wrapper: SocketLike = {
    send: (data) => ws.send(data),
    close: () => ws.close(),
    onopen: null,
    onmessage: null,
    onclose: null,
  };
  ws.onopen = () => wrapper.onopen?.();
  ws.onmessage = (ev) => wrapper.onmessage?.(String(ev.data));
  ws.onclose = () => wrapper.onclose?.();
  return wrapper;
}

let toastTimer: number | undefined;
function toast(text: string, kind: "info" | "error"): void {
  toastEl.textContent = text;
  toastEl.className = `toast show ${kind}`;
  window.clearTimeout(toastTimer);
  toastTimer = window.setTimeout(() => {
    toastEl.className = "toast";
  }, 2500);
}

const client = new GameClient(serverUrl, Number.isNaN(playerId as number) ? null : playerId, browserSocket, {
  onState: render,
  onToast: toast,
  onGameOver: (result) => {
    const text = result.outcome === "draw" ? "Game over: draw" : `Game over: player ${result.winner} wins`;
    toast(text, "info");
  },
});

function render(state: ClientState): void {
  bannerEl.className = state.connection === "open" ? "banner" : "banner show";
  bannerEl.textContent = state.connection === "connecting" ? "connecting..." : "connection lost - retrying";

  const last = state.lastState;
  if (last === null) return;
  const view = buildBoardView(last, state.selectedUnit);

  const seat = client.playerId === null ? "spectator" : `player ${client.playerId}`;
  const phase = state.gameOver
    ? state.gameOver.outcome === "draw"
      ? "draw"
      : `winner: player ${state.gameOver.winner}`
    : view.yourTurn
      ? "your turn"
      : `player ${last.observation.current_player} to move`;
  statusEl.textContent = `${seat} | round ${last.observation.turn_number + 1} | ${phase}`;

  endTurnEl.disabled = !view.yourTurn || state.pending !== null;

  boardEl.style.gridTemplateColumns = `repeat(${view.width}, var(--cell))`;
  boardEl.textContent = "";
  for (const cell of view.cells) {
    const el = document.createElement("div");
    el.className = "cell";
    el.dataset.symbol = cell.symbol;
    if (cell.fogged) el.classList.add("fog");
    if (cell.highlight) el.classList.add(`target-${cell.highlight.toLowerCase()}`);
    if (cell.selected) el.classList.add("selected");
    const glyph = document.createElement("span");
    glyph.className = "glyph";
    glyph.textContent = cell.symbol;
    el.appendChild(glyph);
    if (cell.unit !== null) {
      const unit = document.createElement("div");
      unit.className = "unit";
      unit.style.borderColor = OWNER_COLORS[cell.unit.owner % OWNER_COLORS.length];
      unit.title = `${cell.unit.type} (${cell.unit.health} hp)`;
      unit.textContent = cell.unit.type[0];
      const bar = document.createElement("div");
      bar.className = "health";
      bar.style.width = `${Math.round(cell.unit.healthRatio * 100)}%`;
      bar.style.background = OWNER_COLORS[cell.unit.owner % OWNER_COLORS.length];
      unit.appendChild(bar);
      el.appendChild(unit);
    }
    el.addEventListener("click", () => onCellClick(cell.x, cell.y));
    boardEl.appendChild(el);
  }

  feedEl.textContent = "";
  for (const ev of state.events.slice(-12).reverse()) {
    const li = document.createElement("li");
    li.textContent = `${ev.kind} ${JSON.stringify(ev.payload)}`;
    feedEl.appendChild(li);
  }
}

function onCellClick(x: number, y: number): void {
  const last = client.state.lastState;
  if (last === null) return;
  const view = buildBoardView(last, client.state.selectedUnit);
  const cell = view.cells[y * view.width + x];
  if (cell.highlight !== null && view.yourTurn) {
    const action = view.selectionActions.find(
      (a) => a.target !== null && a.target[0] === x && a.target[1] === y,
    );
    if (action !== undefined) {
      client.submit(action);
      return;
    }
  }
  if (cell.unit !== null && cell.unit.owner === client.playerId) {
    client.selectUnit(cell.unit.unit_id === client.state.selectedUnit ? null : cell.unit.unit_id);
  } else {
    client.selectUnit(null);
  }
}

endTurnEl.addEventListener("click", () => client.endTurn());
client.connect();

"""Game orchestration: the headless turn-based runner, replay logging and
verification, round-robin arenas, and the interactive session service.

The runner owns the true state exclusively; agents and external clients only
ever see clones or fogged observations. Everything is deterministic given
(config, seats, seed).
"""

from __future__ import annotations

import hashlib
import logging
import math
import queue
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from .agents import Agent, AgentContext, Budget, BudgetedModel, build_agent
from .config import ConfigError, Deployment, GameConfig, instantiate_state, serialize_config
from .forward import ForwardModel, GameEvent, WinStatus
from .model import (
    Action,
    ActionCategory,
    Coord,
    END_TURN,
    GameState,
    clone_state,
    fingerprint_hex,
    splitmix64,
)

log = logging.getLogger("stratagem.runner")

DEFAULT_MAX_TURNS = 100
EXTERNAL = "external"

Seat = Union[str, Agent]  # agent spec string, Agent instance, or EXTERNAL


@dataclass
class SeatStats:
    forward_calls: int = 0
    decisions: int = 0
    time_total_s: float = 0.0
    time_max_s: float = 0.0
    substituted: int = 0


@dataclass
class GameResult:
    outcome: WinStatus
    turns: int
    seats: dict[int, str]
    stats: dict[int, SeatStats]
    interrupted: bool = False

    @property
    def winner(self) -> Optional[int]:
        return self.outcome.winner


@dataclass(frozen=True)
class ReplayEntry:
    turn: int
    player: int
    action: Action
    post_fingerprint: str

    def to_line(self) -> str:
        a = self.action
        if a.category is ActionCategory.END_TURN:
            unit, tx, ty = "-", "-", "-"
        else:
            unit, tx, ty = str(a.unit_id), str(a.target.x), str(a.target.y)
        return f"{self.turn};{self.player};{a.category.label};{unit};{tx};{ty};{self.post_fingerprint}"

    @classmethod
    def from_line(cls, line: str) -> "ReplayEntry":
        parts = line.strip().split(";")
        if len(parts) != 7:
            raise ValueError(f"malformed replay line: {line!r}")
        turn, player, category, unit, tx, ty, fp = parts
        cat = ActionCategory.parse(category)
        if cat is ActionCategory.END_TURN:
            action = END_TURN
        else:
            action = Action(cat, int(unit), Coord(int(tx), int(ty)))
        return cls(int(turn), int(player), action, fp)


@dataclass
class Replay:
    config_sha256: str
    seed: int
    seats: dict[int, str]
    entries: list[ReplayEntry] = field(default_factory=list)

    def to_text(self) -> str:
        seats = ",".join(f"{p}={label}" for p, label in sorted(self.seats.items()))
        lines = [f"{self.config_sha256};{self.seed};{seats}"]
        lines.extend(e.to_line() for e in self.entries)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Replay":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty replay")
        sha, seed, seats_field = lines[0].split(";", 2)
        seats: dict[int, str] = {}
        if seats_field:
            for item in seats_field.split(","):
                p, _, label = item.partition("=")
                seats[int(p)] = label
        return cls(sha, int(seed), seats, [ReplayEntry.from_line(ln) for ln in lines[1:]])


def config_digest(cfg: GameConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode("utf-8")).hexdigest()


def _resolve_seat(seat: Seat, player: int, seed: int) -> tuple[Agent, str]:
    if isinstance(seat, Agent):
        return seat, seat.name
    agent = build_agent(seat, seed=splitmix64(splitmix64(seed) + player))
    return agent, seat


def run_game(
    cfg: GameConfig,
    seats: dict[int, Seat],
    seed: int,
    budget: Optional[Budget] = None,
    fog: Optional[bool] = None,
    max_turns: int = DEFAULT_MAX_TURNS,
    deployments: Optional[list[Deployment]] = None,
    on_events: Optional[Callable[[list[GameEvent], GameState], None]] = None,
) -> tuple[GameResult, Replay]:
    """Play one headless game to completion.

    Each decision gets a fresh budget; an agent returning an inapplicable
    action has it replaced by EndTurn with a logged warning so tournaments
    keep running. Games exceeding max_turns full rounds end in a forced draw.
    """
    budget = budget or Budget(max_forward_calls=1000)
    fm = ForwardModel(cfg)
    state = instantiate_state(cfg, seed, deployments)
    fog_on = cfg.partial_observability if fog is None else fog

    agents: dict[int, Agent] = {}
    labels: dict[int, str] = {}
    for p in sorted(seats):
        if seats[p] == EXTERNAL:
            raise ValueError("run_game requires every seat to be agent-bound; use Session for external seats")
        agents[p], labels[p] = _resolve_seat(seats[p], p, seed)
        agents[p].reset()
    for player in state.players:
        if player.player_id not in agents:
            raise ValueError(f"no seat bound for player {player.player_id}")

    replay = Replay(config_digest(cfg), seed, labels)
    stats = {p: SeatStats() for p in agents}

    forced_draw = False
    interrupted = False
    while True:
        status = fm.check_win(state)
        if status.over:
            break
        if state.turn_number > max_turns:
            status = WinStatus(True, None)
            forced_draw = True
            break
        p = state.current_player
        agent = agents[p]
        per_decision = budget
        if agent.budget_override is not None:
            per_decision = Budget(max_forward_calls=agent.budget_override, max_millis=budget.max_millis)
        model = BudgetedModel(fm, per_decision)
        obs = fm.observe(state, p) if fog_on else clone_state(state)
        ctx = AgentContext(player=p, observation=obs, model=model, rng=agent.rng, budget=per_decision)
        started = time.perf_counter()
        try:
            action = agent.act(ctx)
        except KeyboardInterrupt:
            # clean shutdown: report the game as an interrupted draw and let
            # the caller keep the partial replay
            status = WinStatus(True, None)
            forced_draw = True
            interrupted = True
            break
        elapsed = time.perf_counter() - started
        seat = stats[p]
        seat.forward_calls += model.calls
        seat.decisions += 1
        seat.time_total_s += elapsed
        seat.time_max_s = max(seat.time_max_s, elapsed)
        if not fm.is_applicable(state, action):
            log.warning("player %s returned inapplicable action %s; substituting EndTurn", p, action)
            seat.substituted += 1
            action = END_TURN
        turn_before = state.turn_number
        events = fm.advance(state, action, checked=True)
        replay.entries.append(ReplayEntry(turn_before, p, action, fingerprint_hex(state)))
        if on_events is not None:
            on_events(events, state)

    # Rounds are 1-based in reports: a game ending mid-round N reports N.
    turns = state.turn_number if forced_draw else state.turn_number + 1
    return GameResult(outcome=status, turns=turns, seats=labels, stats=stats, interrupted=interrupted), replay


class ReplayDivergenceError(Exception):
    def __init__(self, step: int, message: str):
        super().__init__(f"replay diverges at step {step}: {message}")
        self.step = step


@dataclass
class ReplayCheck:
    final_fingerprint: str
    states: list[GameState]


def replay_game(
    replay: Replay,
    cfg: GameConfig,
    deployments: Optional[list[Deployment]] = None,
    require_terminal: bool = True,
    max_turns: int = DEFAULT_MAX_TURNS,
) -> ReplayCheck:
    """Re-execute a logged game with checks on; every step must reproduce its
    logged fingerprint. Raises ReplayDivergenceError naming the first bad step.
    With require_terminal, a log that stops mid-game (truncation) also fails."""
    fm = ForwardModel(cfg)
    state = instantiate_state(cfg, replay.seed, deployments)
    states: list[GameState] = []
    for i, entry in enumerate(replay.entries):
        if entry.player != state.current_player:
            raise ReplayDivergenceError(i, f"expected player {state.current_player}, log says {entry.player}")
        try:
            fm.advance(state, entry.action, checked=True)
        except Exception as exc:
            raise ReplayDivergenceError(i, f"action rejected: {exc}") from exc
        fp = fingerprint_hex(state)
        if fp != entry.post_fingerprint:
            raise ReplayDivergenceError(i, f"fingerprint {fp} != logged {entry.post_fingerprint}")
        states.append(clone_state(state))
    if require_terminal and not fm.check_win(state).over and state.turn_number <= max_turns:
        raise ReplayDivergenceError(len(replay.entries), "log ends before the game is over (truncated?)")
    return ReplayCheck(fingerprint_hex(state), states)


# --------------------------------------------------------------------- arena


@dataclass(frozen=True)
class ArenaGameRow:
    pairing: str
    seat0: str
    seat1: str
    seed: int
    outcome: str  # "0", "1" (winning seat index) or "draw"
    turns: int


@dataclass
class StandingsRow:
    agent: str
    games: int = 0
    wins: int = 0
    draws: int = 0
    losses: int = 0

    @property
    def win_rate(self) -> float:
        return self.wins / self.games if self.games else 0.0

    @property
    def wilson(self) -> tuple[float, float]:
        return wilson_interval(self.wins, self.games)


@dataclass
class Standings:
    rows: list[StandingsRow]
    games: list[ArenaGameRow]

    def row(self, agent: str) -> StandingsRow:
        for r in self.rows:
            if r.agent == agent:
                return r
        raise KeyError(agent)


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson 95% score interval for a binomial proportion."""
    if trials == 0:
        return (0.0, 1.0)
    phat = successes / trials
    denom = 1 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def run_arena(
    cfg: GameConfig,
    roster: list[str],
    games_per_pairing: int,
    base_seed: int,
    budget: Optional[Budget] = None,
    fog: Optional[bool] = None,
    max_turns: int = DEFAULT_MAX_TURNS,
    deployments: Optional[list[Deployment]] = None,
    on_game: Optional[Callable[[ArenaGameRow], None]] = None,
) -> Standings:
    """Round-robin over the roster with seat-swapped mirrored pairs; seeds are
    base_seed + global game index, so standings are fully reproducible."""
    if len(roster) < 2:
        raise ValueError("arena needs a roster of at least two agents")
    rows = {spec: StandingsRow(agent=spec) for spec in roster}
    games: list[ArenaGameRow] = []
    game_index = 0
    for i in range(len(roster)):
        for j in range(i + 1, len(roster)):
            for g in range(games_per_pairing):
                swapped = g % 2 == 1
                seat0, seat1 = (roster[j], roster[i]) if swapped else (roster[i], roster[j])
                seed = base_seed + game_index
                game_index += 1
                result, _ = run_game(
                    cfg,
                    {0: seat0, 1: seat1},
                    seed=seed,
                    budget=budget,
                    fog=fog,
                    max_turns=max_turns,
                    deployments=deployments,
                )
                if result.outcome.is_draw:
                    outcome = "draw"
                    rows[seat0].draws += 1
                    rows[seat1].draws += 1
                else:
                    outcome = str(result.winner)
                    winner_spec = seat0 if result.winner == 0 else seat1
                    loser_spec = seat1 if result.winner == 0 else seat0
                    rows[winner_spec].wins += 1
                    rows[loser_spec].losses += 1
                rows[seat0].games += 1
                rows[seat1].games += 1
                row = ArenaGameRow(f"{i}-{j}", seat0, seat1, seed, outcome, result.turns)
                games.append(row)
                if on_game is not None:
                    on_game(row)
    ordered = sorted(rows.values(), key=lambda r: (-r.win_rate, r.agent))
    return Standings(rows=ordered, games=games)


# ------------------------------------------------------------------- session


@dataclass
class SessionStatus:
    phase: str  # "lobby" | "running" | "awaiting_external" | "finished"
    awaiting: Optional[int] = None
    result: Optional[WinStatus] = None
    turns: int = 0


class _Submission:
    def __init__(self, player: int, action: Action):
        self.player = player
        self.action = action
        self.outcome: tuple[str, Optional[str]] = ("rejected", "not processed")
        self.done = threading.Event()


class Session:
    """One live game: true state owned by the runner thread, observations and
    submissions crossing through a lock + queue. External seats block the
    game until submit_action delivers an applicable action (no timeout)."""

    def __init__(
        self,
        cfg: GameConfig,
        seats: dict[int, Seat],
        seed: int,
        budget: Optional[Budget] = None,
        fog: Optional[bool] = None,
        max_turns: int = DEFAULT_MAX_TURNS,
        deployments: Optional[list[Deployment]] = None,
        session_id: Optional[str] = None,
    ):
        self.cfg = cfg
        self.fm = ForwardModel(cfg)
        self.budget = budget or Budget(max_forward_calls=1000)
        self.fog = cfg.partial_observability if fog is None else fog
        self.max_turns = max_turns
        self.session_id = session_id or f"s{seed:08x}"
        self.lock = threading.RLock()
        self.state = instantiate_state(cfg, seed, deployments)
        self.seed = seed
        self.seats: dict[int, Seat] = dict(seats)
        self.agents: dict[int, Agent] = {}
        self.labels: dict[int, str] = {}
        for p, seat in sorted(seats.items()):
            if seat == EXTERNAL:
                self.labels[p] = EXTERNAL
            else:
                self.agents[p], self.labels[p] = _resolve_seat(seat, p, seed)
        for player in self.state.players:
            if player.player_id not in self.seats:
                raise ValueError(f"no seat bound for player {player.player_id}")
        self.replay = Replay(config_digest(cfg), seed, self.labels)
        self.status = SessionStatus(phase="lobby")
        self._inbox: "queue.Queue[Optional[_Submission]]" = queue.Queue()
        self._subscribers: list["queue.Queue[dict]"] = []
        self._thread: Optional[threading.Thread] = None
        self._closed = False

    # -- pub/sub ------------------------------------------------------------

    def subscribe(self) -> "queue.Queue[dict]":
        q: "queue.Queue[dict]" = queue.Queue()
        with self.lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: "queue.Queue[dict]") -> None:
        with self.lock:
            if q in self._subscribers:
                self._subscribers.remove(q)
        q.put({"kind": "bye"})  # unblocks any thread waiting on the queue

    def _broadcast(self, message: dict) -> None:
        with self.lock:
            subs = list(self._subscribers)
        for q in subs:
            q.put(message)

    # -- client surface -----------------------------------------------------

    def poll_observation(self, player: Optional[int]) -> tuple[GameState, SessionStatus]:
        """Consistent snapshot: fogged for seated players under fog, full for
        spectators. Never a torn read."""
        with self.lock:
            if player is not None and self.fog:
                snap = self.fm.observe(self.state, player)
            else:
                snap = clone_state(self.state)
            status = SessionStatus(self.status.phase, self.status.awaiting, self.status.result, self.state.turn_number)
            return snap, status

    def legal_actions(self, player: int) -> list[Action]:
        with self.lock:
            if self.status.phase == "finished" or self.state.current_player != player:
                return []
            return list(self.fm.generate_actions(self.state).actions)

    def submit_action(self, player: int, action: Action) -> tuple[str, Optional[str]]:
        """Returns (verdict, reason): out-of-turn submissions are ignored with
        no state change; in-turn inapplicable ones rejected; in-turn applicable
        ones applied by the runner thread before this call returns."""
        with self.lock:
            if self.status.phase == "finished":
                return ("rejected", "game over")
            if player not in self.seats:
                return ("rejected", f"unknown player {player}")
            if self.state.current_player != player:
                return ("ignored", None)
            if self.seats[player] != EXTERNAL:
                return ("rejected", "seat is agent-controlled")
            if not self.fm.is_applicable(self.state, action):
                return ("rejected", "not applicable")
            submission = _Submission(player, action)
            self._inbox.put(submission)
        submission.done.wait()
        return submission.outcome

    # -- runner thread --------------------------------------------------------

    def start(self) -> threading.Thread:
        thread = threading.Thread(target=self.run, name=f"session-{self.session_id}", daemon=True)
        self._thread = thread
        thread.start()
        return thread

    def close(self) -> None:
        self._closed = True
        self._inbox.put(None)
        if self._thread is not None and self._thread.is_alive():
            self._thread.join(timeout=5)

    def run(self) -> GameResult:
        with self.lock:
            self.status = SessionStatus(phase="running")
        stats = {p: SeatStats() for p in self.seats}
        while True:
            with self.lock:
                status = self.fm.check_win(self.state)
                if not status.over and self.state.turn_number > self.max_turns:
                    status = WinStatus(True, None)
                if status.over:
                    self.status = SessionStatus("finished", None, status, self.state.turn_number)
                    break
                p = self.state.current_player
                seat = self.seats[p]
            if seat == EXTERNAL:
                first_wait = False
                with self.lock:
                    if self.status.awaiting != p:
                        self.status = SessionStatus("awaiting_external", p, None, self.state.turn_number)
                        first_wait = True
                if first_wait:
                    obs, _ = self.poll_observation(p)
                    self._broadcast(
                        {
                            "kind": "awaiting",
                            "player": p,
                            "observation": obs,
                            "legal_actions": self.legal_actions(p),
                        }
                    )
                submission = self._inbox.get()
                if submission is None:
                    if self._closed:
                        return GameResult(WinStatus(True, None), self.state.turn_number, self.labels, stats)
                    continue
                with self.lock:
                    if self.state.current_player != submission.player:
                        submission.outcome = ("ignored", None)
                    elif not self.fm.is_applicable(self.state, submission.action):
                        submission.outcome = ("rejected", "not applicable")
                    else:
                        self._apply(submission.player, submission.action)
                        self.status = SessionStatus("running", None, None, self.state.turn_number)
                        submission.outcome = ("accepted", None)
                submission.done.set()
            else:
                agent = self.agents[p]
                per_decision = self.budget
                if agent.budget_override is not None:
                    per_decision = Budget(max_forward_calls=agent.budget_override, max_millis=self.budget.max_millis)
                model = BudgetedModel(self.fm, per_decision)
                obs, _ = self.poll_observation(p)
                ctx = AgentContext(player=p, observation=obs, model=model, rng=agent.rng, budget=per_decision)
                started = time.perf_counter()
                action = agent.act(ctx)
                elapsed = time.perf_counter() - started
                st = stats[p]
                st.forward_calls += model.calls
                st.decisions += 1
                st.time_total_s += elapsed
                st.time_max_s = max(st.time_max_s, elapsed)
                with self.lock:
                    if not self.fm.is_applicable(self.state, action):
                        log.warning("player %s returned inapplicable action %s; substituting EndTurn", p, action)
                        st.substituted += 1
                        action = END_TURN
                    self._apply(p, action)
        result = GameResult(self.status.result, self.state.turn_number + 1, self.labels, stats)
        self._broadcast({"kind": "game_over", "result": self.status.result})
        return result

    def _apply(self, player: int, action: Action) -> None:
        turn_before = self.state.turn_number
        events = self.fm.advance(self.state, action, checked=True)
        self.replay.entries.append(ReplayEntry(turn_before, player, action, fingerprint_hex(self.state)))
        self._broadcast({"kind": "advance", "player": player, "action": action, "events": events})

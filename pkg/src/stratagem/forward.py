"""All game logic: action generation, execution, triggers/effects, win checks,
fog-of-war observations and their randomized completion.

The forward model itself is stateless apart from immutable rule tables
compiled from a config; it can be shared read-only between agents. Every
mutation targets a caller-owned GameState.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .config import Condition, EffectDef, EffectType, GameConfig, Trigger, WinCondition
from .model import (
    Action,
    ActionCategory,
    Board,
    Coord,
    END_TURN,
    GameState,
    QueryError,
    Unit,
    clone_state,
    in_bounds,
    splitmix64,
)


class EventKind(Enum):
    UNIT_MOVED = "UnitMoved"
    UNIT_DAMAGED = "UnitDamaged"
    UNIT_HEALED = "UnitHealed"
    UNIT_DIED = "UnitDied"
    EFFECT_FIRED = "EffectFired"
    TURN_ENDED = "TurnEnded"
    GAME_OVER = "GameOver"


@dataclass(frozen=True)
class GameEvent:
    kind: EventKind
    payload: dict

    def __str__(self) -> str:
        inner = " ".join(f"{k}={v}" for k, v in self.payload.items())
        return f"{self.kind.value}({inner})"


@dataclass(frozen=True)
class WinStatus:
    over: bool
    winner: Optional[int] = None  # None while ongoing or on a draw

    @property
    def is_draw(self) -> bool:
        return self.over and self.winner is None

    def __str__(self) -> str:
        if not self.over:
            return "ongoing"
        return "draw" if self.winner is None else f"winner({self.winner})"


ONGOING = WinStatus(False)
DRAW = WinStatus(True, None)


@dataclass(frozen=True)
class CompletionBias:
    """Per-hidden-walkable-cell probability of sampling a hidden enemy unit."""

    unit_presence_probability: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.unit_presence_probability <= 1.0:
            raise ValueError("unit presence probability must lie in [0, 1]")


@dataclass
class ActionSpace:
    player: int
    actions: list[Action] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.actions)

    def __iter__(self):
        return iter(self.actions)


class TerminalStateError(Exception):
    """Raised when actions are requested for a finished game."""


class InapplicableActionError(Exception):
    """Raised by checked advance when the action does not fit the state."""


class FogError(Exception):
    """Raised on invalid observe/complete usage (double fog, completing full states)."""


_NEIGHBOR_CACHE: dict[tuple[int, int], list[list[int]]] = {}


def _neighbors(width: int, height: int) -> list[list[int]]:
    key = (width, height)
    cached = _NEIGHBOR_CACHE.get(key)
    if cached is not None:
        return cached
    table: list[list[int]] = []
    for idx in range(width * height):
        x, y = idx % width, idx // width
        cell = []
        if x > 0:
            cell.append(idx - 1)
        if x + 1 < width:
            cell.append(idx + 1)
        if y > 0:
            cell.append(idx - width)
        if y + 1 < height:
            cell.append(idx + width)
        table.append(cell)
    _NEIGHBOR_CACHE[key] = table
    return table


class ForwardModel:
    """Rules engine compiled from a validated GameConfig."""

    def __init__(self, cfg: GameConfig):
        self.config = cfg
        self.win_condition = cfg.win_condition
        self._walkable = [t.walkable for t in cfg.tile_types]
        self._default_tile = cfg.default_tile.id
        self._unit_types = list(cfg.unit_types)
        tile_ids = {t.name: t.id for t in cfg.tile_types}
        self._effects: dict[Trigger, list[tuple[EffectDef, Optional[int]]]] = {
            Trigger.END_OF_TURN: [],
            Trigger.ENTER_TILE: [],
        }
        for e in cfg.effects:
            target_id = tile_ids[e.target_tile] if e.target_tile is not None else None
            self._effects[e.trigger].append((e, target_id))

    # ------------------------------------------------------------------ moves

    def reachable_tiles(self, state: GameState, unit_id: int) -> set[Coord]:
        """Cells reachable by 4-connected steps through traversable cells,
        path length bounded by the unit's movement range; excludes the start."""
        unit = state.units.get(unit_id)
        if unit is None:
            raise QueryError(f"unknown unit {unit_id}")
        rng = self._unit_types[unit.type].movement_range
        out: set[Coord] = set()
        if rng <= 0:
            return out
        board = state.board
        w = board.width
        tiles = board.tiles
        walk = self._walkable
        occ = state.occupied
        nbrs = _neighbors(w, board.height)
        start = unit.position.y * w + unit.position.x
        seen = {start}
        frontier = [start]
        for _ in range(rng):
            nxt: list[int] = []
            for idx in frontier:
                for j in nbrs[idx]:
                    if j in seen:
                        continue
                    seen.add(j)
                    c = Coord(j % w, j // w)
                    if walk[tiles[j]] and c not in occ:
                        out.add(c)
                        nxt.append(j)
            if not nxt:
                break
            frontier = nxt
        return out

    def generate_actions(self, state: GameState) -> ActionSpace:
        """Every legal action for the player to move, deterministically ordered:
        by unit id, then Move/Attack/Heal, then target row-major; EndTurn last."""
        if self.check_win(state).over:
            raise TerminalStateError("game is over; no actions available")
        player = state.current_player
        space = ActionSpace(player=player)
        units = state.units
        for uid in sorted(units):
            unit = units[uid]
            if unit.owner != player:
                continue
            utype = self._unit_types[unit.type]
            spent = unit.spent_actions
            if ActionCategory.MOVE in utype.actions and ActionCategory.MOVE not in spent:
                for target in sorted(self.reachable_tiles(state, uid), key=lambda c: (c.y, c.x)):
                    space.actions.append(Action(ActionCategory.MOVE, uid, target))
            if ActionCategory.ATTACK in utype.actions and ActionCategory.ATTACK not in spent:
                targets = [
                    other.position
                    for other in units.values()
                    if other.owner != player
                    and abs(other.position.x - unit.position.x) + abs(other.position.y - unit.position.y)
                    <= utype.attack_range
                ]
                for target in sorted(targets, key=lambda c: (c.y, c.x)):
                    space.actions.append(Action(ActionCategory.ATTACK, uid, target))
            if ActionCategory.HEAL in utype.actions and ActionCategory.HEAL not in spent:
                targets = [
                    other.position
                    for other in units.values()
                    if other.owner == player
                    and other.health < self._unit_types[other.type].health
                    and abs(other.position.x - unit.position.x) + abs(other.position.y - unit.position.y)
                    <= utype.heal_range
                ]
                for target in sorted(targets, key=lambda c: (c.y, c.x)):
                    space.actions.append(Action(ActionCategory.HEAL, uid, target))
        space.actions.append(END_TURN)
        return space

    def is_applicable(self, state: GameState, a: Action) -> bool:
        """True iff the action would appear in generate_actions(state); the guard
        against stale or tampered actions."""
        if self.check_win(state).over:
            return False
        if a.category is ActionCategory.END_TURN:
            return True
        unit = state.units.get(a.unit_id)
        if unit is None or unit.owner != state.current_player:
            return False
        utype = self._unit_types[unit.type]
        if a.category not in utype.actions or a.category in unit.spent_actions:
            return False
        target = a.target
        if not in_bounds(state.board, target):
            return False
        if a.category is ActionCategory.MOVE:
            return target in self.reachable_tiles(state, a.unit_id)
        occupant_id = state.occupied.get(target)
        occupant = None if occupant_id is None else state.units[occupant_id]
        dist = abs(target.x - unit.position.x) + abs(target.y - unit.position.y)
        if a.category is ActionCategory.ATTACK:
            return occupant is not None and occupant.owner != unit.owner and dist <= utype.attack_range
        # Heal
        return (
            occupant is not None
            and occupant.owner == unit.owner
            and occupant.health < self._unit_types[occupant.type].health
            and dist <= utype.heal_range
        )

    # --------------------------------------------------------------- advance

    def advance(self, state: GameState, a: Action, checked: bool = True) -> list[GameEvent]:
        """Execute the action, mutating the state in place, and return the
        events fired. With checked=True an inapplicable action raises and the
        state stays untouched; unchecked callers must guarantee applicability."""
        if checked and not self.is_applicable(state, a):
            raise InapplicableActionError(f"action not applicable: {a}")
        events: list[GameEvent] = []
        if a.category is ActionCategory.MOVE:
            unit = state.units[a.unit_id]
            old = unit.position
            del state.occupied[old]
            unit.position = a.target
            state.occupied[a.target] = unit.unit_id
            unit.spent_actions.add(ActionCategory.MOVE)
            events.append(GameEvent(EventKind.UNIT_MOVED, {"unit_id": unit.unit_id, "from": old, "to": a.target}))
            events.extend(self.apply_effects(state, Trigger.ENTER_TILE, unit.unit_id))
        elif a.category is ActionCategory.ATTACK:
            unit = state.units[a.unit_id]
            target = state.units[state.occupied[a.target]]
            self._damage(state, target, self._unit_types[unit.type].attack_damage, events)
            unit.spent_actions.add(ActionCategory.ATTACK)
        elif a.category is ActionCategory.HEAL:
            unit = state.units[a.unit_id]
            target = state.units[state.occupied[a.target]]
            self._heal(state, target, self._unit_types[unit.type].heal_amount, events)
            unit.spent_actions.add(ActionCategory.HEAL)
        else:
            events.extend(self._end_turn(state))
        status = self.check_win(state)
        if status.over:
            events.append(
                GameEvent(
                    EventKind.GAME_OVER,
                    {"result": "draw" if status.is_draw else "winner", "winner": status.winner},
                )
            )
        return events

    def _end_turn(self, state: GameState) -> list[GameEvent]:
        events: list[GameEvent] = []
        player = state.current_player
        own_ids = sorted(uid for uid, u in state.units.items() if u.owner == player)
        for uid in own_ids:
            if uid in state.units:
                events.extend(self.apply_effects(state, Trigger.END_OF_TURN, uid))
        for uid in own_ids:
            unit = state.units.get(uid)
            if unit is not None:
                unit.spent_actions.clear()
        alive_ids = sorted(p.player_id for p in state.players if p.alive)
        if alive_ids:
            later = [pid for pid in alive_ids if pid > player]
            if later:
                state.current_player = later[0]
            else:
                state.current_player = alive_ids[0]
                state.turn_number += 1
        events.append(
            GameEvent(
                EventKind.TURN_ENDED,
                {"player": player, "next_player": state.current_player, "turn_number": state.turn_number},
            )
        )
        return events

    def apply_effects(self, state: GameState, trigger: Trigger, subject: int) -> list[GameEvent]:
        """Fire every effect of the trigger whose condition holds for the subject
        unit, in declaration order. Stops once the subject is removed."""
        events: list[GameEvent] = []
        for effect, target_tile_id in self._effects[trigger]:
            unit = state.units.get(subject)
            if unit is None:
                break
            if effect.condition is Condition.STANDING_ON_TILE:
                if state.board.tile_at(unit.position) != target_tile_id:
                    continue
            events.append(GameEvent(EventKind.EFFECT_FIRED, {"effect": effect.name, "unit_id": subject}))
            if effect.effect_type is EffectType.DAMAGE:
                self._damage(state, unit, effect.amount, events)
            elif effect.effect_type is EffectType.HEAL:
                self._heal(state, unit, effect.amount, events)
            else:  # Death
                self._remove_unit(state, unit, events)
        return events

    def _damage(self, state: GameState, unit: Unit, amount: int, events: list[GameEvent]) -> None:
        unit.health -= amount
        events.append(
            GameEvent(EventKind.UNIT_DAMAGED, {"unit_id": unit.unit_id, "amount": amount, "health": unit.health})
        )
        if unit.health <= 0:
            self._remove_unit(state, unit, events)

    def _heal(self, state: GameState, unit: Unit, amount: int, events: list[GameEvent]) -> None:
        cap = self._unit_types[unit.type].health
        healed = min(amount, cap - unit.health)
        if healed > 0:
            unit.health += healed
            events.append(
                GameEvent(EventKind.UNIT_HEALED, {"unit_id": unit.unit_id, "amount": healed, "health": unit.health})
            )

    def _remove_unit(self, state: GameState, unit: Unit, events: list[GameEvent]) -> None:
        del state.units[unit.unit_id]
        del state.occupied[unit.position]
        events.append(GameEvent(EventKind.UNIT_DIED, {"unit_id": unit.unit_id, "position": unit.position}))
        owner = state.player(unit.owner)
        owner.alive = any(u.owner == unit.owner for u in state.units.values())

    # ------------------------------------------------------------------- win

    def check_win(self, state: GameState) -> WinStatus:
        if state.is_fogged:
            # Unit counts are incomplete under fog; the alive flags carry the
            # public elimination status from the true state.
            owners = {p.player_id for p in state.players if p.alive}
        else:
            owners = {u.owner for u in state.units.values()}
        if len(owners) == 1:
            return WinStatus(True, next(iter(owners)))
        if not owners:
            return DRAW
        return ONGOING

    # ------------------------------------------------------------------- fog

    def visible_tiles(self, state: GameState, player: int) -> set[Coord]:
        """Union of the player's units' Manhattan sight balls, clipped to the board."""
        board = state.board
        out: set[Coord] = set()
        for unit in state.units.values():
            if unit.owner != player:
                continue
            r = self._unit_types[unit.type].line_of_sight_range
            px, py = unit.position
            for dy in range(-r, r + 1):
                y = py + dy
                if not 0 <= y < board.height:
                    continue
                span = r - abs(dy)
                for x in range(max(0, px - span), min(board.width - 1, px + span) + 1):
                    out.add(Coord(x, y))
        return out

    def observe(self, state: GameState, player: int) -> GameState:
        """Fogged snapshot for the player: unseen tiles become the default tile,
        unseen units vanish, own units always remain; hidden information
        (the rng stream) is zeroed."""
        if state.is_fogged:
            raise FogError("state is already a fogged observation")
        visible = self.visible_tiles(state, player)
        obs = clone_state(state)
        obs.is_fogged = True
        obs.observer = player
        obs.rng_state = 0
        board = obs.board
        for idx in range(len(board.tiles)):
            if Coord(idx % board.width, idx // board.width) not in visible:
                board.tiles[idx] = self._default_tile
        hidden = [u for u in obs.units.values() if u.owner != player and u.position not in visible]
        for unit in hidden:
            del obs.units[unit.unit_id]
            del obs.occupied[unit.position]
        return obs

    def complete_observation(self, obs: GameState, bias: CompletionBias, seed: int) -> GameState:
        """Sample a full state consistent with a fogged observation.

        Hidden tiles are drawn uniformly from the declared tile types; hidden
        enemy units appear on sampled-walkable hidden cells with probability
        bias.unit_presence_probability each, capped so no enemy exceeds its
        initial deployment count minus its currently visible units. The
        visible region is preserved bit-exactly and the result is a full
        (unfogged) state. Deterministic for a given (obs, bias, seed).
        """
        if not obs.is_fogged or obs.observer is None:
            raise FogError("completion requires a fogged observation")
        rng = random.Random(seed)
        visible = self.visible_tiles(obs, obs.observer)
        out = clone_state(obs)
        out.is_fogged = False
        out.observer = None
        out.rng_state = splitmix64(seed & 0xFFFFFFFFFFFFFFFF)

        visible_counts: dict[int, int] = {}
        for u in obs.units.values():
            visible_counts[u.owner] = visible_counts.get(u.owner, 0) + 1
        budgets = {
            p.player_id: max(0, p.initial_units - visible_counts.get(p.player_id, 0))
            for p in obs.players
            if p.player_id != obs.observer
        }
        next_id = max(out.units, default=-1) + 1
        board = out.board
        n_tiles = len(self.config.tile_types)
        n_types = len(self._unit_types)
        p = bias.unit_presence_probability
        for idx in range(len(board.tiles)):
            c = Coord(idx % board.width, idx // board.width)
            if c in visible:
                continue
            tile = rng.randrange(n_tiles)
            board.tiles[idx] = tile
            if p > 0.0 and self._walkable[tile]:
                candidates = sorted(pid for pid, left in budgets.items() if left > 0)
                if candidates and rng.random() < p:
                    owner = candidates[0] if len(candidates) == 1 else rng.choice(candidates)
                    utype = self._unit_types[rng.randrange(n_types)]
                    out.units[next_id] = Unit(
                        unit_id=next_id, owner=owner, type=utype.id, position=c, health=utype.health
                    )
                    out.occupied[c] = next_id
                    budgets[owner] -= 1
                    next_id += 1
        for player in out.players:
            player.alive = any(u.owner == player.player_id for u in out.units.values())
        return out

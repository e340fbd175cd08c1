"""Pure-data domain types and cheap queries over them.

Everything here is a data container: boards, units, players, actions and
whole game states. No game rules live in this module; all mutation happens
in :mod:`stratagem.forward`. States can be cloned and fingerprinted for
deterministic replay checking.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from enum import IntEnum
from typing import NamedTuple, Optional


class Coord(NamedTuple):
    """Board coordinate: x is the column (left to right), y the row (top down)."""

    x: int
    y: int


class ActionCategory(IntEnum):
    # Numeric order doubles as the deterministic sort order of action spaces.
    MOVE = 0
    ATTACK = 1
    HEAL = 2
    END_TURN = 3

    @classmethod
    def parse(cls, name: str) -> "ActionCategory":
        try:
            return _CATEGORY_BY_NAME[name]
        except KeyError:
            raise ValueError(f"unknown action category {name!r}") from None

    @property
    def label(self) -> str:
        return _CATEGORY_LABELS[self]


_CATEGORY_LABELS = {
    ActionCategory.MOVE: "Move",
    ActionCategory.ATTACK: "Attack",
    ActionCategory.HEAL: "Heal",
    ActionCategory.END_TURN: "EndTurn",
}
_CATEGORY_BY_NAME = {label: cat for cat, label in _CATEGORY_LABELS.items()}


@dataclass(frozen=True)
class TileType:
    id: int
    name: str
    symbol: str
    walkable: bool
    is_default: bool = False


@dataclass(frozen=True)
class UnitType:
    id: int
    name: str
    health: int
    attack_damage: int
    movement_range: int
    line_of_sight_range: int
    heal_amount: int
    actions: tuple[ActionCategory, ...]
    attack_range: int = 1
    heal_range: int = 1


@dataclass
class Board:
    width: int
    height: int
    tiles: list[int]  # row-major tile type ids, len == width * height

    def index(self, c: Coord) -> int:
        return c.y * self.width + c.x

    def tile_at(self, c: Coord) -> int:
        return self.tiles[c.y * self.width + c.x]


@dataclass(frozen=True)
class TypeTables:
    """Immutable per-game rule tables, shared (not cloned) between states."""

    tile_types: tuple[TileType, ...]
    unit_types: tuple[UnitType, ...]
    default_tile: int

    def tile(self, tile_id: int) -> TileType:
        return self.tile_types[tile_id]

    def unit_type(self, type_id: int) -> UnitType:
        return self.unit_types[type_id]


@dataclass
class Unit:
    unit_id: int
    owner: int
    type: int  # UnitType id
    position: Coord
    health: int
    spent_actions: set[ActionCategory] = field(default_factory=set)


@dataclass
class Player:
    player_id: int
    alive: bool = True
    initial_units: int = 0


@dataclass(frozen=True)
class Action:
    """(category, acting unit, target tile); unit and target absent for EndTurn."""

    category: ActionCategory
    unit_id: Optional[int] = None
    target: Optional[Coord] = None

    def __post_init__(self) -> None:
        if self.category is ActionCategory.END_TURN:
            if self.unit_id is not None or self.target is not None:
                raise ValueError("EndTurn carries no unit or target")
        elif self.unit_id is None or self.target is None:
            raise ValueError(f"{self.category.label} requires unit_id and target")


END_TURN = Action(ActionCategory.END_TURN)


@dataclass
class GameState:
    """Full snapshot of a game. A data container without behaviour.

    ``types`` is a shared immutable reference; everything else is owned by
    the state and deep-copied by :func:`clone_state`. ``observer`` is the
    viewing player for fogged snapshots and None for full states.
    """

    board: Board
    players: list[Player]
    units: dict[int, Unit]
    current_player: int
    turn_number: int
    rng_state: int
    types: TypeTables
    is_fogged: bool = False
    observer: Optional[int] = None
    occupied: dict[Coord, int] = field(default_factory=dict)  # position -> unit_id

    def player(self, player_id: int) -> Player:
        for p in self.players:
            if p.player_id == player_id:
                return p
        raise KeyError(f"unknown player {player_id}")


class QueryError(Exception):
    """Raised for invalid cheap queries (out-of-bounds lookups and the like)."""


def in_bounds(board: Board, c: Coord) -> bool:
    return 0 <= c.x < board.width and 0 <= c.y < board.height


def unit_at(state: GameState, c: Coord) -> Optional[Unit]:
    if not in_bounds(state.board, c):
        raise QueryError(f"coordinate {tuple(c)} outside {state.board.width}x{state.board.height} board")
    uid = state.occupied.get(c)
    return None if uid is None else state.units[uid]


def is_traversable(state: GameState, c: Coord) -> bool:
    """In bounds, walkable tile, and no unit standing on it."""
    if not in_bounds(state.board, c):
        return False
    if not state.types.tile_types[state.board.tile_at(c)].walkable:
        return False
    return c not in state.occupied


def clone_state(state: GameState) -> GameState:
    units = {
        uid: Unit(u.unit_id, u.owner, u.type, u.position, u.health, set(u.spent_actions))
        for uid, u in state.units.items()
    }
    return GameState(
        board=Board(state.board.width, state.board.height, list(state.board.tiles)),
        players=[Player(p.player_id, p.alive, p.initial_units) for p in state.players],
        units=units,
        current_player=state.current_player,
        turn_number=state.turn_number,
        rng_state=state.rng_state,
        types=state.types,
        is_fogged=state.is_fogged,
        observer=state.observer,
        occupied=dict(state.occupied),
    )


def fingerprint(state: GameState) -> int:
    """Stable 64-bit digest of the full state, equal iff states are field-wise equal.

    Covers board, units (sorted by id), players, current player, turn number,
    rng_state and fog flags. Stable across processes and platforms.
    """
    h = hashlib.blake2b(digest_size=8)
    pack = struct.pack
    h.update(pack("<iiq", state.board.width, state.board.height, len(state.board.tiles)))
    h.update(bytes(state.board.tiles))  # tile ids are small non-negative ints
    for uid in sorted(state.units):
        u = state.units[uid]
        h.update(pack("<iiiiiq", u.unit_id, u.owner, u.type, u.position.x, u.position.y, u.health))
        h.update(bytes(sorted(int(c) for c in u.spent_actions)))
        h.update(b"\xfe")
    for p in state.players:
        h.update(pack("<i?i", p.player_id, p.alive, p.initial_units))
    h.update(
        pack(
            "<iiQ?i",
            state.current_player,
            state.turn_number,
            state.rng_state & 0xFFFFFFFFFFFFFFFF,
            state.is_fogged,
            -1 if state.observer is None else state.observer,
        )
    )
    return int.from_bytes(h.digest(), "little")


def fingerprint_hex(state: GameState) -> str:
    return f"{fingerprint(state):016x}"


def splitmix64(seed: int) -> int:
    """One step of splitmix64; used to derive rng streams from user seeds."""
    z = (seed + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)

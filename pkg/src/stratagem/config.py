"""Game definitions: parsing, validation, canonical serialization, instantiation.

Games are described by a small YAML grammar (tile types, a manual board
layout, unit types, effects, a win condition, optional deployments). The
engine never needs rebuilding to change a game; everything rule-like is
data compiled by :mod:`stratagem.forward`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import yaml

from .model import (
    ActionCategory,
    Board,
    Coord,
    GameState,
    Player,
    TileType,
    TypeTables,
    Unit,
    UnitType,
    splitmix64,
)


class WinCondition(Enum):
    LAST_MAN_STANDING = "LastManStanding"


class EffectType(Enum):
    DAMAGE = "Damage"
    DEATH = "Death"
    HEAL = "Heal"


class Trigger(Enum):
    END_OF_TURN = "EndOfTurn"
    ENTER_TILE = "EnterTile"


class Condition(Enum):
    NONE = "None"
    STANDING_ON_TILE = "StandingOnTile"


@dataclass(frozen=True)
class EffectDef:
    name: str
    effect_type: EffectType
    trigger: Trigger
    condition: Condition = Condition.NONE
    target_tile: Optional[str] = None  # tile type name, required iff StandingOnTile
    amount: Optional[int] = None  # required iff Damage/Heal


@dataclass(frozen=True)
class Deployment:
    player: int
    unit_type: str
    position: Coord


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.path}: {self.message}"


def error(path: str, message: str) -> Diagnostic:
    return Diagnostic("error", path, message)


def warning(path: str, message: str) -> Diagnostic:
    return Diagnostic("warning", path, message)


@dataclass
class GameConfig:
    tile_types: list[TileType]
    board: Board
    unit_types: list[UnitType]
    win_condition: WinCondition
    effects: list[EffectDef]
    deployments: list[Deployment] = field(default_factory=list)
    partial_observability: bool = False

    def tile_by_name(self, name: str) -> Optional[TileType]:
        for t in self.tile_types:
            if t.name == name:
                return t
        return None

    def unit_type_by_name(self, name: str) -> Optional[UnitType]:
        for u in self.unit_types:
            if u.name == name:
                return u
        return None

    @property
    def default_tile(self) -> TileType:
        for t in self.tile_types:
            if t.is_default:
                return t
        raise ConfigError("config has no default tile")

    def type_tables(self) -> TypeTables:
        return TypeTables(tuple(self.tile_types), tuple(self.unit_types), self.default_tile.id)


class ConfigError(Exception):
    """Raised when an operation is attempted on an invalid configuration."""

    def __init__(self, message: str, diagnostics: Optional[list[Diagnostic]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


_TILE_KEYS = {"Symbol", "IsWalkable", "Default"}
_UNIT_KEYS = {
    "Health",
    "MovementRange",
    "LineOfSightRange",
    "AttackDamage",
    "HealAmount",
    "AttackRange",
    "HealRange",
    "Actions",
}
_EFFECT_KEYS = {"Type", "Trigger", "Condition", "TargetTile", "Amount"}
_TOP_KEYS = {"Tiles", "Board", "Units", "ForwardModel", "Deployments", "PartialObservability"}


def parse_board_layout(layout: str, tiles: list[TileType]) -> Board:
    """Build a board from a tile-map string.

    Rows may be separated by newlines or (after YAML folding) single spaces.
    Raises ValueError on ragged rows or symbols not declared by any tile type.
    """
    rows = layout.split()
    if not rows:
        raise ValueError("empty board layout")
    width = len(rows[0])
    by_symbol = {t.symbol: t.id for t in tiles}
    cells: list[int] = []
    for y, row in enumerate(rows):
        if len(row) != width:
            raise ValueError(f"ragged layout: row {y} has {len(row)} cells, expected {width}")
        for x, ch in enumerate(row):
            tid = by_symbol.get(ch)
            if tid is None:
                raise ValueError(f"unknown tile symbol {ch!r} at row {y} col {x}")
            cells.append(tid)
    return Board(width=width, height=len(rows), tiles=cells)


def _subpath(path: str, key: str) -> str:
    return f"{path}.{key}" if path else str(key)


def _require(mapping: dict, key: str, path: str, diags: list[Diagnostic], kind=None):
    if key not in mapping:
        diags.append(error(_subpath(path, key), "missing required key"))
        return None
    value = mapping[key]
    if kind is not None and (not isinstance(value, kind) or (kind is int and isinstance(value, bool))):
        diags.append(error(_subpath(path, key), f"expected {kind.__name__}, got {type(value).__name__}"))
        return None
    return value


def _warn_unknown(mapping: dict, known: set, path: str, diags: list[Diagnostic]) -> None:
    for key in mapping:
        if key not in known:
            diags.append(warning(_subpath(path, key), "unknown key ignored"))


def _req_int(mapping: dict, key: str, path: str, diags: list[Diagnostic], minimum: int) -> Optional[int]:
    value = _require(mapping, key, path, diags, int)
    if value is not None and value < minimum:
        diags.append(error(_subpath(path, key), f"must be >= {minimum}"))
        return None
    return value


def _opt_int(mapping: dict, key: str, path: str, diags: list[Diagnostic], default: int, minimum: int) -> int:
    if key not in mapping:
        return default
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, int):
        diags.append(error(_subpath(path, key), "expected integer"))
        return default
    if value < minimum:
        diags.append(error(_subpath(path, key), f"must be >= {minimum}"))
        return default
    return value


def parse_config(text: str) -> tuple[Optional[GameConfig], list[Diagnostic]]:
    """Parse and validate a game definition document.

    Returns the config (None when any error-severity diagnostic was raised)
    and the full list of diagnostics; unknown keys only warn.
    """
    diags: list[Diagnostic] = []
    try:
        doc = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f" at line {mark.line + 1} col {mark.column + 1}" if mark else ""
        return None, [error("", f"document syntax: {exc.problem}{where}")]
    except yaml.YAMLError as exc:
        return None, [error("", f"document syntax: {exc}")]
    if not isinstance(doc, dict):
        return None, [error("", "top level must be a mapping")]

    _warn_unknown(doc, _TOP_KEYS, "", diags)
    tile_types = _parse_tiles(doc, diags)
    board = _parse_board(doc, tile_types, diags)
    unit_types = _parse_units(doc, diags)
    win_condition, effects = _parse_forward_model(doc, diags)
    deployments = _parse_deployments(doc, diags)

    partial = doc.get("PartialObservability", False)
    if not isinstance(partial, bool):
        diags.append(error("PartialObservability", "expected boolean"))
        partial = False

    if board is None or not tile_types or not unit_types or win_condition is None:
        return None, _finish(diags)

    cfg = GameConfig(
        tile_types=tile_types,
        board=board,
        unit_types=unit_types,
        win_condition=win_condition,
        effects=effects,
        deployments=deployments,
        partial_observability=partial,
    )
    diags.extend(validate_config(cfg))
    diags = _finish(diags)
    if any(d.severity == "error" for d in diags):
        return None, diags
    return cfg, diags


def _finish(diags: list[Diagnostic]) -> list[Diagnostic]:
    unique = sorted(set(diags), key=lambda d: (d.path, d.severity, d.message))
    return unique


def _parse_tiles(doc: dict, diags: list[Diagnostic]) -> list[TileType]:
    tiles_doc = _require(doc, "Tiles", "", diags, dict)
    if tiles_doc is None:
        return []
    tile_types: list[TileType] = []
    explicit_default: list[str] = []
    seen_symbols: dict[str, str] = {}
    for i, (name, spec) in enumerate(tiles_doc.items()):
        path = f"Tiles.{name}"
        if not isinstance(spec, dict):
            diags.append(error(path, "expected a mapping"))
            continue
        _warn_unknown(spec, _TILE_KEYS, path, diags)
        symbol = _require(spec, "Symbol", path, diags, str)
        walkable = _require(spec, "IsWalkable", path, diags, bool)
        if symbol is not None and len(symbol) != 1:
            diags.append(error(f"{path}.Symbol", "symbol must be a single character"))
            symbol = None
        is_default = spec.get("Default", False)
        if not isinstance(is_default, bool):
            diags.append(error(f"{path}.Default", "expected boolean"))
            is_default = False
        if is_default:
            explicit_default.append(name)
        if symbol is None or walkable is None:
            continue
        if symbol in seen_symbols:
            diags.append(
                error(f"Tiles.{name}.Symbol", f"duplicate tile symbol {symbol!r} (also used by {seen_symbols[symbol]})")
            )
            continue
        seen_symbols[symbol] = str(name)
        tile_types.append(TileType(id=len(tile_types), name=str(name), symbol=symbol, walkable=walkable, is_default=is_default))
    if len(explicit_default) > 1:
        diags.append(error("Tiles", f"multiple tiles marked Default: {', '.join(explicit_default)}"))
    elif not explicit_default:
        # The fog placeholder defaults to the first declared walkable tile.
        for i, t in enumerate(tile_types):
            if t.walkable:
                tile_types[i] = replace(t, is_default=True)
                break
        else:
            if tile_types:
                diags.append(error("Tiles", "no walkable tile available as the fog default"))
    return tile_types


def _parse_board(doc: dict, tiles: list[TileType], diags: list[Diagnostic]) -> Optional[Board]:
    board_doc = _require(doc, "Board", "", diags, dict)
    if board_doc is None:
        return None
    _warn_unknown(board_doc, {"GenerationType", "Layout"}, "Board", diags)
    gen = _require(board_doc, "GenerationType", "Board", diags, str)
    if gen is not None and gen != "Manual":
        diags.append(error("Board.GenerationType", f"unsupported generation type {gen!r}"))
        return None
    layout = _require(board_doc, "Layout", "Board", diags, str)
    if layout is None or not tiles:
        return None
    try:
        return parse_board_layout(layout, tiles)
    except ValueError as exc:
        diags.append(error("Board.Layout", str(exc)))
        return None


def _parse_units(doc: dict, diags: list[Diagnostic]) -> list[UnitType]:
    units_doc = _require(doc, "Units", "", diags, dict)
    if units_doc is None:
        return []
    unit_types: list[UnitType] = []
    for name, spec in units_doc.items():
        path = f"Units.{name}"
        if not isinstance(spec, dict):
            diags.append(error(path, "expected a mapping"))
            continue
        _warn_unknown(spec, _UNIT_KEYS, path, diags)
        health = _req_int(spec, "Health", path, diags, minimum=1)
        movement = _req_int(spec, "MovementRange", path, diags, minimum=0)
        sight = _req_int(spec, "LineOfSightRange", path, diags, minimum=0)
        attack = _opt_int(spec, "AttackDamage", path, diags, default=0, minimum=0)
        heal = _opt_int(spec, "HealAmount", path, diags, default=0, minimum=0)
        attack_range = _opt_int(spec, "AttackRange", path, diags, default=1, minimum=1)
        heal_range = _opt_int(spec, "HealRange", path, diags, default=1, minimum=1)
        actions_doc = _require(spec, "Actions", path, diags, list)
        actions: list[ActionCategory] = []
        if actions_doc is not None:
            for entry in actions_doc:
                try:
                    cat = ActionCategory.parse(str(entry))
                except ValueError:
                    diags.append(error(f"{path}.Actions", f"unknown action {entry!r}"))
                    continue
                actions.append(cat)
        if health is None or movement is None or sight is None or actions_doc is None:
            continue
        unit_types.append(
            UnitType(
                id=len(unit_types),
                name=str(name),
                health=health,
                attack_damage=attack,
                movement_range=movement,
                line_of_sight_range=sight,
                heal_amount=heal,
                actions=tuple(actions),
                attack_range=attack_range,
                heal_range=heal_range,
            )
        )
    return unit_types


def _parse_forward_model(doc: dict, diags: list[Diagnostic]) -> tuple[Optional[WinCondition], list[EffectDef]]:
    fm_doc = _require(doc, "ForwardModel", "", diags, dict)
    if fm_doc is None:
        return None, []
    _warn_unknown(fm_doc, {"WinCondition", "Effects"}, "ForwardModel", diags)
    win = None
    win_doc = _require(fm_doc, "WinCondition", "ForwardModel", diags, str)
    if win_doc is not None:
        try:
            win = WinCondition(win_doc)
        except ValueError:
            diags.append(error("ForwardModel.WinCondition", f"unknown win condition {win_doc!r}"))
    effects: list[EffectDef] = []
    effects_doc = fm_doc.get("Effects", {})
    if effects_doc is None:
        effects_doc = {}
    if not isinstance(effects_doc, dict):
        diags.append(error("ForwardModel.Effects", "expected a mapping"))
        effects_doc = {}
    for name, spec in effects_doc.items():
        path = f"ForwardModel.Effects.{name}"
        if not isinstance(spec, dict):
            diags.append(error(path, "expected a mapping"))
            continue
        _warn_unknown(spec, _EFFECT_KEYS, path, diags)
        type_doc = _require(spec, "Type", path, diags, str)
        trigger_doc = _require(spec, "Trigger", path, diags, str)
        etype = trigger = None
        if type_doc is not None:
            try:
                etype = EffectType(type_doc)
            except ValueError:
                diags.append(error(f"{path}.Type", f"unknown effect type {type_doc!r}"))
        if trigger_doc is not None:
            try:
                trigger = Trigger(trigger_doc)
            except ValueError:
                diags.append(error(f"{path}.Trigger", f"unknown trigger {trigger_doc!r}"))
        cond_doc = spec.get("Condition", "None")
        if cond_doc is None:
            cond_doc = "None"
        try:
            condition = Condition(str(cond_doc))
        except ValueError:
            diags.append(error(f"{path}.Condition", f"unknown condition {cond_doc!r}"))
            condition = Condition.NONE
        target_tile = spec.get("TargetTile")
        amount = spec.get("Amount")
        if amount is not None and (isinstance(amount, bool) or not isinstance(amount, int)):
            diags.append(error(f"{path}.Amount", "expected integer"))
            amount = None
        if etype is None or trigger is None:
            continue
        effects.append(
            EffectDef(
                name=str(name),
                effect_type=etype,
                trigger=trigger,
                condition=condition,
                target_tile=None if target_tile is None else str(target_tile),
                amount=amount,
            )
        )
    return win, effects


def _parse_deployments(doc: dict, diags: list[Diagnostic]) -> list[Deployment]:
    deployments: list[Deployment] = []
    dep_doc = doc.get("Deployments", [])
    if dep_doc is None:
        dep_doc = []
    if not isinstance(dep_doc, list):
        diags.append(error("Deployments", "expected a list"))
        return []
    for i, entry in enumerate(dep_doc):
        path = f"Deployments[{i}]"
        if not isinstance(entry, dict):
            diags.append(error(path, "expected a mapping"))
            continue
        _warn_unknown(entry, {"Player", "Type", "Position"}, path, diags)
        player = _require(entry, "Player", path, diags, int)
        unit_type = _require(entry, "Type", path, diags, str)
        pos = _require(entry, "Position", path, diags, list)
        if pos is not None and (len(pos) != 2 or not all(isinstance(v, int) and not isinstance(v, bool) for v in pos)):
            diags.append(error(f"{path}.Position", "expected [x, y] integers"))
            pos = None
        if player is None or unit_type is None or pos is None:
            continue
        if isinstance(player, bool) or player < 0:
            diags.append(error(f"{path}.Player", "player id must be a non-negative integer"))
            continue
        deployments.append(Deployment(player=player, unit_type=unit_type, position=Coord(pos[0], pos[1])))
    return deployments


def validate_config(cfg: GameConfig) -> list[Diagnostic]:
    """Semantic invariant checks; empty result means the config is playable.

    Deterministic: diagnostics are sorted by key path.
    """
    diags: list[Diagnostic] = []

    symbols: dict[str, str] = {}
    for t in cfg.tile_types:
        if t.symbol in symbols:
            diags.append(error(f"Tiles.{t.name}.Symbol", f"duplicate tile symbol {t.symbol!r} (also used by {symbols[t.symbol]})"))
        else:
            symbols[t.symbol] = t.name
    defaults = [t for t in cfg.tile_types if t.is_default]
    if len(defaults) != 1:
        diags.append(error("Tiles", f"exactly one default tile required, found {len(defaults)}"))

    board = cfg.board
    if len(board.tiles) != board.width * board.height:
        diags.append(error("Board.Layout", "tile count does not match board dimensions"))
    for tid in board.tiles:
        if not 0 <= tid < len(cfg.tile_types):
            diags.append(error("Board.Layout", f"undeclared tile id {tid}"))
            break

    if not cfg.unit_types:
        diags.append(error("Units", "at least one unit type required"))
    names = set()
    for u in cfg.unit_types:
        path = f"Units.{u.name}"
        if u.name in names:
            diags.append(error(path, "duplicate unit type name"))
        names.add(u.name)
        if u.health <= 0:
            diags.append(error(f"{path}.Health", "health must be positive"))
        if not u.actions:
            diags.append(error(f"{path}.Actions", "at least one action required"))
        if ActionCategory.END_TURN in u.actions:
            diags.append(error(f"{path}.Actions", "EndTurn is a player action, not a unit action"))
        if (ActionCategory.HEAL in u.actions) != (u.heal_amount > 0):
            diags.append(error(f"{path}.HealAmount", "HealAmount must be positive exactly when Heal is listed"))

    tile_names = {t.name for t in cfg.tile_types}
    for e in cfg.effects:
        path = f"ForwardModel.Effects.{e.name}"
        if e.effect_type in (EffectType.DAMAGE, EffectType.HEAL):
            if e.amount is None or e.amount <= 0:
                diags.append(error(f"{path}.Amount", f"{e.effect_type.value} effects need a positive Amount"))
        elif e.amount is not None:
            diags.append(error(f"{path}.Amount", "Death effects take no Amount"))
        if e.condition is Condition.STANDING_ON_TILE:
            if e.target_tile is None:
                diags.append(error(f"{path}.TargetTile", "StandingOnTile requires a TargetTile"))
            elif e.target_tile not in tile_names:
                diags.append(error(f"{path}.TargetTile", f"undeclared tile type {e.target_tile!r}"))
        elif e.target_tile is not None:
            diags.append(error(f"{path}.TargetTile", "TargetTile is only valid with Condition: StandingOnTile"))

    unit_names = {u.name for u in cfg.unit_types}
    seen_positions: dict[Coord, int] = {}
    walk = {t.id: t.walkable for t in cfg.tile_types}
    for i, d in enumerate(cfg.deployments):
        path = f"Deployments[{i}]"
        if d.unit_type not in unit_names:
            diags.append(error(f"{path}.Type", f"undeclared unit type {d.unit_type!r}"))
        c = d.position
        if not (0 <= c.x < board.width and 0 <= c.y < board.height):
            diags.append(error(f"{path}.Position", f"position {tuple(c)} out of bounds"))
        elif not walk.get(board.tile_at(c), False):
            diags.append(error(f"{path}.Position", "deployment on non-walkable tile"))
        elif c in seen_positions:
            diags.append(error(f"{path}.Position", f"position {tuple(c)} already used by deployment {seen_positions[c]}"))
        else:
            seen_positions[c] = i

    return sorted(set(diags), key=lambda d: (d.path, d.severity, d.message))


def default_deployments(cfg: GameConfig, players: int = 2) -> list[Deployment]:
    """Symmetric fallback placement for configs without a Deployments section.

    One unit of the first declared type per player, at the first and last
    walkable cells in row-major order (spread evenly for more players).
    """
    if not cfg.unit_types:
        return []
    walkable = [
        Coord(i % cfg.board.width, i // cfg.board.width)
        for i, tid in enumerate(cfg.board.tiles)
        if cfg.tile_types[tid].walkable
    ]
    if len(walkable) < players:
        return []
    type_name = cfg.unit_types[0].name
    if players == 2:
        picks = [walkable[0], walkable[-1]]
    else:
        step = (len(walkable) - 1) / max(players - 1, 1)
        picks = [walkable[round(i * step)] for i in range(players)]
    return [Deployment(player=p, unit_type=type_name, position=c) for p, c in enumerate(picks)]


def instantiate_state(cfg: GameConfig, seed: int, deployments: Optional[list[Deployment]] = None) -> GameState:
    """Build the initial state for a validated config.

    Units are placed per the deployments (config's own list by default, or
    the fallback placement) at full health; player order follows ascending
    player id. Deterministic: same (config, seed) gives the same fingerprint.
    """
    diags = validate_config(cfg)
    errors = [d for d in diags if d.severity == "error"]
    if errors:
        raise ConfigError("config has validation errors", errors)
    deps = deployments if deployments is not None else cfg.deployments
    if not deps:
        deps = default_deployments(cfg)
    player_ids = sorted({d.player for d in deps})
    if len(player_ids) < 2:
        raise ConfigError("at least two players required")

    types = cfg.type_tables()
    board = Board(cfg.board.width, cfg.board.height, list(cfg.board.tiles))
    units: dict[int, Unit] = {}
    occupied: dict[Coord, int] = {}
    counts = {p: 0 for p in player_ids}
    for i, d in enumerate(deps):
        ut = cfg.unit_type_by_name(d.unit_type)
        if ut is None:
            raise ConfigError(f"deployment {i} references unknown unit type {d.unit_type!r}")
        if d.position in occupied:
            raise ConfigError(f"deployment {i} position {tuple(d.position)} already occupied")
        if not (0 <= d.position.x < board.width and 0 <= d.position.y < board.height):
            raise ConfigError(f"deployment {i} position {tuple(d.position)} out of bounds")
        if not cfg.tile_types[board.tile_at(d.position)].walkable:
            raise ConfigError(f"deployment {i} position {tuple(d.position)} is not walkable")
        units[i] = Unit(unit_id=i, owner=d.player, type=ut.id, position=d.position, health=ut.health)
        occupied[d.position] = i
        counts[d.player] += 1

    players = [Player(player_id=p, alive=True, initial_units=counts[p]) for p in player_ids]
    return GameState(
        board=board,
        players=players,
        units=units,
        current_player=player_ids[0],
        turn_number=0,
        rng_state=splitmix64(seed & 0xFFFFFFFFFFFFFFFF),
        types=types,
        occupied=occupied,
    )


def _yscalar(s: str) -> str:
    """Emit a string scalar, quoting whenever plain YAML would not read it
    back as the same string (digits, booleans-in-disguise, punctuation)."""
    try:
        if isinstance(yaml.safe_load(s), str) and yaml.safe_load(s) == s and "\n" not in s:
            return s
    except yaml.YAMLError:
        pass
    escaped = s.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def serialize_config(cfg: GameConfig) -> str:
    """Canonical document emission: parse(serialize(cfg)) equals cfg and two
    serializations of equal configs are byte-identical."""
    lines: list[str] = []
    lines.append("Tiles:")
    for t in cfg.tile_types:
        lines.append(f"    {_yscalar(t.name)}:")
        lines.append(f"        Symbol: {_yscalar(t.symbol)}")
        lines.append(f"        IsWalkable: {'true' if t.walkable else 'false'}")
        if t.is_default:
            lines.append("        Default: true")
    lines.append("")
    lines.append("Board:")
    lines.append("    GenerationType: Manual")
    lines.append("    Layout: |")
    symbol = {t.id: t.symbol for t in cfg.tile_types}
    for y in range(cfg.board.height):
        row = "".join(symbol[cfg.board.tiles[y * cfg.board.width + x]] for x in range(cfg.board.width))
        lines.append(f"        {row}")
    lines.append("")
    lines.append("Units:")
    for u in cfg.unit_types:
        lines.append(f"    {_yscalar(u.name)}:")
        lines.append(f"        Health: {u.health}")
        lines.append(f"        MovementRange: {u.movement_range}")
        lines.append(f"        LineOfSightRange: {u.line_of_sight_range}")
        if u.attack_damage:
            lines.append(f"        AttackDamage: {u.attack_damage}")
        if u.heal_amount:
            lines.append(f"        HealAmount: {u.heal_amount}")
        if u.attack_range != 1:
            lines.append(f"        AttackRange: {u.attack_range}")
        if u.heal_range != 1:
            lines.append(f"        HealRange: {u.heal_range}")
        lines.append(f"        Actions: [{', '.join(a.label for a in u.actions)}]")
    lines.append("")
    lines.append("ForwardModel:")
    lines.append(f"    WinCondition: {cfg.win_condition.value}")
    if cfg.effects:
        lines.append("    Effects:")
        for e in cfg.effects:
            lines.append(f"        {_yscalar(e.name)}:")
            lines.append(f"            Type: {e.effect_type.value}")
            lines.append(f"            Trigger: {e.trigger.value}")
            lines.append(f"            Condition: {e.condition.value}")
            if e.target_tile is not None:
                lines.append(f"            TargetTile: {_yscalar(e.target_tile)}")
            if e.amount is not None:
                lines.append(f"            Amount: {e.amount}")
    if cfg.deployments:
        lines.append("")
        lines.append("Deployments:")
        for d in cfg.deployments:
            lines.append(f"    - Player: {d.player}")
            lines.append(f"      Type: {_yscalar(d.unit_type)}")
            lines.append(f"      Position: [{d.position.x}, {d.position.y}]")
    if cfg.partial_observability:
        lines.append("")
        lines.append("PartialObservability: true")
    return "\n".join(lines) + "\n"


def load_config(path: str) -> tuple[Optional[GameConfig], list[Diagnostic]]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())

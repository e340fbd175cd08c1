from __future__ import annotations

import random
from pathlib import Path

import pytest

from stratagem.config import GameConfig, instantiate_state, load_config, parse_config
from stratagem.forward import ForwardModel
from stratagem.model import ActionCategory, GameState

ROOT = Path(__file__).resolve().parent.parent
EXAMPLES = ROOT / "examples"

PAPER_YAML = EXAMPLES / "paper.yaml"
DUEL_YAML = EXAMPLES / "duel.yaml"
TRAP_YAML = EXAMPLES / "trap.yaml"
FOGDUEL_YAML = EXAMPLES / "fogduel.yaml"


def load(path: Path) -> GameConfig:
    cfg, diags = load_config(str(path))
    assert cfg is not None, f"{path} failed to parse: {diags}"
    return cfg


@pytest.fixture(scope="session")
def paper_cfg() -> GameConfig:
    return load(PAPER_YAML)


@pytest.fixture(scope="session")
def duel_cfg() -> GameConfig:
    return load(DUEL_YAML)


@pytest.fixture(scope="session")
def trap_cfg() -> GameConfig:
    return load(TRAP_YAML)


@pytest.fixture(scope="session")
def fogduel_cfg() -> GameConfig:
    return load(FOGDUEL_YAML)


# ------------------------------------------------------------------ scenarios

_SCENARIO_TILES = """
Tiles:
    Plain:
        Symbol: p
        IsWalkable: true
    Wall:
        Symbol: w
        IsWalkable: false
    Mud:
        Symbol: m
        IsWalkable: true
"""

_SCENARIO_UNITS = """
Units:
    Knight:
        Health: 30
        MovementRange: {m0}
        LineOfSightRange: {s0}
        AttackDamage: 10
        Actions: [Attack, Move]
    Medic:
        Health: 20
        MovementRange: {m1}
        LineOfSightRange: {s1}
        HealAmount: 5
        Actions: [Heal, Move]
    Sniper:
        Health: 15
        MovementRange: {m2}
        LineOfSightRange: {s2}
        AttackDamage: 8
        AttackRange: 2
        HealRange: 1
        Actions: [Attack, Move]
"""


def random_scenario(rng: random.Random, max_w: int = 5, max_h: int = 5, max_units: int = 3) -> GameState:
    """Random small scenario built through the config machinery: random board,
    up to max_units units over two players, random damage/spent/current player.
    Always returns an ongoing state."""
    while True:
        w = rng.randint(2, max_w)
        h = rng.randint(2, max_h)
        rows = []
        for _ in range(h):
            rows.append("".join(rng.choice("ppmw") for _ in range(w)))
        layout = "\n".join("        " + row for row in rows)
        doc = (
            _SCENARIO_TILES
            + f"\nBoard:\n    GenerationType: Manual\n    Layout: |\n{layout}\n"
            + _SCENARIO_UNITS.format(
                m0=rng.randint(0, 3), m1=rng.randint(1, 4), m2=rng.randint(0, 2),
                s0=rng.randint(0, 4), s1=rng.randint(1, 3), s2=rng.randint(2, 5),
            )
            + "\nForwardModel:\n    WinCondition: LastManStanding\n"
        )
        cfg, diags = parse_config(doc)
        assert cfg is not None, diags
        walkable = [
            (i % w, i // w)
            for i, tid in enumerate(cfg.board.tiles)
            if cfg.tile_types[tid].walkable
        ]
        n_units = rng.randint(2, max_units)
        if len(walkable) < n_units:
            continue
        cells = rng.sample(walkable, n_units)
        types = ["Knight", "Medic", "Sniper"]
        from stratagem.config import Deployment
        from stratagem.model import Coord

        deployments = []
        for i, cell in enumerate(cells):
            owner = i % 2 if n_units >= 2 else 0
            deployments.append(Deployment(owner, rng.choice(types), Coord(*cell)))
        if len({d.player for d in deployments}) < 2:
            continue
        state = instantiate_state(cfg, rng.getrandbits(32), deployments)
        for unit in state.units.values():
            cap = state.types.unit_type(unit.type).health
            unit.health = rng.randint(1, cap)
            for cat in (ActionCategory.MOVE, ActionCategory.ATTACK, ActionCategory.HEAL):
                if cat in state.types.unit_type(unit.type).actions and rng.random() < 0.25:
                    unit.spent_actions.add(cat)
        state.current_player = rng.choice(sorted({u.owner for u in state.units.values()}))
        fm = ForwardModel(cfg)
        if fm.check_win(state).over:
            continue
        state._scenario_fm = fm  # handy back-reference for tests
        return state


def scenario_model(state: GameState) -> ForwardModel:
    return state._scenario_fm

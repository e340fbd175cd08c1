"""Turn-based strategy game engine: config-defined games, a trigger/effect
forward model, fog-of-war with belief completion, and forward-planning agents."""

from .agents import (
    Agent,
    AgentContext,
    Budget,
    BudgetedModel,
    ScoreParams,
    build_agent,
    evaluate_state,
)
from .config import (
    ConfigError,
    Deployment,
    Diagnostic,
    EffectDef,
    GameConfig,
    WinCondition,
    default_deployments,
    instantiate_state,
    load_config,
    parse_board_layout,
    parse_config,
    serialize_config,
    validate_config,
)
from .forward import (
    ActionSpace,
    CompletionBias,
    ForwardModel,
    GameEvent,
    InapplicableActionError,
    TerminalStateError,
    WinStatus,
)
from .model import (
    Action,
    ActionCategory,
    Board,
    Coord,
    END_TURN,
    GameState,
    Player,
    TileType,
    Unit,
    UnitType,
    clone_state,
    fingerprint,
    fingerprint_hex,
    in_bounds,
    is_traversable,
    unit_at,
)
from .runner import (
    EXTERNAL,
    GameResult,
    Replay,
    ReplayDivergenceError,
    Session,
    Standings,
    replay_game,
    run_arena,
    run_game,
)

__version__ = "0.1.0"

"""Decision policies: trivial baselines, a rule-based combat policy, and the
forward-planning searchers (one-step look-ahead, flat Monte Carlo, open-loop
MCTS, rolling-horizon evolution).

Every agent is a pure function of (observation, rng seed, parameters): the
runner hands each decision a private observation, a budget-counting forward
model and a seeded rng. Budgets are measured in forward-model advance calls
so tournament results are machine-independent.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from typing import Optional

from .forward import ActionSpace, CompletionBias, ForwardModel
from .model import Action, ActionCategory, END_TURN, GameState, clone_state

WIN_SCORE = 1e9
SIGMOID_SCALE = 0.01  # logistic squash applied to score deltas before backprop
DETERMINIZE_P = 0.05  # mildly pessimistic hidden-unit presence when planning under fog


@dataclass(frozen=True)
class ScoreParams:
    w_own_units: float = 200.0
    w_enemy_units: float = 200.0
    w_own_health: float = 1.0
    w_enemy_health: float = 1.0
    w_distance: float = 1.0


@dataclass(frozen=True)
class Budget:
    """Decision budget: forward calls are the primary bound, wall clock a safety net."""

    max_forward_calls: Optional[int] = None
    max_millis: Optional[float] = None

    def __post_init__(self) -> None:
        if self.max_forward_calls is None and self.max_millis is None:
            raise ValueError("budget needs at least one bound")


class BudgetedModel:
    """Forward-model handle that counts advance calls against a budget."""

    def __init__(self, fm: ForwardModel, budget: Budget):
        self.fm = fm
        self.budget = budget
        self.calls = 0
        self._deadline = None if budget.max_millis is None else time.monotonic() + budget.max_millis / 1000.0

    def advance(self, state: GameState, action: Action, checked: bool = True):
        self.calls += 1
        return self.fm.advance(state, action, checked)

    def exhausted(self) -> bool:
        cap = self.budget.max_forward_calls
        if cap is not None and self.calls >= cap:
            return True
        return self._deadline is not None and time.monotonic() > self._deadline

    def remaining(self) -> Optional[int]:
        cap = self.budget.max_forward_calls
        return None if cap is None else max(0, cap - self.calls)

    def __getattr__(self, name):
        return getattr(self.fm, name)


@dataclass
class AgentContext:
    player: int
    observation: GameState  # private copy, fogged if the game runs under fog
    model: BudgetedModel
    rng: random.Random
    budget: Budget


def evaluate_state(state: GameState, player: int, params: ScoreParams) -> float:
    """Linear scoring over unit counts, health sums and closeness to enemies;
    terminal states collapse to +/-1e9 (win/loss) or 0 (draw)."""
    owners = {u.owner for u in state.units.values()}
    if not owners:
        return 0.0
    if player not in owners:
        return -WIN_SCORE
    if len(owners) == 1:
        return WIN_SCORE
    own_units = 0
    enemy_units = 0
    own_health = 0
    enemy_health = 0
    own_positions = []
    enemy_positions = []
    for u in state.units.values():
        if u.owner == player:
            own_units += 1
            own_health += u.health
            own_positions.append(u.position)
        else:
            enemy_units += 1
            enemy_health += u.health
            enemy_positions.append(u.position)
    score = (
        params.w_own_units * own_units
        - params.w_enemy_units * enemy_units
        + params.w_own_health * own_health
        - params.w_enemy_health * enemy_health
    )
    if params.w_distance and own_positions and enemy_positions:
        total = 0
        for p in own_positions:
            total += min(abs(p.x - q.x) + abs(p.y - q.y) for q in enemy_positions)
        score -= params.w_distance * (total / len(own_positions))
    return score


def _squash(delta: float) -> float:
    z = SIGMOID_SCALE * delta
    if z >= 36.0:
        return 1.0
    if z <= -36.0:
        return 0.0
    return 1.0 / (1.0 + math.exp(-z))


def planning_state(ctx: AgentContext) -> GameState:
    """State the searchers plan on: the observation itself, or under fog a
    single determinized completion (retrying a few seeds if the sample came
    out terminal, then falling back to the raw observation)."""
    obs = ctx.observation
    if not obs.is_fogged:
        return obs
    bias = CompletionBias(DETERMINIZE_P)
    for _ in range(5):
        sample = ctx.model.complete_observation(obs, bias, ctx.rng.getrandbits(63))
        if not ctx.model.check_win(sample).over:
            return sample
    return obs


def random_playout(model: BudgetedModel, state: GameState, depth: int, rng: random.Random) -> None:
    """Uniform-random continuation, in place, until depth/terminal/budget."""
    for _ in range(depth):
        if model.exhausted() or model.check_win(state).over:
            return
        space = model.generate_actions(state)
        model.advance(state, rng.choice(space.actions), checked=False)


# ------------------------------------------------------------------ baselines


def act_do_nothing(ctx: AgentContext) -> Action:
    return END_TURN


def act_random(ctx: AgentContext) -> Action:
    space = ctx.model.generate_actions(ctx.observation)
    return ctx.rng.choice(space.actions)


def act_rule_based_combat(ctx: AgentContext) -> Action:
    """Heal the badly wounded, take kills, otherwise trade damage, otherwise
    close the distance; ties resolve in action-space order."""
    state = planning_state(ctx)
    model = ctx.model
    space = model.generate_actions(state)
    types = state.types

    best_heal = None
    worst_health = None
    for a in space:
        if a.category is ActionCategory.HEAL:
            target = state.units[state.occupied[a.target]]
            if 2 * target.health < types.unit_type(target.type).health:
                if worst_health is None or target.health < worst_health:
                    best_heal, worst_health = a, target.health
    if best_heal is not None:
        return best_heal

    best_kill = None
    best_overkill = None
    best_attack = None
    best_damage = None
    for a in space:
        if a.category is ActionCategory.ATTACK:
            attacker = state.units[a.unit_id]
            damage = types.unit_type(attacker.type).attack_damage
            target = state.units[state.occupied[a.target]]
            if damage >= target.health:
                overkill = damage - target.health
                if best_overkill is None or overkill > best_overkill:
                    best_kill, best_overkill = a, overkill
            if best_damage is None or damage > best_damage:
                best_attack, best_damage = a, damage
    if best_kill is not None:
        return best_kill
    if best_attack is not None:
        return best_attack

    enemies = [u.position for u in state.units.values() if u.owner != state.current_player]
    if enemies:
        def nearest(c) -> int:
            return min(abs(c.x - e.x) + abs(c.y - e.y) for e in enemies)

        movers = [a for a in space if a.category is ActionCategory.MOVE]
        chosen_unit = None
        unit_dist = None
        for a in movers:
            d = nearest(state.units[a.unit_id].position)
            if unit_dist is None or d < unit_dist:
                chosen_unit, unit_dist = a.unit_id, d
        best_move = None
        move_dist = None
        for a in movers:
            if a.unit_id != chosen_unit:
                continue
            d = nearest(a.target)
            if move_dist is None or d < move_dist:
                best_move, move_dist = a, d
        if best_move is not None:
            return best_move
    return END_TURN


# ------------------------------------------------------------------ searchers


def act_osla(ctx: AgentContext, params: ScoreParams) -> Action:
    """Greedy one-step look-ahead: argmax of the score after each single action."""
    state = planning_state(ctx)
    space = ctx.model.generate_actions(state)
    best = END_TURN
    best_score = -math.inf
    for a in space:
        if ctx.model.exhausted():
            break
        successor = clone_state(state)
        ctx.model.advance(successor, a, checked=False)
        score = evaluate_state(successor, ctx.player, params)
        if score > best_score:
            best, best_score = a, score
    return best


def act_mc(ctx: AgentContext, params: ScoreParams, rollout_depth: int = 10, redeterminize: bool = False) -> Action:
    """Flat Monte Carlo: cycle root actions, random playout after each, pick
    the best mean score."""
    state = planning_state(ctx)
    space = ctx.model.generate_actions(state)
    actions = space.actions
    n = len(actions)
    sums = [0.0] * n
    visits = [0] * n
    resample = redeterminize and ctx.observation.is_fogged
    i = 0
    max_iterations = 20 * (ctx.budget.max_forward_calls or 10_000) + 1_000
    while not ctx.model.exhausted() and i < max_iterations:
        base = planning_state(ctx) if resample else state
        idx = i % n
        i += 1
        successor = clone_state(base)
        if resample and not ctx.model.is_applicable(successor, actions[idx]):
            # the fresh belief sample contradicts this root action; score the
            # sample as-is rather than corrupting it with a forced advance
            sums[idx] += evaluate_state(successor, ctx.player, params)
            visits[idx] += 1
            continue
        ctx.model.advance(successor, actions[idx], checked=False)
        random_playout(ctx.model, successor, rollout_depth, ctx.rng)
        sums[idx] += evaluate_state(successor, ctx.player, params)
        visits[idx] += 1
    best, best_mean = END_TURN, -math.inf
    for idx in range(n):
        if visits[idx] == 0:
            continue
        mean = sums[idx] / visits[idx]
        if mean > best_mean:
            best, best_mean = actions[idx], mean
    return best


class _Node:
    __slots__ = ("player", "actions", "children", "visits", "value_sum", "total", "terminal_value")

    def __init__(self, player: int, actions: list[Action], terminal_value: Optional[float] = None):
        self.player = player
        self.actions = actions
        self.children: list[Optional[_Node]] = [None] * len(actions)
        self.visits = [0] * len(actions)
        self.value_sum = [0.0] * len(actions)
        self.total = 0
        self.terminal_value = terminal_value


def act_mcts(
    ctx: AgentContext,
    params: ScoreParams,
    c_ucb: float = 1.414,
    rollout_depth: int = 10,
    redeterminize: bool = False,
) -> Action:
    """Open-loop MCTS: UCB1 selection (opponent edges minimize), one expansion
    per iteration, uniform rollout, backprop of the logistic-squashed score
    delta. Recommends the most-visited root action (ties: best mean, then
    first expanded). Root children are first screened once with a zero-length
    rollout so cheap budgets still spot one-step wins."""
    me = ctx.player
    model = ctx.model
    base = planning_state(ctx)
    root_score = evaluate_state(base, me, params)
    root_actions = model.generate_actions(base).actions
    root = _Node(base.current_player, root_actions)

    def leaf_value(state: GameState) -> float:
        return _squash(evaluate_state(state, me, params) - root_score)

    def make_child(state: GameState) -> _Node:
        if model.check_win(state).over:
            return _Node(state.current_player, [], terminal_value=leaf_value(state))
        return _Node(state.current_player, model.generate_actions(state).actions)

    def backprop(path: list[tuple[_Node, int]], value: float) -> None:
        for node, idx in path:
            node.total += 1
            node.visits[idx] += 1
            node.value_sum[idx] += value

    # Root screening pass: one advance per root action, no rollout.
    for idx in range(len(root_actions)):
        if model.exhausted():
            break
        state = clone_state(base)
        model.advance(state, root_actions[idx], checked=False)
        child = make_child(state)
        root.children[idx] = child
        value = child.terminal_value if child.terminal_value is not None else leaf_value(state)
        backprop([(root, idx)], value)

    # Redeterminized iterations replan on fresh samples, so tree actions may
    # no longer apply and must be guarded.
    resample = redeterminize and ctx.observation.is_fogged
    # Visits to terminal children cost no advance calls; the iteration cap
    # keeps degenerate parameterizations (c_ucb=0 on a solved root) finite.
    iterations = 0
    max_iterations = 20 * (ctx.budget.max_forward_calls or 10_000) + 1_000
    while not model.exhausted() and iterations < max_iterations:
        iterations += 1
        if resample:
            base = planning_state(ctx)
        state = clone_state(base)
        node = root
        path: list[tuple[_Node, int]] = []
        value: Optional[float] = None
        while True:
            untried = next((i for i, ch in enumerate(node.children) if ch is None), None)
            if untried is not None:
                if model.exhausted():
                    break
                if resample and not model.is_applicable(state, node.actions[untried]):
                    path.append((node, untried))
                    node.children[untried] = make_child(state)
                    value = leaf_value(state)
                    break
                model.advance(state, node.actions[untried], checked=False)
                child = make_child(state)
                node.children[untried] = child
                path.append((node, untried))
                if child.terminal_value is not None:
                    value = child.terminal_value
                else:
                    random_playout(model, state, rollout_depth, ctx.rng)
                    value = leaf_value(state)
                break
            if not node.actions:
                value = node.terminal_value
                break
            idx = _ucb_pick(node, me, c_ucb)
            child = node.children[idx]
            path.append((node, idx))
            if child.terminal_value is not None:
                value = child.terminal_value
                break
            if model.exhausted():
                break
            if resample and not model.is_applicable(state, node.actions[idx]):
                value = leaf_value(state)
                break
            model.advance(state, node.actions[idx], checked=False)
            node = child
        if value is None:
            break  # budget ran out mid-descent
        backprop(path, value)

    best_idx = 0
    best_key = (-1, -math.inf)
    for idx in range(len(root_actions)):
        visits = root.visits[idx]
        mean = root.value_sum[idx] / visits if visits else -math.inf
        if (visits, mean) > best_key:
            best_key = (visits, mean)
            best_idx = idx
    return root_actions[best_idx]


def _ucb_pick(node: _Node, me: int, c_ucb: float) -> int:
    log_total = math.log(node.total)
    best_idx = 0
    best = -math.inf
    minimizing = node.player != me
    for idx in range(len(node.actions)):
        n = node.visits[idx]
        mean = node.value_sum[idx] / n
        if minimizing:
            mean = 1.0 - mean
        ucb = mean + c_ucb * math.sqrt(log_total / n)
        if ucb > best:
            best = ucb
            best_idx = idx
    return best_idx


def act_rhea(
    ctx: AgentContext,
    params: ScoreParams,
    pop_size: int = 20,
    horizon: int = 10,
    generations: Optional[int] = None,
    mutation_rate: float = 0.1,
    shift_buffer: Optional[list[int]] = None,
) -> Action:
    action, _ = rhea_search(ctx, params, pop_size, horizon, generations, mutation_rate, shift_buffer)
    return action


def rhea_search(
    ctx: AgentContext,
    params: ScoreParams,
    pop_size: int,
    horizon: int,
    generations: Optional[int],
    mutation_rate: float,
    shift_buffer: Optional[list[int]] = None,
) -> tuple[Action, list[int]]:
    """Evolve fixed-length sequences of own-action indices; opponents play
    uniformly at random during decoding; inapplicable genes are redrawn in
    place (repair). Returns the first action of the final best sequence and
    the sequence itself (for the next decision's shift buffer)."""
    me = ctx.player
    model = ctx.model
    rng = ctx.rng
    base = planning_state(ctx)
    root_n = len(model.generate_actions(base).actions)
    alphabet = max(root_n, 1)
    step_cap = horizon * 8  # guards decode against long random opponent turns

    def decode(genome: list[int]) -> float:
        state = clone_state(base)
        gi = 0
        steps = 0
        while gi < horizon and steps < step_cap:
            if model.exhausted() or model.check_win(state).over:
                break
            space = model.generate_actions(state)
            if state.current_player == me:
                idx = genome[gi]
                if idx >= len(space.actions):
                    idx = rng.randrange(len(space.actions))
                    genome[gi] = idx
                action = space.actions[idx]
                gi += 1
            else:
                action = rng.choice(space.actions)
            model.advance(state, action, checked=False)
            steps += 1
        return evaluate_state(state, me, params)

    population: list[list[int]] = []
    if shift_buffer is not None and len(shift_buffer) == horizon:
        population.append(shift_buffer[1:] + [rng.randrange(alphabet)])
    offset = len(population)
    while len(population) < pop_size:
        i = len(population) - offset
        genome = [i % alphabet] + [rng.randrange(alphabet) for _ in range(horizon - 1)]
        population.append(genome)
    fitness = [decode(g) for g in population]

    # Keep enough budget back for the champion-verification resamples below.
    reserve = min(6 * step_cap, (ctx.budget.max_forward_calls or 0) // 3)

    def budget_left_for_evolution() -> bool:
        if model.exhausted():
            return False
        left = model.remaining()
        return left is None or left > reserve

    gen = 0
    while budget_left_for_evolution():
        if generations is not None and gen >= generations:
            break
        order = sorted(range(len(population)), key=lambda i: fitness[i], reverse=True)
        elite = list(population[order[0]])
        next_pop = [elite]
        # Re-score the carried elite: decoding is stochastic (random opponent),
        # so a genome that got one lucky sample must keep earning its seat.
        next_fit = [decode(elite)]
        def pick_parent() -> list[int]:
            i = rng.randrange(len(population))
            j = rng.randrange(len(population))
            return population[i] if fitness[i] >= fitness[j] else population[j]

        while len(next_pop) < pop_size and budget_left_for_evolution():
            a = pick_parent()
            b = pick_parent()
            child = [a[g] if rng.random() < 0.5 else b[g] for g in range(horizon)]
            for g in range(horizon):
                if rng.random() < mutation_rate:
                    child[g] = rng.randrange(alphabet)
            next_fit.append(decode(child))
            next_pop.append(child)
        population, fitness = next_pop, next_fit
        gen += 1

    # Champion verification: decoding is a single noisy sample, so the winner
    # must hold its score under two resamples (scored by the minimum) before
    # its first action is played. Demoted champions hand over to the runner-up.
    verified: set[int] = set()
    while not model.exhausted():
        best_idx = max(range(len(population)), key=lambda i: fitness[i])
        if best_idx in verified:
            break
        verified.add(best_idx)
        champion = population[best_idx]
        fitness[best_idx] = min(fitness[best_idx], decode(champion), decode(champion))
    best_idx = max(range(len(population)), key=lambda i: fitness[i])
    best = population[best_idx]
    root_space = model.generate_actions(base).actions
    first = best[0] if best[0] < len(root_space) else 0
    return root_space[first], best


# ------------------------------------------------------------------- registry


class AgentSpecError(ValueError):
    """Raised for unknown agent names or malformed/unknown parameters."""


class Agent:
    """Stateful per-game wrapper around the act_* policies.

    Instances carry their own seeded rng (consumed across decisions) and any
    cross-decision state such as the RHEA shift buffer; build one per seat
    per game.
    """

    name = "agent"

    def __init__(self, seed: int = 0):
        self.rng = random.Random(seed)
        self.budget_override: Optional[int] = None

    def reset(self) -> None:
        pass

    def act(self, ctx: AgentContext) -> Action:
        raise NotImplementedError


class DoNothingAgent(Agent):
    name = "donothing"

    def act(self, ctx: AgentContext) -> Action:
        return act_do_nothing(ctx)


class RandomAgent(Agent):
    name = "random"

    def act(self, ctx: AgentContext) -> Action:
        return act_random(ctx)


class RuleBasedCombatAgent(Agent):
    name = "rulebased"

    def act(self, ctx: AgentContext) -> Action:
        return act_rule_based_combat(ctx)


class OslaAgent(Agent):
    name = "osla"

    def __init__(self, seed: int = 0, params: Optional[ScoreParams] = None):
        super().__init__(seed)
        self.params = params or ScoreParams()

    def act(self, ctx: AgentContext) -> Action:
        return act_osla(ctx, self.params)


class McAgent(Agent):
    name = "mc"

    def __init__(self, seed: int = 0, params: Optional[ScoreParams] = None, rollout_depth: int = 10,
                 redeterminize: bool = False):
        super().__init__(seed)
        self.params = params or ScoreParams()
        self.rollout_depth = rollout_depth
        self.redeterminize = redeterminize

    def act(self, ctx: AgentContext) -> Action:
        return act_mc(ctx, self.params, self.rollout_depth, self.redeterminize)


class MctsAgent(Agent):
    name = "mcts"

    def __init__(self, seed: int = 0, params: Optional[ScoreParams] = None, c_ucb: float = 1.414,
                 rollout_depth: int = 10, redeterminize: bool = False):
        super().__init__(seed)
        self.params = params or ScoreParams()
        self.c_ucb = c_ucb
        self.rollout_depth = rollout_depth
        self.redeterminize = redeterminize

    def act(self, ctx: AgentContext) -> Action:
        return act_mcts(ctx, self.params, self.c_ucb, self.rollout_depth, self.redeterminize)


class RheaAgent(Agent):
    name = "rhea"

    def __init__(self, seed: int = 0, params: Optional[ScoreParams] = None, pop_size: int = 20,
                 horizon: int = 10, generations: Optional[int] = None, mutation_rate: float = 0.1):
        super().__init__(seed)
        self.params = params or ScoreParams()
        self.pop_size = pop_size
        self.horizon = horizon
        self.generations = generations
        self.mutation_rate = mutation_rate
        self._buffer: Optional[list[int]] = None

    def reset(self) -> None:
        self._buffer = None

    def act(self, ctx: AgentContext) -> Action:
        action, best = rhea_search(
            ctx, self.params, self.pop_size, self.horizon, self.generations, self.mutation_rate, self._buffer
        )
        self._buffer = best
        return action


AGENT_NAMES = ("donothing", "random", "rulebased", "osla", "mc", "mcts", "rhea")

_WEIGHT_KEYS = {
    "w_own_units": "w_own_units",
    "w_enemy_units": "w_enemy_units",
    "w_own_health": "w_own_health",
    "w_enemy_health": "w_enemy_health",
    "w_distance": "w_distance",
}


def parse_agent_spec(spec: str) -> tuple[str, dict[str, str]]:
    """Split 'name[:key=val,...]' into the agent name and raw parameter map."""
    name, _, rest = spec.partition(":")
    name = name.strip()
    if name not in AGENT_NAMES:
        raise AgentSpecError(f"unknown agent {name!r}")
    kwargs: dict[str, str] = {}
    if rest:
        for item in rest.split(","):
            key, sep, value = item.partition("=")
            if not sep or not key.strip():
                raise AgentSpecError(f"malformed parameter {item!r} in {spec!r}")
            kwargs[key.strip()] = value.strip()
    return name, kwargs


def _pop_float(kwargs: dict[str, str], key: str, default: float) -> float:
    if key not in kwargs:
        return default
    try:
        return float(kwargs.pop(key))
    except ValueError:
        raise AgentSpecError(f"parameter {key} expects a number") from None


def _pop_int(kwargs: dict[str, str], key: str, default: Optional[int]) -> Optional[int]:
    if key not in kwargs:
        return default
    try:
        return int(kwargs.pop(key))
    except ValueError:
        raise AgentSpecError(f"parameter {key} expects an integer") from None


def _pop_bool(kwargs: dict[str, str], key: str, default: bool) -> bool:
    if key not in kwargs:
        return default
    value = kwargs.pop(key).lower()
    if value in ("true", "1", "yes"):
        return True
    if value in ("false", "0", "no"):
        return False
    raise AgentSpecError(f"parameter {key} expects true/false")


def _pop_params(kwargs: dict[str, str]) -> ScoreParams:
    defaults = ScoreParams()
    values = {field: _pop_float(kwargs, key, getattr(defaults, field)) for key, field in _WEIGHT_KEYS.items()}
    return ScoreParams(**values)


def build_agent(spec: str, seed: int = 0) -> Agent:
    """Instantiate an agent from its CLI spec string; unknown keys are errors."""
    name, kwargs = parse_agent_spec(spec)
    budget = _pop_int(kwargs, "budget", None)
    agent: Agent
    if name == "donothing":
        agent = DoNothingAgent(seed)
    elif name == "random":
        agent = RandomAgent(seed)
    elif name == "rulebased":
        agent = RuleBasedCombatAgent(seed)
    elif name == "osla":
        agent = OslaAgent(seed, _pop_params(kwargs))
    elif name == "mc":
        agent = McAgent(seed, _pop_params(kwargs), rollout_depth=_pop_int(kwargs, "depth", 10),
                        redeterminize=_pop_bool(kwargs, "redeterminize", False))
    elif name == "mcts":
        agent = MctsAgent(seed, _pop_params(kwargs), c_ucb=_pop_float(kwargs, "c", 1.414),
                          rollout_depth=_pop_int(kwargs, "depth", 10),
                          redeterminize=_pop_bool(kwargs, "redeterminize", False))
    else:
        agent = RheaAgent(seed, _pop_params(kwargs), pop_size=_pop_int(kwargs, "pop", 20),
                          horizon=_pop_int(kwargs, "horizon", 10),
                          generations=_pop_int(kwargs, "generations", None),
                          mutation_rate=_pop_float(kwargs, "mutation", 0.1))
    if kwargs:
        raise AgentSpecError(f"unknown parameter(s) for {name}: {', '.join(sorted(kwargs))}")
    agent.budget_override = budget
    return agent

from __future__ import annotations

import math
import random

import pytest

from stratagem.config import Deployment, instantiate_state, parse_config
from stratagem.forward import (
    CompletionBias,
    FogError,
    ForwardModel,
    InapplicableActionError,
    TerminalStateError,
    Trigger,
)
from stratagem.forward import EventKind
from stratagem.model import (
    Action,
    ActionCategory,
    Coord,
    END_TURN,
    clone_state,
    fingerprint,
)

from conftest import random_scenario, scenario_model
from oracles import bf_action_space, bf_reachable, bf_visible


def duel_state(duel_cfg, deployments=None, seed=0):
    return instantiate_state(duel_cfg, seed, deployments)


class TestReachableTiles:
    def test_reference_board_matches_oracle(self, duel_cfg):
        fm = ForwardModel(duel_cfg)
        state = duel_state(duel_cfg)
        assert fm.reachable_tiles(state, 0) == bf_reachable(state, 0)

    def test_movement_zero_is_empty(self, trap_cfg):
        fm = ForwardModel(trap_cfg)
        state = instantiate_state(trap_cfg, 0)
        blocker = next(u for u in state.units.values() if state.types.unit_type(u.type).movement_range == 0)
        assert fm.reachable_tiles(state, blocker.unit_id) == set()

    def test_enclosed_unit_is_stuck(self, trap_cfg):
        fm = ForwardModel(trap_cfg)
        state = instantiate_state(trap_cfg, 0)
        bruiser = state.units[2]  # walled in behind the blocker
        assert fm.reachable_tiles(state, bruiser.unit_id) == set()

    def test_random_scenarios_match_oracle(self):
        rng = random.Random(5)
        for _ in range(40):
            state = random_scenario(rng)
            fm = scenario_model(state)
            for uid in state.units:
                assert fm.reachable_tiles(state, uid) == bf_reachable(state, uid), uid


class TestGenerateActions:
    def test_lone_warrior_moves_plus_endturn(self, duel_cfg):
        # enemy far out of attack range: every action is a reachable move, plus EndTurn
        fm = ForwardModel(duel_cfg)
        state = duel_state(duel_cfg)
        space = fm.generate_actions(state)
        reach = bf_reachable(state, 0)
        moves = [a for a in space if a.category is ActionCategory.MOVE]
        assert {a.target for a in moves} == reach
        assert all(a.category is not ActionCategory.ATTACK for a in space.actions[:-1])
        assert space.actions[-1] == END_TURN

    def test_adjacent_enemy_single_attack(self, duel_cfg):
        deps = [Deployment(0, "Warrior", Coord(1, 1)), Deployment(1, "Warrior", Coord(2, 1))]
        fm = ForwardModel(duel_cfg)
        state = duel_state(duel_cfg, deps)
        attacks = [a for a in fm.generate_actions(state) if a.category is ActionCategory.ATTACK]
        assert attacks == [Action(ActionCategory.ATTACK, 0, Coord(2, 1))]

    def test_all_spent_leaves_endturn(self, duel_cfg):
        fm = ForwardModel(duel_cfg)
        state = duel_state(duel_cfg)
        for unit in state.units.values():
            unit.spent_actions.update(state.types.unit_type(unit.type).actions)
        assert fm.generate_actions(state).actions == [END_TURN]

    def test_terminal_state_raises(self, duel_cfg):
        fm = ForwardModel(duel_cfg)
        state = duel_state(duel_cfg)
        dead = state.units[1]
        del state.units[1]
        del state.occupied[dead.position]
        with pytest.raises(TerminalStateError):
            fm.generate_actions(state)

    def test_matches_brute_force_on_random_scenarios(self):
        rng = random.Random(6)
        for _ in range(40):
            state = random_scenario(rng)
            fm = scenario_model(state)
            assert fm.generate_actions(state).actions == bf_action_space(state)


class TestApplicability:
    def test_generated_actions_all_applicable(self, duel_cfg):
        fm = ForwardModel(duel_cfg)
        state = duel_state(duel_cfg)
        for action in fm.generate_actions(state):
            assert fm.is_applicable(state, action)

    def test_move_stale_after_moving(self, duel_cfg):
        fm = ForwardModel(duel_cfg)
        state = duel_state(duel_cfg)
        move = Action(ActionCategory.MOVE, 0, Coord(2, 1))
        assert fm.is_applicable(state, move)
        fm.advance(state, move)
        assert not fm.is_applicable(state, Action(ActionCategory.MOVE, 0, Coord(3, 1)))

    def test_attack_empty_tile(self, duel_cfg):
        fm = ForwardModel(duel_cfg)
        state = duel_state(duel_cfg)
        assert not fm.is_applicable(state, Action(ActionCategory.ATTACK, 0, Coord(2, 1)))

    def test_soundness_over_random_playouts(self):
        rng = random.Random(9)
        for _ in range(15):
            state = random_scenario(rng)
            fm = scenario_model(state)
            for _ in range(40):
                if fm.check_win(state).over:
                    break
                space = fm.generate_actions(state)
                for action in space:
                    assert fm.is_applicable(state, action), action
                fm.advance(state, rng.choice(space.actions))


class TestAdvance:
    def test_attack_damage_arithmetic(self, paper_cfg):
        deps = [Deployment(0, "Warrior", Coord(1, 1)), Deployment(1, "Healer", Coord(2, 1))]
        fm = ForwardModel(paper_cfg)
        state = instantiate_state(paper_cfg, 0, deps)
        events = fm.advance(state, Action(ActionCategory.ATTACK, 0, Coord(2, 1)))
        assert state.units[1].health == 20
        assert [e.kind for e in events] == [EventKind.UNIT_DAMAGED]

    def test_healer_dies_on_fourth_own_tick(self, paper_cfg):
        deps = [Deployment(0, "Healer", Coord(1, 1)), Deployment(1, "Warrior", Coord(3, 4))]
        fm = ForwardModel(paper_cfg)
        state = instantiate_state(paper_cfg, 0, deps)
        for tick in range(1, 4):
            events = fm.advance(state, END_TURN)
            assert state.units[0].health == 40 - 10 * tick
            assert not any(e.kind is EventKind.UNIT_DIED for e in events)
            fm.advance(state, END_TURN)  # opponent's turn back to us
        events = fm.advance(state, END_TURN)  # 4th own tick
        assert 0 not in state.units
        kinds = [e.kind for e in events]
        assert EventKind.UNIT_DIED in kinds and EventKind.GAME_OVER in kinds

    def test_move_onto_hole_dies(self, paper_cfg):
        deps = [Deployment(0, "Warrior", Coord(3, 1)), Deployment(1, "Warrior", Coord(1, 4))]
        fm = ForwardModel(paper_cfg)
        state = instantiate_state(paper_cfg, 0, deps)
        events = fm.advance(state, Action(ActionCategory.MOVE, 0, Coord(3, 2)))
        kinds = [e.kind for e in events]
        assert kinds[0] is EventKind.UNIT_MOVED
        assert EventKind.EFFECT_FIRED in kinds and EventKind.UNIT_DIED in kinds
        assert any(e.kind is EventKind.EFFECT_FIRED and e.payload["effect"] == "DeadlyHole" for e in events)
        assert 0 not in state.units
        assert Coord(3, 2) not in state.occupied

    def test_checked_rejection_leaves_state_untouched(self, duel_cfg):
        fm = ForwardModel(duel_cfg)
        state = duel_state(duel_cfg)
        before = fingerprint(state)
        with pytest.raises(InapplicableActionError):
            fm.advance(state, Action(ActionCategory.ATTACK, 0, Coord(2, 1)), checked=True)
        assert fingerprint(state) == before

    def test_heal_capped_at_type_max(self, paper_cfg):
        deps = [Deployment(0, "Healer", Coord(1, 1)), Deployment(0, "Warrior", Coord(2, 1)),
                Deployment(1, "Warrior", Coord(3, 4))]
        fm = ForwardModel(paper_cfg)
        state = instantiate_state(paper_cfg, 0, deps)
        state.units[1].health = 95
        events = fm.advance(state, Action(ActionCategory.HEAL, 0, Coord(2, 1)))
        assert state.units[1].health == 100
        healed = [e for e in events if e.kind is EventKind.UNIT_HEALED]
        assert healed and healed[0].payload["amount"] == 5

    def test_end_turn_clears_spent_and_rotates(self, duel_cfg):
        fm = ForwardModel(duel_cfg)
        state = duel_state(duel_cfg)
        fm.advance(state, Action(ActionCategory.MOVE, 0, Coord(2, 1)))
        assert ActionCategory.MOVE in state.units[0].spent_actions
        events = fm.advance(state, END_TURN)
        assert state.current_player == 1
        assert state.turn_number == 0
        assert not state.units[0].spent_actions
        fm.advance(state, END_TURN)
        assert state.current_player == 0
        assert state.turn_number == 1  # wrapped to the lowest alive id
        assert any(e.kind is EventKind.TURN_ENDED for e in events)

    def test_end_of_turn_effects_hit_only_the_ending_player(self, duel_cfg):
        fm = ForwardModel(duel_cfg)
        state = duel_state(duel_cfg)
        fm.advance(state, END_TURN)
        assert state.units[0].health == 90
        assert state.units[1].health == 100

    def test_checked_unchecked_equivalence(self):
        rng = random.Random(13)
        for _ in range(15):
            state = random_scenario(rng)
            fm = scenario_model(state)
            for _ in range(30):
                if fm.check_win(state).over:
                    break
                action = rng.choice(fm.generate_actions(state).actions)
                checked = clone_state(state)
                unchecked = clone_state(state)
                fm.advance(checked, action, checked=True)
                fm.advance(unchecked, action, checked=False)
                assert fingerprint(checked) == fingerprint(unchecked)
                state = checked

    def test_advance_determinism(self):
        rng = random.Random(14)
        state = random_scenario(rng)
        fm = scenario_model(state)
        actions = []
        probe = clone_state(state)
        for _ in range(25):
            if fm.check_win(probe).over:
                break
            action = rng.choice(fm.generate_actions(probe).actions)
            actions.append(action)
            fm.advance(probe, action)
        replayed = clone_state(state)
        for action in actions:
            fm.advance(replayed, action)
        assert fingerprint(replayed) == fingerprint(probe)


class TestApplyEffects:
    def test_end_of_turn_damage_on_full_health(self, paper_cfg, duel_cfg):
        fm = ForwardModel(duel_cfg)
        state = duel_state(duel_cfg)
        events = fm.apply_effects(state, Trigger.END_OF_TURN, 0)
        assert state.units[0].health == 90
        assert [e.kind for e in events] == [EventKind.EFFECT_FIRED, EventKind.UNIT_DAMAGED]

    def test_enter_tile_on_wrong_tile_is_silent(self, duel_cfg):
        fm = ForwardModel(duel_cfg)
        state = duel_state(duel_cfg)  # warrior on Swamp
        assert fm.apply_effects(state, Trigger.ENTER_TILE, 0) == []

    def test_death_effect_frees_occupancy(self, paper_cfg):
        deps = [Deployment(0, "Warrior", Coord(3, 1)), Deployment(1, "Warrior", Coord(1, 4))]
        fm = ForwardModel(paper_cfg)
        state = instantiate_state(paper_cfg, 0, deps)
        # put the warrior onto the hole manually, then fire the trigger
        del state.occupied[Coord(3, 1)]
        state.units[0].position = Coord(3, 2)
        state.occupied[Coord(3, 2)] = 0
        fm.apply_effects(state, Trigger.ENTER_TILE, 0)
        assert 0 not in state.units
        assert Coord(3, 2) not in state.occupied


class TestCheckWin:
    def test_winner_when_single_owner(self, duel_cfg):
        fm = ForwardModel(duel_cfg)
        state = duel_state(duel_cfg)
        dead = state.units[1]
        del state.units[1]
        del state.occupied[dead.position]
        status = fm.check_win(state)
        assert status.over and status.winner == 0

    def test_ongoing_with_both_players(self, duel_cfg):
        fm = ForwardModel(duel_cfg)
        assert not fm.check_win(duel_state(duel_cfg)).over

    def test_draw_when_no_units_remain(self, duel_cfg):
        # Unreachable through play under per-player end-of-turn effects, but the
        # win condition must still classify a fully-eliminated board as a draw.
        fm = ForwardModel(duel_cfg)
        state = duel_state(duel_cfg)
        state.units.clear()
        state.occupied.clear()
        status = fm.check_win(state)
        assert status.over and status.is_draw


class TestVisibility:
    def test_manhattan_ball_enumeration(self, fogduel_cfg):
        fm = ForwardModel(fogduel_cfg)
        deps = [Deployment(0, "Warrior", Coord(2, 2)), Deployment(1, "Warrior", Coord(7, 5))]
        state = instantiate_state(fogduel_cfg, 0, deps)
        visible = fm.visible_tiles(state, 0)
        board = state.board
        expected = {
            Coord(x, y)
            for y in range(board.height)
            for x in range(board.width)
            if abs(x - 2) + abs(y - 2) <= 2
        }
        assert visible == expected
        assert visible == bf_visible(state, 0)

    def test_los_zero_sees_own_cell(self):
        cfg, _ = parse_config(
            "Tiles:\n  T:\n    Symbol: t\n    IsWalkable: true\n"
            "Board:\n  GenerationType: Manual\n  Layout: |\n    ttt\n    ttt\n"
            "Units:\n  Blind:\n    Health: 5\n    MovementRange: 1\n    LineOfSightRange: 0\n    Actions: [Move]\n"
            "ForwardModel:\n  WinCondition: LastManStanding\n"
        )
        fm = ForwardModel(cfg)
        state = instantiate_state(cfg, 0, [Deployment(0, "Blind", Coord(1, 0)), Deployment(1, "Blind", Coord(2, 1))])
        assert fm.visible_tiles(state, 0) == {Coord(1, 0)}

    def test_no_units_sees_nothing(self, duel_cfg):
        fm = ForwardModel(duel_cfg)
        state = duel_state(duel_cfg)
        assert fm.visible_tiles(state, 7) == set()

    def test_random_scenarios_match_oracle(self):
        rng = random.Random(31)
        for _ in range(30):
            state = random_scenario(rng)
            fm = scenario_model(state)
            for player in {u.owner for u in state.units.values()}:
                assert fm.visible_tiles(state, player) == bf_visible(state, player)


class TestObserve:
    def _fog_state(self, fogduel_cfg, enemy_at, seed=0):
        deps = [Deployment(0, "Warrior", Coord(1, 1)), Deployment(1, "Warrior", enemy_at)]
        return instantiate_state(fogduel_cfg, seed, deps)

    def test_enemy_beyond_sight_absent(self, fogduel_cfg):
        fm = ForwardModel(fogduel_cfg)
        state = self._fog_state(fogduel_cfg, Coord(4, 3))  # distance 5, LoS 2... anything > 2
        obs = fm.observe(state, 0)
        assert all(u.owner == 0 for u in obs.units.values())

    def test_enemy_at_exact_boundary_visible(self, fogduel_cfg):
        fm = ForwardModel(fogduel_cfg)
        state = self._fog_state(fogduel_cfg, Coord(3, 1))  # distance 2 == LoS
        obs = fm.observe(state, 0)
        assert any(u.owner == 1 for u in obs.units.values())

    def test_hole_outside_vision_reads_default(self, fogduel_cfg):
        fm = ForwardModel(fogduel_cfg)
        state = self._fog_state(fogduel_cfg, Coord(7, 5))
        obs = fm.observe(state, 0)
        symbols = {t.id: t.symbol for t in obs.types.tile_types}
        assert symbols[obs.board.tile_at(Coord(6, 2))] == "S"  # truly a Hole
        assert symbols[state.board.tile_at(Coord(6, 2))] == "H"

    def test_flags_and_rng(self, fogduel_cfg):
        fm = ForwardModel(fogduel_cfg)
        state = self._fog_state(fogduel_cfg, Coord(7, 5))
        obs = fm.observe(state, 0)
        assert obs.is_fogged and obs.observer == 0
        assert obs.rng_state == 0
        assert not state.is_fogged

    def test_double_fog_is_error(self, fogduel_cfg):
        fm = ForwardModel(fogduel_cfg)
        obs = fm.observe(self._fog_state(fogduel_cfg, Coord(7, 5)), 0)
        with pytest.raises(FogError):
            fm.observe(obs, 0)

    def test_no_enemy_leak_on_random_states(self):
        rng = random.Random(77)
        for _ in range(60):
            state = random_scenario(rng)
            fm = scenario_model(state)
            for player in {u.owner for u in state.units.values()}:
                visible = bf_visible(state, player)
                obs = fm.observe(state, player)
                for unit in obs.units.values():
                    if unit.owner != player:
                        assert unit.position in visible


def _stats_config():
    rows = "\n".join("        " + "g" * 12 for _ in range(8))
    doc = (
        "Tiles:\n    Grass:\n        Symbol: g\n        IsWalkable: true\n"
        "    Dirt:\n        Symbol: d\n        IsWalkable: true\n"
        f"Board:\n    GenerationType: Manual\n    Layout: |\n{rows}\n"
        "Units:\n    Scout:\n        Health: 10\n        MovementRange: 2\n        LineOfSightRange: 2\n"
        "        AttackDamage: 2\n        Actions: [Attack, Move]\n"
        "ForwardModel:\n    WinCondition: LastManStanding\n"
    )
    cfg, diags = parse_config(doc)
    assert cfg is not None, diags
    deps = [Deployment(0, "Scout", Coord(0, 0))]
    cells = [Coord(x, y) for y in range(5, 8) for x in range(12)][:20]
    deps.extend(Deployment(1, "Scout", c) for c in cells)
    return cfg, deps


class TestCompleteObservation:
    def _obs(self):
        cfg, deps = _stats_config()
        fm = ForwardModel(cfg)
        state = instantiate_state(cfg, 0, deps)
        return fm, fm.observe(state, 0)

    def test_zero_bias_samples_no_units(self):
        fm, obs = self._obs()
        full = fm.complete_observation(obs, CompletionBias(0.0), seed=5)
        assert len(full.units) == len(obs.units)
        assert not full.is_fogged and full.observer is None

    def test_deterministic_given_seed(self):
        fm, obs = self._obs()
        a = fm.complete_observation(obs, CompletionBias(0.25), seed=42)
        b = fm.complete_observation(obs, CompletionBias(0.25), seed=42)
        c = fm.complete_observation(obs, CompletionBias(0.25), seed=43)
        assert fingerprint(a) == fingerprint(b)
        assert fingerprint(a) != fingerprint(c)

    def test_visible_region_bit_identical(self):
        fm, obs = self._obs()
        full = fm.complete_observation(obs, CompletionBias(0.3), seed=9)
        visible = fm.visible_tiles(obs, 0)
        w = obs.board.width
        for c in visible:
            assert full.board.tiles[c.y * w + c.x] == obs.board.tiles[c.y * w + c.x]
        for unit in obs.units.values():
            twin = full.units[unit.unit_id]
            assert (twin.position, twin.health, twin.owner) == (unit.position, unit.health, unit.owner)

    def test_budget_never_exceeds_hidden_force_size(self):
        fm, obs = self._obs()
        for seed in range(30):
            full = fm.complete_observation(obs, CompletionBias(1.0), seed=seed)
            sampled = [u for u in full.units.values() if u.unit_id not in obs.units]
            assert len(sampled) == 20  # initial enemy force, none visible
            assert all(u.owner == 1 for u in sampled)

    def test_sampled_mean_tracks_binomial(self):
        fm, obs = self._obs()
        hidden_walkable = len(obs.board.tiles) - len(fm.visible_tiles(obs, 0))
        p = 0.1
        trials = 1000
        total = 0
        for seed in range(trials):
            full = fm.complete_observation(obs, CompletionBias(p), seed=seed)
            total += len(full.units) - len(obs.units)
        mean = total / trials
        expected = hidden_walkable * p
        sigma = math.sqrt(hidden_walkable * p * (1 - p) / trials)
        assert abs(mean - expected) <= 3 * sigma

    def test_requires_fogged_input(self):
        cfg, deps = _stats_config()
        fm = ForwardModel(cfg)
        state = instantiate_state(cfg, 0, deps)
        with pytest.raises(FogError):
            fm.complete_observation(state, CompletionBias(0.1), seed=0)

    def test_result_satisfies_invariants(self):
        fm, obs = self._obs()
        full = fm.complete_observation(obs, CompletionBias(0.4), seed=3)
        positions = [u.position for u in full.units.values()]
        assert len(positions) == len(set(positions))
        assert full.occupied == {u.position: u.unit_id for u in full.units.values()}
        for unit in full.units.values():
            assert full.types.tile_types[full.board.tile_at(unit.position)].walkable


class TestConservation:
    def test_unit_count_monotone_and_health_capped(self):
        rng = random.Random(55)
        for _ in range(15):
            state = random_scenario(rng)
            fm = scenario_model(state)
            count = len(state.units)
            for _ in range(50):
                if fm.check_win(state).over:
                    break
                fm.advance(state, rng.choice(fm.generate_actions(state).actions))
                assert len(state.units) <= count
                count = len(state.units)
                for unit in state.units.values():
                    assert unit.health <= state.types.unit_type(unit.type).health


class TestTermination:
    def test_damage_pressure_bounds_game_length(self, duel_cfg):
        # warrior-only duels must end within ceil(100/10) * players + 1 rounds
        fm = ForwardModel(duel_cfg)
        bound = math.ceil(100 / 10) * 2 + 1
        for seed in range(10):
            rng = random.Random(seed)
            state = instantiate_state(duel_cfg, seed)
            while not fm.check_win(state).over:
                assert state.turn_number <= bound
                fm.advance(state, rng.choice(fm.generate_actions(state).actions))

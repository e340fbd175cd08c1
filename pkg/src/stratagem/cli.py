"""Single executable fronting the engine.

Subcommands: validate, play, arena, serve, replay. Exit codes: 0 success,
1 domain failure (invalid config, divergent replay), 2 usage/IO error.
STRATAGEM_LOG={error,info,debug} controls stderr log verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import socket
import sys
from pathlib import Path
from typing import Optional

from .agents import AgentSpecError, Budget, build_agent
from .config import Deployment, GameConfig, load_config, parse_config
from .model import Coord
from .runner import (
    EXTERNAL,
    Replay,
    ReplayDivergenceError,
    Session,
    replay_game,
    run_arena,
    run_game,
)

log = logging.getLogger("stratagem.cli")

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2


def _setup_logging() -> None:
    level_name = os.environ.get("STRATAGEM_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    level = levels.get(level_name, logging.ERROR)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _load_config_or_exit(path: str) -> GameConfig:
    try:
        cfg, diags = load_config(path)
    except OSError as exc:
        print(f"error: cannot read {path}: {exc.strerror}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    for d in diags:
        if d.severity == "error":
            print(str(d), file=sys.stderr)
    if cfg is None:
        raise SystemExit(EXIT_DOMAIN)
    return cfg


def _parse_deploys(items: Optional[list[str]]) -> Optional[list[Deployment]]:
    if not items:
        return None
    deployments = []
    for item in items:
        try:
            player_part, _, rest = item.partition(":")
            type_name, _, pos = rest.partition("@")
            x, y = pos.split(",")
            deployments.append(Deployment(int(player_part), type_name.strip(), Coord(int(x), int(y))))
        except (ValueError, AttributeError):
            print(f"error: bad --deploy {item!r}; expected player:Type@x,y", file=sys.stderr)
            raise SystemExit(EXIT_USAGE)
    return deployments


def _build_agents_or_exit(specs: list[str]) -> None:
    """Validate agent specs up front so typos exit with usage errors."""
    for spec in specs:
        if spec == EXTERNAL:
            continue
        try:
            build_agent(spec)
        except AgentSpecError as exc:
            print(f"error: {exc}", file=sys.stderr)
            raise SystemExit(EXIT_USAGE)


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read {args.config}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE
    cfg, diags = parse_config(text)
    for d in diags:
        print(str(d), file=sys.stderr)
    return EXIT_OK if cfg is not None else EXIT_DOMAIN


def cmd_play(args: argparse.Namespace) -> int:
    cfg = _load_config_or_exit(args.config)
    specs = [s.strip() for s in args.agents.split(",") if s.strip()]
    if len(specs) < 2:
        print("error: --agents needs at least two comma-separated agent specs", file=sys.stderr)
        return EXIT_USAGE
    _build_agents_or_exit(specs)
    deployments = _parse_deploys(args.deploy)
    seats = {i: spec for i, spec in enumerate(specs)}
    fog = None if args.fog is None else args.fog
    result, replay = run_game(
        cfg,
        seats,
        seed=args.seed,
        budget=Budget(max_forward_calls=args.budget),
        fog=fog,
        max_turns=args.max_turns,
        deployments=deployments,
    )
    if args.replay_out:
        Path(args.replay_out).write_text(replay.to_text(), encoding="utf-8")
    if result.interrupted:
        print(f"interrupted turns={result.turns} seed={args.seed}", file=sys.stderr)
        return 130
    winner = "draw" if result.outcome.is_draw else str(result.winner)
    print(f"winner={winner} turns={result.turns} budget={args.budget} seed={args.seed}")
    return EXIT_OK


def cmd_arena(args: argparse.Namespace) -> int:
    from .report import format_standings, write_reports

    cfg = _load_config_or_exit(args.config)
    roster = [s.strip() for s in args.roster.split(",") if s.strip()]
    if len(roster) < 2:
        print("error: --roster needs at least two agents", file=sys.stderr)
        return EXIT_USAGE
    _build_agents_or_exit(roster)
    deployments = _parse_deploys(args.deploy)
    standings = run_arena(
        cfg,
        roster,
        games_per_pairing=args.games,
        base_seed=args.seed,
        budget=Budget(max_forward_calls=args.budget),
        fog=None if args.fog is None else args.fog,
        max_turns=args.max_turns,
        deployments=deployments,
    )
    print(format_standings(standings))
    if args.csv:
        paths = write_reports(standings, args.csv, figures=not args.no_figures)
        for p in paths:
            log.info("wrote %s", p)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import build_app

    cfg = _load_config_or_exit(args.config)
    human_seats = set()
    if args.human_seats:
        try:
            human_seats = {int(s) for s in args.human_seats.split(",") if s.strip()}
        except ValueError:
            print("error: --human-seats expects comma-separated player ids", file=sys.stderr)
            return EXIT_USAGE
    specs = [s.strip() for s in args.agents.split(",") if s.strip()] if args.agents else []
    _build_agents_or_exit(specs)
    deployments = _parse_deploys(args.deploy)

    # Probe the port first so a busy port is a usage error, not a stack trace.
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((args.host, args.port))
    except OSError as exc:
        print(f"error: cannot bind {args.host}:{args.port}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        probe.close()

    from .config import default_deployments, instantiate_state  # noqa: F401 (players derived below)

    deps = deployments if deployments is not None else (cfg.deployments or default_deployments(cfg))
    player_ids = sorted({d.player for d in deps})
    seats: dict[int, object] = {}
    spec_iter = iter(specs)
    for p in player_ids:
        if p in human_seats:
            seats[p] = EXTERNAL
        else:
            try:
                seats[p] = next(spec_iter)
            except StopIteration:
                print(f"error: no agent spec for player {p}; provide --agents or mark it human", file=sys.stderr)
                return EXIT_USAGE
    session = Session(
        cfg,
        seats,
        seed=args.seed,
        budget=Budget(max_forward_calls=args.budget),
        fog=None if args.fog is None else args.fog,
        max_turns=args.max_turns,
        deployments=deployments,
    )
    app = build_app(session, ui_dir=args.ui_dir)
    session.start()
    config = uvicorn.Config(app, host=args.host, port=args.port, log_level="error")
    server = uvicorn.Server(config)

    if not args.keep_alive:
        import threading

        def _watch() -> None:
            if session._thread is not None:
                session._thread.join()
                server.should_exit = True

        threading.Thread(target=_watch, daemon=True).start()

    print(f"serving session {session.session_id} on ws://{args.host}:{args.port}/ws", file=sys.stderr)
    try:
        server.run()
    except KeyboardInterrupt:
        pass
    finally:
        session.close()
        if args.replay_out:
            Path(args.replay_out).write_text(session.replay.to_text(), encoding="utf-8")
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    cfg = _load_config_or_exit(args.config)
    try:
        text = Path(args.replay).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {args.replay}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE
    try:
        replay = Replay.from_text(text)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    from .runner import config_digest

    if replay.config_sha256 != config_digest(cfg):
        log.warning("config digest differs from the replay header; verifying step by step")
    deployments = _parse_deploys(args.deploy)
    try:
        check = replay_game(replay, cfg, deployments)
    except ReplayDivergenceError as exc:
        print(f"replay divergence at step {exc.step}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    if not args.verify:
        for i, entry in enumerate(replay.entries):
            print(f"step {i}: turn {entry.turn} player {entry.player} {entry.action.category.label} -> {entry.post_fingerprint}")
    print(f"replay ok: {len(replay.entries)} steps, final fingerprint {check.final_fingerprint}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stratagem",
        description="Turn-based strategy engine: validate configs, run games and arenas, serve sessions, verify replays.",
        epilog=(
            "Agent specs: name[:key=val,...] over donothing, random, rulebased, osla, "
            "mc, mcts, rhea, e.g. mcts:budget=10000,c=1.414. Unknown keys are errors."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a game config")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    def common_game_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--budget", type=int, default=1000, help="forward calls per decision (default 1000)")
        p.add_argument("--max-turns", type=int, default=100)
        p.add_argument("--deploy", action="append", metavar="P:TYPE@X,Y", help="override deployments")
        fog = p.add_mutually_exclusive_group()
        fog.add_argument("--fog", dest="fog", action="store_true", default=None)
        fog.add_argument("--no-fog", dest="fog", action="store_false")

    p = sub.add_parser("play", help="run one headless game")
    p.add_argument("config")
    p.add_argument("--agents", required=True, help="comma-separated agent specs, seat order")
    p.add_argument("--replay-out", default=None)
    common_game_flags(p)
    p.set_defaults(func=cmd_play)

    p = sub.add_parser("arena", help="round-robin tournament")
    p.add_argument("config")
    p.add_argument("--roster", required=True, help="comma-separated agent specs")
    p.add_argument("--games", type=int, default=10, help="games per pairing (default 10)")
    p.add_argument("--csv", default=None, help="write per-game rows; figures land next to it")
    p.add_argument("--no-figures", action="store_true")
    common_game_flags(p)
    p.set_defaults(func=cmd_arena)

    p = sub.add_parser("serve", help="host an interactive session over websocket")
    p.add_argument("config")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8128)
    p.add_argument("--human-seats", default="", help="comma-separated player ids controlled externally")
    p.add_argument("--agents", default="", help="agent specs for the remaining seats, in player order")
    p.add_argument("--keep-alive", action="store_true", help="keep serving after the game finishes")
    p.add_argument("--ui-dir", default=None, help="serve static client assets from this directory")
    p.add_argument("--replay-out", default=None)
    common_game_flags(p)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("replay", help="re-execute a replay log against a config")
    p.add_argument("replay")
    p.add_argument("config")
    p.add_argument("--verify", action="store_true", help="quiet check: exit 0 iff every fingerprint matches")
    p.add_argument("--deploy", action="append", metavar="P:TYPE@X,Y")
    p.set_defaults(func=cmd_replay)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())

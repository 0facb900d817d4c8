"""``ayo`` command line: play, solve, probe, verify, tourney, train."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from ._accel import backend_name
from ._io import write_atomic
from .arena import (
    ArenaError,
    MinimaxCbrAgent,
    capability_row,
    levels_ladder,
    parse_agent,
    play_match,
    report,
    run_match,
)
from .cbr import DEFAULT_CBR, CbrConfig, CbrError, EpisodeLibrary, PerceptronModel, harvest_episodes, train_perceptron
from .endgame.db import DatabaseError, EndgameDatabase, move_values, probe, solve
from .endgame.godel import RankError
from .endgame.verify import verify
from .rules import (
    NORTH,
    ROW,
    SOUTH,
    GameConfig,
    GameState,
    IllegalMoveError,
    RulesError,
    Side,
    StalemateRule,
    StatusKind,
    apply_move,
    format_state,
    new_game,
    parse_state,
    status,
)

DOMAIN_ERRORS = (RulesError, DatabaseError, RankError, CbrError, ArenaError, OSError, json.JSONDecodeError)


class UsageError(Exception):
    pass


# --- rules flags ----------------------------------------------------------------


def _add_rules(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("rules")
    g.add_argument("--seeds-per-pit", type=int, default=4)
    g.add_argument("--stalemate", choices=[r.value for r in StalemateRule], default=StalemateRule.CANCELLED.value)
    g.add_argument("--repetition-limit", type=int, default=1)
    g.add_argument("--max-plies", type=int, default=10000)
    g.add_argument("--initial-pits", metavar="P0,..,P5/P6,..,P11",
                   help="custom starting board (reduced-seed variants)")


def _parse_pits(text: str) -> tuple[int, ...]:
    try:
        south, north = text.split("/")
        pits = tuple(int(v) for v in south.split(",") + north.split(","))
    except ValueError:
        raise UsageError(f"--initial-pits must look like 1,1,1,1,0,0/1,1,1,1,0,0, got {text!r}") from None
    if len(pits) != 12:
        raise UsageError("--initial-pits needs 6 counts on each side of the slash")
    return pits


def _config(args: argparse.Namespace) -> GameConfig:
    return _config_from(
        seeds_per_pit=args.seeds_per_pit,
        stalemate=args.stalemate,
        repetition_limit=args.repetition_limit,
        max_plies=args.max_plies,
        initial_pits=args.initial_pits,
    )


def _config_from(seeds_per_pit=4, stalemate="cancelled", repetition_limit=1, max_plies=10000,
                 initial_pits=None) -> GameConfig:
    pits = _parse_pits(initial_pits) if isinstance(initial_pits, str) else initial_pits
    try:
        return GameConfig(
            seeds_per_pit=seeds_per_pit,
            stalemate_rule=StalemateRule(stalemate),
            repetition_limit=repetition_limit,
            max_plies=max_plies,
            initial_pits=tuple(pits) if pits is not None else None,
        )
    except (RulesError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _check_writable(path: Path) -> None:
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.is_dir() or not os.access(parent, os.W_OK):
        raise OSError(f"cannot write to {path}: directory {parent} is missing or not writable")


# --- play -----------------------------------------------------------------------


def render(state: GameState) -> str:
    north = "".join(f"{state.pits[i]:>4}" for i in range(11, 5, -1))
    south = "".join(f"{state.pits[i]:>4}" for i in range(ROW))
    labels_n = "".join(f"{k:>4}" for k in range(6, 0, -1))
    labels_s = "".join(f"{k:>4}" for k in range(1, 7))
    return "\n".join([
        f"        {labels_n}",
        f"North   {north}   store {state.captured_north}",
        f"South   {south}   store {state.captured_south}",
        f"        {labels_s}",
    ])


def describe_end(state: GameState, config: GameConfig) -> str:
    st = status(state, config)
    south, north = st.final_captures
    score = f"South {south} - North {north}"
    winner = st.winner
    verdict = "draw" if winner is None else f"{'South' if winner is SOUTH else 'North'} wins"
    reasons = {
        StatusKind.WIN_SOUTH: "South captured more than half the seeds",
        StatusKind.WIN_NORTH: "North captured more than half the seeds",
        StatusKind.DRAW: "both sides captured half the seeds",
        StatusKind.SPLIT_BY_ROWS: "endless circulation: each side takes the seeds on its own row",
        StatusKind.STALEMATE_CANCELLED: "stalemate: the side to move has no move, the game is cancelled",
        StatusKind.STALEMATE_MOVER_LOSES: "stalemate: the side to move has no move and loses",
    }
    if st.kind is StatusKind.STALEMATE_CANCELLED:
        verdict = "no result"
    return f"game over ({reasons[st.kind]}). {score}, {verdict}."


def cmd_play(args: argparse.Namespace) -> int:
    config = _config(args)
    db = EndgameDatabase.load(args.db, config) if args.db else None
    library = EpisodeLibrary.load(args.library) if args.library else None
    model = PerceptronModel.load(args.model) if args.model else None
    opponent = parse_agent(args.opponent, db, library, model)
    human: Side = SOUTH if args.side == "south" else NORTH
    rng = np.random.default_rng(args.seed)
    state = new_game(config)
    out = sys.stdout
    print(f"You play {human.name.title()} against {opponent.name}. Enter a pit 1-6 on your row, q to quit.", file=out)
    show = True
    while not status(state, config).is_terminal:
        if show:
            print(render(state), file=out)
            show = False
        if state.to_move is human:
            try:
                line = input(f"{human.name.title()} pit> ")
            except (EOFError, KeyboardInterrupt):
                print(f"\ninput closed; position: {format_state(state)}", file=out)
                return 0
            line = line.strip().lower()
            if line in ("q", "quit", "exit"):
                print(f"position: {format_state(state)}", file=out)
                return 0
            if not line.isdigit() or not 1 <= int(line) <= ROW:
                print("please enter a pit number from 1 to 6", file=out)
                continue
            pit = int(line) - 1 + ROW * int(human)
            try:
                outcome = apply_move(state, pit, config)
            except IllegalMoveError as exc:
                print(str(exc).replace(f"(pit {pit})", f"(pit {int(line)})"), file=out)
                continue
        else:
            pit = opponent.choose(state, config, rng).move
            outcome = apply_move(state, pit, config)
            print(f"{opponent.name} plays pit {pit - ROW * int(state.to_move) + 1}", file=out)
        if outcome.captured_now:
            print(f"captured {outcome.captured_now}", file=out)
        state = outcome.next
        show = True
    print(render(state), file=out)
    print(describe_end(state, config), file=out)
    return 0


# --- solve / probe / verify -----------------------------------------------------


def cmd_solve(args: argparse.Namespace) -> int:
    config = _config(args)
    if args.max_seeds < 0:
        raise UsageError("--max-seeds must be >= 0")
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    out = Path(args.out)
    _check_writable(out)
    t0 = time.perf_counter()

    def progress(stats):
        print(f"level {stats.level:>2}: {stats.entries:>10} entries  {stats.seconds:8.2f} s", flush=True)

    db = solve(args.max_seeds, config, workers=args.workers, progress=progress)
    db.save(out)
    print(f"solved {args.max_seeds} seeds with {args.workers} worker(s) on {backend_name()} "
          f"in {time.perf_counter() - t0:.2f} s; wrote {out} ({out.stat().st_size} bytes)")
    return 0


def cmd_probe(args: argparse.Namespace) -> int:
    config = _config(args)
    db = EndgameDatabase.load(args.db, config)
    state = parse_state(args.state)
    value = probe(db, state, config)
    print(f"value: {value:+d} (future capture difference for {state.to_move.name.title()})")
    if status(state, config).is_terminal:
        print("position is terminal")
        return 0
    ranked = move_values(db, state, config)
    base = ROW * int(state.to_move)
    for mv in ranked:
        print(f"  pit {mv.pit - base + 1} (index {mv.pit}): captures {mv.captured}, backed-up value {mv.value:+d}")
    print(f"best move: pit {ranked[0].pit - base + 1} (index {ranked[0].pit})")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    config = _config(args)
    db = EndgameDatabase.load(args.db, config)
    if args.sample is not None:
        rep = verify(db, sample=args.sample, config=config, seed=args.seed)
    else:
        level = db.max_seeds if args.exhaustive is None else args.exhaustive
        rep = verify(db, exhaustive=level, config=config)
    print(rep.summary())
    if rep.mismatches:
        first = rep.mismatches[0]
        print(f"first mismatch: level {first.level} rank {first.rank}")
        return 1
    return 0


# --- tourney / train ------------------------------------------------------------


def _load_roster(path: Path) -> dict:
    data = json.loads(path.read_text())
    if not isinstance(data, dict) or not isinstance(data.get("agents"), list) or not data["agents"]:
        raise UsageError("roster must be a JSON object with a non-empty 'agents' list")
    return data


def _resolve(base: Path, value: str | None) -> Path | None:
    if value is None:
        return None
    p = Path(value)
    return p if p.is_absolute() else base / p


def cmd_tourney(args: argparse.Namespace) -> int:
    if args.games < 1:
        raise UsageError("--games must be >= 1")
    roster_path = Path(args.roster)
    roster = _load_roster(roster_path)
    base = roster_path.parent
    config = _config_from(**roster.get("rules", {})) if "rules" in roster else _config(args)
    db_path = _resolve(base, roster.get("db"))
    db = EndgameDatabase.load(db_path, config) if db_path else None
    lib_path = _resolve(base, roster.get("library"))
    library = EpisodeLibrary.load(lib_path) if lib_path else None
    model_path = _resolve(base, roster.get("model"))
    model = PerceptronModel.load(model_path) if model_path else None
    alpha = roster.get("alpha")
    cbr = CbrConfig(alpha=float("inf") if alpha is None else float(alpha),
                    beta=float(roster.get("beta", DEFAULT_CBR.beta)))
    agents = [parse_agent(spec, db, library, model, cbr) for spec in roster["agents"]]
    opening = int(roster.get("opening_plies", 2))
    swap = bool(roster.get("swap_sides", True))
    workers = int(roster.get("workers", args.workers))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stats = []
    for i, a in enumerate(agents):
        for b in agents[i + 1:]:
            first, second = a, b
            if isinstance(b, MinimaxCbrAgent) and not isinstance(a, MinimaxCbrAgent):
                first, second = b, a  # the CSV reports player A's overrides
            print(f"{first.name} vs {second.name}: {args.games} games", flush=True)
            stats.append(run_match(first, second, args.games, config, args.seed, swap, opening, workers, level="match"))
    files = {"matches.csv": report(stats, "csv"), "matches.md": report(stats, "markdown")}
    if roster.get("ladder"):
        ladder_stats, rows = [], []
        for a in agents:
            print(f"ladder for {a.name}", flush=True)
            ladder = levels_ladder(a, args.games, config, args.seed, opening, workers)
            ladder_stats += ladder
            rows.append(capability_row(a, ladder))
        files["ladder.csv"] = report(ladder_stats, "csv")
        files["ladder.md"] = report(ladder_stats, "markdown")
        files["capability.csv"] = report(rows, "csv")
        files["capability.md"] = report(rows, "markdown")
    for name, text in files.items():
        write_atomic(out / name, text.encode())
    print(report(stats, "markdown"), end="")
    print(f"wrote {', '.join(sorted(files))} to {out}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    config = _config(args)
    if args.games < 1:
        raise CbrError("no self-play games requested, the library would be empty")
    lib_out, model_out = Path(args.out_library), Path(args.out_model)
    _check_writable(lib_out)
    _check_writable(model_out)
    db = EndgameDatabase.load(args.db, config) if args.db else None
    player = parse_agent(args.player, db)
    played = play_match(player, player, args.games, config, args.seed, False, args.opening_plies)
    library = harvest_episodes([rec for rec, _ in played], winner_only=not args.all_moves)
    if not len(library):
        raise CbrError("self-play produced no episodes (every game was drawn?)")
    model = train_perceptron(library, args.rate, args.epochs)
    library.save(lib_out)
    model.save(model_out)
    errors = model.epoch_errors[-1] if model.epoch_errors else 0
    print(f"{args.games} games, {len(library)} episodes, perceptron: {model.epochs_trained} epochs, "
          f"final training errors {errors}/{len(library)}")
    return 0


# --- entry point ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ayo", description="Awale game-search workbench")
    parser.add_argument("--version", action="version", version=f"ayo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("play", help="play against an engine in the terminal")
    p.add_argument("--opponent", default="minimax:4", help="random[:SEED], minimax:D, minimax-cbr:D, casing, db-perfect")
    p.add_argument("--side", choices=["south", "north"], default="south")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--db")
    p.add_argument("--library")
    p.add_argument("--model")
    _add_rules(p)
    p.set_defaults(func=cmd_play)

    p = sub.add_parser("solve", help="build an endgame database")
    p.add_argument("--max-seeds", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    _add_rules(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("probe", help="look up a position in a database")
    p.add_argument("--db", required=True)
    p.add_argument("--state", required=True, help='e.g. "0,0,0,0,0,1/1,0,0,0,0,0 S 0 0"')
    _add_rules(p)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("verify", help="check a database against forward search")
    p.add_argument("--db", required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exhaustive", type=int, metavar="L", help="check every entry up to level L")
    mode.add_argument("--sample", type=int, metavar="K", help="check K random entries")
    p.add_argument("--seed", type=int, default=0)
    _add_rules(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("tourney", help="run pairings and level ladders from a JSON roster")
    p.add_argument("--roster", required=True)
    p.add_argument("--games", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    _add_rules(p)
    p.set_defaults(func=cmd_tourney)

    p = sub.add_parser("train", help="harvest self-play episodes and train the perceptron")
    p.add_argument("--games", type=int, required=True)
    p.add_argument("--out-library", required=True)
    p.add_argument("--out-model", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--player", default="minimax:3", help="self-play agent")
    p.add_argument("--db", help="database for a db-perfect self-play agent")
    p.add_argument("--opening-plies", type=int, default=2)
    p.add_argument("--all-moves", action="store_true", help="keep both sides' moves, not just the winner's")
    p.add_argument("--rate", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=100)
    _add_rules(p)
    p.set_defaults(func=cmd_train)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    except DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Tournament harness: agents, recorded games, matches and table reports."""

from __future__ import annotations

import io
import csv
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cbr import DEFAULT_CBR, CbrConfig, EpisodeLibrary, PerceptronModel, casing_move, hybrid_move
from .endgame.db import EndgameDatabase, move_values, probe
from .rules import (
    DEFAULT_CONFIG,
    NORTH,
    SOUTH,
    GameConfig,
    GameState,
    GameStatus,
    IllegalMoveError,
    Side,
    StatusKind,
    apply_move,
    legal_moves,
    new_game,
    status,
)
from .search import DEFAULT_EVAL, EvalWeights, alphabeta


@dataclass(frozen=True)
class Decision:
    move: int
    overridden: bool = False


class ArenaError(ValueError):
    pass


# --- agents -------------------------------------------------------------------


@dataclass(frozen=True)
class RandomAgent:
    seed: int = 0

    @property
    def name(self) -> str:
        return f"Random({self.seed})"

    def choose(self, state: GameState, config: GameConfig, rng: np.random.Generator) -> Decision:
        moves = legal_moves(state)
        return Decision(moves[int(rng.integers(len(moves)))])


@dataclass(frozen=True)
class MinimaxAgent:
    depth: int
    weights: EvalWeights = DEFAULT_EVAL

    @property
    def name(self) -> str:
        return f"Minimax({self.depth})"

    def choose(self, state, config, rng) -> Decision:
        return Decision(alphabeta(state, self.depth, self.weights, config).best_move)


@dataclass(frozen=True)
class MinimaxCbrAgent:
    depth: int
    weights: EvalWeights = DEFAULT_EVAL
    library: EpisodeLibrary = field(default_factory=EpisodeLibrary, compare=False)
    cbr_config: CbrConfig = DEFAULT_CBR

    @property
    def name(self) -> str:
        return f"MinimaxCbr({self.depth})"

    def choose(self, state, config, rng) -> Decision:
        d = hybrid_move(state, self.depth, self.weights, self.library, self.cbr_config, config)
        return Decision(d.move, d.overridden)


@dataclass(frozen=True)
class CasingAgent:
    library: EpisodeLibrary = field(compare=False)
    model: PerceptronModel = field(compare=False)
    cbr_config: CbrConfig = DEFAULT_CBR

    @property
    def name(self) -> str:
        return "Casing"

    def choose(self, state, config, rng) -> Decision:
        return Decision(casing_move(state, self.library, self.model, self.cbr_config))


@dataclass(frozen=True)
class DbPerfectAgent:
    """Database play while the board fits the database, alpha-beta above it.

    Database values treat endless play as neutral, while a real game stops at
    the first repetition and splits the rows. The agent therefore searches
    ``lookahead`` plies under the real rules (history included) and scores
    leaves as store difference plus database value; remaining ties follow the
    database's own order (value, capture now, lowest pit).
    """

    db: EndgameDatabase = field(compare=False)
    fallback_depth: int = 4
    weights: EvalWeights = DEFAULT_EVAL
    lookahead: int = 4

    @property
    def name(self) -> str:
        return f"DbPerfect({self.db.max_seeds})"

    def choose(self, state, config, rng) -> Decision:
        if sum(state.pits) > self.db.max_seeds:
            return Decision(alphabeta(state, self.fallback_depth, self.weights, config).best_move)
        ranked = move_values(self.db, state, config)
        if self.lookahead <= 1:
            return Decision(ranked[0].pit)
        best, best_score = ranked[0].pit, -np.inf
        for mv in ranked:
            child = apply_move(state, mv.pit, config).next
            score = -self._real_value(child, config, self.lookahead - 1, -np.inf, -best_score)
            if score > best_score:
                best, best_score = mv.pit, score
        return Decision(best)

    def _real_value(self, state: GameState, config: GameConfig, depth: int, alpha: float, beta: float) -> float:
        """Final capture difference for the mover, exact at terminals, database-backed at the horizon."""
        me, opp = state.to_move, state.to_move.other
        st = status(state, config)
        if st.is_terminal:
            if st.kind is StatusKind.STALEMATE_CANCELLED:
                return 0.0
            if st.kind is StatusKind.STALEMATE_MOVER_LOSES:
                return -float(state.total_seeds)
            caps = st.final_captures
            return float(caps[int(me)] - caps[int(opp)])
        stores = state.captured(me) - state.captured(opp)
        if depth == 0:
            # seeds on one's own row decide row splits; the bonus stays below one database unit
            rows = sum(state.row(me)) - sum(state.row(opp))
            return stores + probe(self.db, state) + rows / (2.0 * state.total_seeds + 1.0)
        value = -np.inf
        for mv in move_values(self.db, state, config):
            child = apply_move(state, mv.pit, config).next
            value = max(value, -self._real_value(child, config, depth - 1, -beta, -alpha))
            alpha = max(alpha, value)
            if alpha >= beta:
                break
        return value


Agent = RandomAgent | MinimaxAgent | MinimaxCbrAgent | CasingAgent | DbPerfectAgent


def parse_agent(
    text: str,
    db: EndgameDatabase | None = None,
    library: EpisodeLibrary | None = None,
    model: PerceptronModel | None = None,
    cbr_config: CbrConfig = DEFAULT_CBR,
    weights: EvalWeights = DEFAULT_EVAL,
) -> Agent:
    """``random[:SEED]``, ``minimax:D``, ``minimax-cbr:D``, ``casing``, ``db-perfect[:FALLBACK]``."""
    kind, _, arg = text.strip().lower().partition(":")
    try:
        num = int(arg) if arg else None
    except ValueError:
        raise ArenaError(f"bad agent parameter in {text!r}") from None
    if num is not None and num < 0:
        raise ArenaError(f"agent parameter must be >= 0 in {text!r}")
    if kind == "random":
        return RandomAgent(num or 0)
    if kind == "minimax":
        if num is None:
            raise ArenaError("minimax needs a depth, e.g. minimax:4")
        return MinimaxAgent(num, weights)
    if kind in ("minimax-cbr", "minimaxcbr"):
        if num is None:
            raise ArenaError("minimax-cbr needs a depth, e.g. minimax-cbr:3")
        return MinimaxCbrAgent(num, weights, library if library is not None else EpisodeLibrary(), cbr_config)
    if kind == "casing":
        if library is None or model is None:
            raise ArenaError("casing needs a library and a model")
        return CasingAgent(library, model, cbr_config)
    if kind in ("db-perfect", "dbperfect"):
        if db is None:
            raise ArenaError("db-perfect needs a database")
        return DbPerfectAgent(db, 4 if num is None else num, weights)
    raise ArenaError(f"unknown agent kind {kind!r}")


# --- games --------------------------------------------------------------------


@dataclass
class GameRecord:
    config: GameConfig
    moves: list[tuple[GameState, int]]
    result: GameStatus
    captures: tuple[int, int]
    overrides: tuple[int, int]
    ply_count: int
    players: tuple[str, str] = ("", "")
    opening_plies: int = 0
    forfeit: Side | None = None


def _rng(*key: int) -> np.random.Generator:
    return np.random.default_rng([k & 0xFFFFFFFF for k in key])


def play_game(a: Agent, b: Agent, config: GameConfig = DEFAULT_CONFIG, rng_seed: int = 0,
              opening_plies: int = 0) -> GameRecord:
    """``a`` plays South, ``b`` North. The first ``opening_plies`` plies are random."""
    agents = (a, b)
    rngs = (_rng(rng_seed, 1, getattr(a, "seed", 0)), _rng(rng_seed, 2, getattr(b, "seed", 0)))
    opening = _rng(rng_seed, 0)
    state = new_game(config)
    moves: list[tuple[GameState, int]] = []
    overrides = [0, 0]
    forfeit = None
    st = status(state, config)
    while not st.is_terminal:
        side = int(state.to_move)
        if state.ply < opening_plies:
            legal = legal_moves(state)
            decision = Decision(legal[int(opening.integers(len(legal)))])
        else:
            decision = agents[side].choose(state, config, rngs[side])
        try:
            outcome = apply_move(state, decision.move, config)
        except IllegalMoveError:
            forfeit = state.to_move
            st = GameStatus(StatusKind.FORFEIT, (state.captured_south, state.captured_north), forfeit)
            break
        moves.append((state, decision.move))
        overrides[side] += decision.overridden
        state = outcome.next
        st = status(state, config)
    return GameRecord(
        config,
        moves,
        st,
        st.final_captures,
        (overrides[0], overrides[1]),
        len(moves),
        (a.name, b.name),
        opening_plies,
        forfeit,
    )


def replay(record: GameRecord) -> tuple[GameStatus, tuple[int, int]]:
    """Re-apply a record's moves from the initial position; returns (status, captures)."""
    state = new_game(record.config)
    for before, move in record.moves:
        if before != state or before.ply != state.ply:
            raise ArenaError(f"record diverges at ply {state.ply}")
        state = apply_move(state, move, record.config).next
    if record.forfeit is not None:
        st = GameStatus(StatusKind.FORFEIT, (state.captured_south, state.captured_north), record.forfeit)
    else:
        st = status(state, record.config)
    return st, st.final_captures


# --- matches ------------------------------------------------------------------


def _mean_std(xs: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(xs, dtype=np.float64)
    if len(arr) == 0:
        return 0.0, 0.0
    std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return float(arr.mean()), std


@dataclass(frozen=True)
class MatchStats:
    level: str
    player_a: str
    player_b: str
    games: int
    wins_a: int
    draws: int
    wins_b: int
    plies: tuple[float, float]
    caps_a: tuple[float, float]
    caps_b: tuple[float, float]
    overrides_a: tuple[float, float]
    overrides_b: tuple[float, float]

    @property
    def win_rate_a(self) -> float:
        return self.wins_a / self.games if self.games else 0.0

    @property
    def score_rate_a(self) -> float:
        """Wins plus draws of player A over games."""
        return (self.wins_a + self.draws) / self.games if self.games else 0.0


@dataclass(frozen=True)
class GameSummary:
    """One game seen from player A's side."""

    outcome_a: int
    plies: int
    caps_a: int
    caps_b: int
    overrides_a: int
    overrides_b: int


def summarize(record: GameRecord, a_side: Side) -> GameSummary:
    b_side = a_side.other
    caps = record.captures
    return GameSummary(
        record.result.outcome(a_side),
        record.ply_count,
        caps[int(a_side)],
        caps[int(b_side)],
        record.overrides[int(a_side)],
        record.overrides[int(b_side)],
    )


def aggregate(summaries: Sequence[GameSummary], player_a: str, player_b: str, level: str = "") -> MatchStats:
    return MatchStats(
        level,
        player_a,
        player_b,
        len(summaries),
        sum(s.outcome_a > 0 for s in summaries),
        sum(s.outcome_a == 0 for s in summaries),
        sum(s.outcome_a < 0 for s in summaries),
        _mean_std([s.plies for s in summaries]),
        _mean_std([s.caps_a for s in summaries]),
        _mean_std([s.caps_b for s in summaries]),
        _mean_std([s.overrides_a for s in summaries]),
        _mean_std([s.overrides_b for s in summaries]),
    )


def play_match(a: Agent, b: Agent, games: int, config: GameConfig = DEFAULT_CONFIG, base_seed: int = 0,
               swap_sides: bool = True, opening_plies: int = 2, workers: int = 1) -> list[tuple[GameRecord, Side]]:
    """Records of each game with the side ``a`` played; game ``i`` uses seed ``base_seed + i``."""
    if games < 1:
        raise ArenaError(f"games must be >= 1, got {games}")

    def one(i: int) -> tuple[GameRecord, Side]:
        if swap_sides and i % 2:
            return play_game(b, a, config, base_seed + i, opening_plies), NORTH
        return play_game(a, b, config, base_seed + i, opening_plies), SOUTH

    if workers <= 1:
        return [one(i) for i in range(games)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(games)))


def run_match(a: Agent, b: Agent, games: int, config: GameConfig = DEFAULT_CONFIG, base_seed: int = 0,
              swap_sides: bool = True, opening_plies: int = 2, workers: int = 1, level: str = "") -> MatchStats:
    played = play_match(a, b, games, config, base_seed, swap_sides, opening_plies, workers)
    return aggregate([summarize(rec, side) for rec, side in played], a.name, b.name, level)


LEVELS = ("Initiation", "Beginner", "Amateur", "Grandmaster")


def level_opponents(weights: EvalWeights = DEFAULT_EVAL) -> list[tuple[str, Agent]]:
    """Stand-ins for the four difficulty levels: random play and depth 1, 3, 5 search."""
    return [
        ("Initiation", RandomAgent(0)),
        ("Beginner", MinimaxAgent(1, weights)),
        ("Amateur", MinimaxAgent(3, weights)),
        ("Grandmaster", MinimaxAgent(5, weights)),
    ]


def levels_ladder(agent: Agent, games_per_level: int, config: GameConfig = DEFAULT_CONFIG, base_seed: int = 0,
                  opening_plies: int = 2, workers: int = 1) -> list[MatchStats]:
    return [
        run_match(agent, opp, games_per_level, config, base_seed, True, opening_plies, workers, level=f"{name} (proxy)")
        for name, opp in level_opponents()
    ]


@dataclass(frozen=True)
class CapabilityRow:
    agent: str
    uses_minimax: bool
    uses_endgame: bool
    levels: tuple[bool, bool, bool, bool]


def capability_row(agent: Agent, ladder: Sequence[MatchStats]) -> CapabilityRow:
    """A level counts as passed when the agent won more games than it lost there."""
    if len(ladder) != len(LEVELS):
        raise ArenaError(f"a ladder has {len(LEVELS)} levels, got {len(ladder)}")
    uses_minimax = isinstance(agent, (MinimaxAgent, MinimaxCbrAgent, DbPerfectAgent))
    uses_endgame = isinstance(agent, DbPerfectAgent)
    return CapabilityRow(agent.name, uses_minimax, uses_endgame, tuple(s.wins_a > s.wins_b for s in ladder))


# --- reports ------------------------------------------------------------------

CSV_COLUMNS = (
    "level,player_a,player_b,games,wins_a,draws,wins_b,avg_plies,std_plies,"
    "avg_caps_a,std_caps_a,avg_caps_b,std_caps_b,avg_overrides_a,std_overrides_a"
).split(",")
CAPABILITY_COLUMNS = ["agent", "minimax", "endgame_db", *(lvl.lower() for lvl in LEVELS)]


def _fmt(x: float) -> str:
    return f"{round(x, 2) + 0.0:.2f}"


def cell(mean: float, std: float) -> str:
    """Mean with its standard deviation in parentheses, two decimals each."""
    return f"{_fmt(mean)}({_fmt(std)})"


def _yes(flag: bool) -> str:
    return "yes" if flag else "no"


def _stats_rows(stats: Sequence[MatchStats]) -> list[list[str]]:
    rows = []
    for s in stats:
        rows.append([
            s.level, s.player_a, s.player_b, str(s.games), str(s.wins_a), str(s.draws), str(s.wins_b),
            _fmt(s.plies[0]), _fmt(s.plies[1]), _fmt(s.caps_a[0]), _fmt(s.caps_a[1]),
            _fmt(s.caps_b[0]), _fmt(s.caps_b[1]), _fmt(s.overrides_a[0]), _fmt(s.overrides_a[1]),
        ])
    return rows


def _capability_rows(rows: Sequence[CapabilityRow]) -> list[list[str]]:
    return [[r.agent, _yes(r.uses_minimax), _yes(r.uses_endgame), *map(_yes, r.levels)] for r in rows]


def _csv(header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _markdown(header: list[str], rows: list[list[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(lines) + "\n"


MARKDOWN_STATS_HEADER = [
    "Level", "Player A", "Player B", "Games", "W-D-L (A)", "Moves (plies)",
    "Seeds captured A (std)", "Seeds captured B (std)", "Overrides A (std)", "Overrides B (std)",
]


def report(items: Sequence[MatchStats] | Sequence[CapabilityRow], fmt: str = "csv") -> str:
    """Render match statistics or a capability matrix as CSV or Markdown."""
    items = list(items)
    if fmt not in ("csv", "markdown"):
        raise ArenaError(f"unknown report format {fmt!r}")
    if items and all(isinstance(i, CapabilityRow) for i in items):
        header, rows = CAPABILITY_COLUMNS, _capability_rows(items)
        return _csv(header, rows) if fmt == "csv" else _markdown(header, rows)
    if not all(isinstance(i, MatchStats) for i in items):
        raise ArenaError("report takes either match statistics or capability rows, not a mix")
    if fmt == "csv":
        return _csv(CSV_COLUMNS, _stats_rows(items))
    rows = [
        [s.level, s.player_a, s.player_b, str(s.games), f"{s.wins_a}-{s.draws}-{s.wins_b}", cell(*s.plies),
         cell(*s.caps_a), cell(*s.caps_b), cell(*s.overrides_a), cell(*s.overrides_b)]
        for s in items
    ]
    return _markdown(MARKDOWN_STATS_HEADER, rows)

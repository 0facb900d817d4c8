"""Awale rules: board, sowing, 2-3 captures, golden rule and game termination.

Pits are indexed 0..11 counter-clockwise. Pits 0-5 form South's row and 6-11
North's row; South moves first. Every object here is immutable and every
function pure.
"""

from __future__ import annotations

import re
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum, IntEnum

N_PITS = 12
ROW = 6


class Side(IntEnum):
    SOUTH = 0
    NORTH = 1

    @property
    def other(self) -> Side:
        return Side(1 - self)

    @property
    def letter(self) -> str:
        return "S" if self is Side.SOUTH else "N"


SOUTH = Side.SOUTH
NORTH = Side.NORTH


class StalemateRule(Enum):
    CANCELLED = "cancelled"
    MOVER_LOSES = "mover-loses"


class GrandSlamRule(Enum):
    CAPTURE_FORFEITED = "capture-forfeited"


class StatusKind(Enum):
    ONGOING = "ongoing"
    WIN_SOUTH = "win-south"
    WIN_NORTH = "win-north"
    DRAW = "draw"
    SPLIT_BY_ROWS = "split-by-rows"
    STALEMATE_CANCELLED = "stalemate-cancelled"
    STALEMATE_MOVER_LOSES = "stalemate-mover-loses"
    FORFEIT = "forfeit"  # an agent submitted an illegal move; only the arena produces this


class RulesError(ValueError):
    """Bad configuration, malformed notation or a broken invariant."""


class IllegalMoveError(RulesError):
    def __init__(self, pit: int, reason: str):
        super().__init__(f"illegal: {reason} (pit {pit})")
        self.pit = pit
        self.reason = reason


@dataclass(frozen=True)
class GameConfig:
    """Rule variant and safety caps.

    ``initial_pits`` replaces the uniform ``seeds_per_pit`` opening with an
    arbitrary board; reduced-seed variants played against an endgame
    database use it.
    """

    seeds_per_pit: int = 4
    stalemate_rule: StalemateRule = StalemateRule.CANCELLED
    grand_slam_rule: GrandSlamRule = GrandSlamRule.CAPTURE_FORFEITED
    repetition_limit: int = 1
    max_plies: int = 10_000
    initial_pits: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.seeds_per_pit < 1:
            raise RulesError(f"seeds_per_pit must be >= 1, got {self.seeds_per_pit}")
        if self.repetition_limit < 1:
            raise RulesError(f"repetition_limit must be >= 1, got {self.repetition_limit}")
        if self.max_plies < 1:
            raise RulesError(f"max_plies must be >= 1, got {self.max_plies}")
        if self.initial_pits is not None:
            pits = tuple(int(p) for p in self.initial_pits)
            if len(pits) != N_PITS or min(pits) < 0 or sum(pits) == 0:
                raise RulesError(f"initial_pits must be 12 non-negative counts, got {pits}")
            object.__setattr__(self, "initial_pits", pits)

    @property
    def total_seeds(self) -> int:
        if self.initial_pits is not None:
            return sum(self.initial_pits)
        return N_PITS * self.seeds_per_pit


DEFAULT_CONFIG = GameConfig()

PositionKey = tuple[tuple[int, ...], Side]


@dataclass(frozen=True)
class GameState:
    """A position plus the bookkeeping needed to detect repetitions.

    ``history`` holds every (pits, to_move) occurrence since the last capture,
    the current position included. Positions from before a capture can never
    recur because the seed count on the board only decreases. ``ply`` and
    ``history`` do not take part in equality.
    """

    pits: tuple[int, ...]
    captured_south: int = 0
    captured_north: int = 0
    to_move: Side = SOUTH
    ply: int = field(default=0, compare=False)
    history: tuple[PositionKey, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if len(self.pits) != N_PITS:
            raise RulesError(f"board needs 12 pits, got {len(self.pits)}")
        if min(self.pits) < 0 or self.captured_south < 0 or self.captured_north < 0:
            raise RulesError("seed counts must be non-negative")
        if not self.history:
            object.__setattr__(self, "history", (self.key,))

    @property
    def key(self) -> PositionKey:
        return (self.pits, self.to_move)

    @property
    def total_seeds(self) -> int:
        return sum(self.pits) + self.captured_south + self.captured_north

    def captured(self, side: Side) -> int:
        return self.captured_south if side is SOUTH else self.captured_north

    def row(self, side: Side) -> tuple[int, ...]:
        return self.pits[:ROW] if side is SOUTH else self.pits[ROW:]

    def relative_pits(self) -> tuple[int, ...]:
        """Board seen by the player to move: own row first."""
        if self.to_move is SOUTH:
            return self.pits
        return self.pits[ROW:] + self.pits[:ROW]

    def mirrored(self) -> GameState:
        """Same game with the roles of South and North exchanged."""
        return GameState(
            self.pits[ROW:] + self.pits[:ROW],
            self.captured_north,
            self.captured_south,
            self.to_move.other,
            self.ply,
            tuple((pits[ROW:] + pits[:ROW], side.other) for pits, side in self.history),
        )


@dataclass(frozen=True)
class MoveOutcome:
    next: GameState
    captured_now: int
    landing_pit: int


@dataclass(frozen=True)
class GameStatus:
    kind: StatusKind
    final_captures: tuple[int, int] | None = None
    loser: Side | None = None

    @property
    def is_terminal(self) -> bool:
        return self.kind is not StatusKind.ONGOING

    @property
    def winner(self) -> Side | None:
        """Winning side, or None for draws, cancellations and ongoing games."""
        if self.kind is StatusKind.WIN_SOUTH:
            return SOUTH
        if self.kind is StatusKind.WIN_NORTH:
            return NORTH
        if self.kind in (StatusKind.STALEMATE_MOVER_LOSES, StatusKind.FORFEIT):
            return self.loser.other
        if self.kind is StatusKind.SPLIT_BY_ROWS:
            south, north = self.final_captures
            if south != north:
                return SOUTH if south > north else NORTH
        return None

    def outcome(self, side: Side) -> int:
        """+1 win, 0 draw or cancellation, -1 loss for ``side``."""
        winner = self.winner
        if winner is None:
            return 0
        return 1 if winner is side else -1


def own_range(side: Side) -> range:
    return range(0, ROW) if side is SOUTH else range(ROW, N_PITS)


def new_game(config: GameConfig = DEFAULT_CONFIG) -> GameState:
    if config.initial_pits is not None:
        return GameState(config.initial_pits)
    return GameState((config.seeds_per_pit,) * N_PITS)


def sow(pits: list[int], pit: int) -> int:
    """Sow in place from ``pit``, skipping the origin on every lap; return the landing pit."""
    seeds = pits[pit]
    pits[pit] = 0
    pos = pit
    while seeds:
        pos = (pos + 1) % N_PITS
        if pos == pit:
            continue
        pits[pos] += 1
        seeds -= 1
    return pos


def legal_moves(state: GameState) -> list[int]:
    own = own_range(state.to_move)
    moves = [p for p in own if state.pits[p] > 0]
    opp_lo = ROW if state.to_move is SOUTH else 0
    if any(state.pits[opp_lo : opp_lo + ROW]):
        # captures never empty the opponent's row (grand slam forfeits), so every move feeds
        return moves
    return [p for p in moves if state.pits[p] >= ROW - (p - own.start)]


def apply_move(state: GameState, move: int, config: GameConfig = DEFAULT_CONFIG) -> MoveOutcome:
    mover = state.to_move
    if move not in own_range(mover):
        raise IllegalMoveError(move, "pit is not on the mover's row")
    if state.pits[move] == 0:
        raise IllegalMoveError(move, "pit is empty")
    if move not in legal_moves(state):
        raise IllegalMoveError(move, "golden rule: the opponent must be left a move")

    pits = list(state.pits)
    landing = sow(pits, move)
    opp_lo = ROW if mover is SOUTH else 0
    taken: list[int] = []
    pos = landing
    while opp_lo <= pos < opp_lo + ROW and pits[pos] in (2, 3):
        taken.append(pos)
        pos -= 1
    captured = sum(pits[p] for p in taken)
    if captured and captured == sum(pits[opp_lo : opp_lo + ROW]):
        captured = 0  # grand slam: the capture is forfeited
    elif captured:
        for p in taken:
            pits[p] = 0

    board = tuple(pits)
    south = state.captured_south + (captured if mover is SOUTH else 0)
    north = state.captured_north + (captured if mover is NORTH else 0)
    to_move = mover.other
    key = (board, to_move)
    history = (key,) if captured else state.history + (key,)
    nxt = GameState(board, south, north, to_move, state.ply + 1, history)
    return MoveOutcome(nxt, captured, landing)


def row_split(state: GameState) -> tuple[int, int]:
    """Final captures when each player is awarded the seeds on his own row."""
    return (
        state.captured_south + sum(state.pits[:ROW]),
        state.captured_north + sum(state.pits[ROW:]),
    )


def status(state: GameState, config: GameConfig = DEFAULT_CONFIG) -> GameStatus:
    """Classify ``state``: store majority, then stalemate, then endless circulation."""
    total = state.total_seeds
    south, north = state.captured_south, state.captured_north
    stores = (south, north)
    if 2 * south > total:
        return GameStatus(StatusKind.WIN_SOUTH, stores)
    if 2 * north > total:
        return GameStatus(StatusKind.WIN_NORTH, stores)
    if 2 * south == total and 2 * north == total:
        return GameStatus(StatusKind.DRAW, stores)
    if not legal_moves(state):
        if config.stalemate_rule is StalemateRule.CANCELLED:
            return GameStatus(StatusKind.STALEMATE_CANCELLED, stores)
        return GameStatus(StatusKind.STALEMATE_MOVER_LOSES, stores, state.to_move)
    if state.history.count(state.key) > config.repetition_limit or state.ply >= config.max_plies:
        return GameStatus(StatusKind.SPLIT_BY_ROWS, row_split(state))
    return GameStatus(StatusKind.ONGOING)


_NOTATION = re.compile(r"^(\d+(?:,\d+){5})/(\d+(?:,\d+){5}) ([SN]) (\d+) (\d+)$")


def parse_state(text: str, config: GameConfig | None = None) -> GameState:
    """Parse ``p0,..,p5/p6,..,p11 S|N capS capN``.

    With a ``config`` the seed total must equal ``config.total_seeds``.
    """
    m = _NOTATION.match(text.strip())
    if m is None:
        raise RulesError(f"malformed state notation: {text!r}")
    pits = tuple(int(v) for v in m.group(1).split(",") + m.group(2).split(","))
    state = GameState(pits, int(m.group(4)), int(m.group(5)), SOUTH if m.group(3) == "S" else NORTH)
    if config is not None and state.total_seeds != config.total_seeds:
        raise RulesError(
            f"seed conservation violated: {state.total_seeds} seeds, expected {config.total_seeds}"
        )
    return state


def format_state(state: GameState) -> str:
    south = ",".join(map(str, state.pits[:ROW]))
    north = ",".join(map(str, state.pits[ROW:]))
    return f"{south}/{north} {state.to_move.letter} {state.captured_south} {state.captured_north}"


def state_from_relative(rel_pits: Sequence[int], to_move: Side = SOUTH) -> GameState:
    """Build a state (stores empty) from a board given from the mover's side."""
    rel = tuple(int(v) for v in rel_pits)
    pits = rel if to_move is SOUTH else rel[ROW:] + rel[:ROW]
    return GameState(pits, 0, 0, to_move)

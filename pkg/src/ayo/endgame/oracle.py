"""Forward-search reference for endgame values.

Shares no code with the retrograde solver: moves come from :mod:`ayo.rules`,
positions are dict-keyed tuples, and the cyclic part of a level is decided by
threshold games instead of bound iteration. For every threshold ``t >= 1``
the set of boards whose mover can force a result of at least ``t`` is a
reachability attractor (endless play never reaches a positive threshold).
A board outside every such set is worth ``max`` over its options when all
quiet children are themselves forced wins for the opponent, and 0 otherwise.
"""

from __future__ import annotations

from collections import deque

from ..rules import (
    DEFAULT_CONFIG,
    ROW,
    GameConfig,
    StalemateRule,
    apply_move,
    legal_moves,
    state_from_relative,
)

Board = tuple[int, ...]


def relative_children(board: Board, config: GameConfig = DEFAULT_CONFIG) -> list[tuple[int, int, Board]]:
    """(pit, captured, child board from the opponent's side) for each legal move."""
    state = state_from_relative(board)
    out = []
    for pit in legal_moves(state):
        res = apply_move(state, pit, config)
        pits = res.next.pits
        out.append((pit, res.captured_now, pits[ROW:] + pits[:ROW]))
    return out


def split_value(board: Board) -> int:
    return sum(board[:ROW]) - sum(board[ROW:])


class ForwardOracle:
    """Memoised forward solver; ``value(board)`` explores only what it needs."""

    def __init__(self, config: GameConfig = DEFAULT_CONFIG):
        self.config = config
        self._values: dict[Board, int] = {}
        self._dead: dict[Board, bool] = {}

    def value(self, board: Board) -> int:
        board = tuple(int(v) for v in board)
        if board not in self._values:
            self._solve_component(board)
        return self._values[board]

    def is_dead(self, board: Board) -> bool:
        board = tuple(int(v) for v in board)
        self.value(board)
        return self._dead[board]

    def _stalemate_value(self, n: int) -> int:
        return -n if self.config.stalemate_rule is StalemateRule.MOVER_LOSES else 0

    def _solve_component(self, root: Board) -> None:
        # forward exploration of the quiet-move graph inside root's level
        exits: dict[Board, list[int]] = {}
        quiet: dict[Board, list[Board]] = {}
        todo = [root]
        while todo:
            b = todo.pop()
            if b in exits or b in self._values:
                continue
            exits[b] = []
            quiet[b] = []
            for _, captured, child in relative_children(b, self.config):
                if captured:
                    exits[b].append(captured - self.value(child))
                else:
                    quiet[b].append(child)
                    if child not in self._values and child not in exits:
                        todo.append(child)

        nodes = list(exits)
        n = sum(root)
        stalemate = {b for b in nodes if not exits[b] and not quiet[b]}

        # liveness: some capture or stalemate is reachable by quiet moves
        parents: dict[Board, list[Board]] = {b: [] for b in nodes}
        for b in nodes:
            for c in quiet[b]:
                if c in parents:
                    parents[c].append(b)
        live = {b for b in nodes if exits[b] or b in stalemate}
        for b in nodes:
            if any(c in self._values and not self._dead[c] for c in quiet[b]):
                live.add(b)
        queue = deque(live)
        while queue:
            c = queue.popleft()
            for p in parents[c]:
                if p not in live:
                    live.add(p)
                    queue.append(p)

        fixed: dict[Board, int] = {}
        for b in nodes:
            self._dead[b] = b not in live
            if b in stalemate:
                fixed[b] = self._stalemate_value(n)
            elif b not in live:
                fixed[b] = split_value(b)

        def known(c: Board) -> int | None:
            if c in self._values:
                return self._values[c]
            return fixed.get(c)

        open_nodes = [b for b in nodes if b not in fixed]
        best_known = {}
        for b in open_nodes:
            opts = list(exits[b]) + [-known(c) for c in quiet[b] if known(c) is not None]
            best_known[b] = max(opts) if opts else None
        unknown_children = {b: [c for c in quiet[b] if known(c) is None] for b in open_nodes}
        unknown_parents: dict[Board, list[Board]] = {b: [] for b in open_nodes}
        for b in open_nodes:
            for c in unknown_children[b]:
                unknown_parents[c].append(b)

        forced: dict[Board, int] = {}
        for t in range(1, n + 1):
            win = self._attractor(t, open_nodes, best_known, unknown_children, unknown_parents)
            if not win:
                break
            for b in win:
                forced[b] = t

        for b in nodes:
            if b in fixed:
                self._values[b] = fixed[b]
        for b in open_nodes:
            if b in forced:
                self._values[b] = forced[b]
                continue
            kids = unknown_children[b]
            if any(c not in forced for c in kids):
                self._values[b] = 0
            else:
                opts = [-forced[c] for c in kids]
                if best_known[b] is not None:
                    opts.append(best_known[b])
                self._values[b] = max(opts)

    @staticmethod
    def _attractor(t, nodes, best_known, children, parents) -> set[Board]:
        """Boards whose mover can force at least ``t`` (t >= 1)."""
        win: set[Board] = set()
        lose: set[Board] = set()
        # a board is lost at t when every option gives its mover <= -t
        pending = {}
        queue = deque()
        for b in nodes:
            if best_known[b] is not None and best_known[b] >= t:
                win.add(b)
                queue.append(("win", b))
            elif best_known[b] is None or best_known[b] <= -t:
                pending[b] = len(children[b])
                if pending[b] == 0:
                    lose.add(b)
                    queue.append(("lose", b))
        while queue:
            kind, c = queue.popleft()
            for p in parents[c]:
                if kind == "lose":
                    if p not in win:
                        win.add(p)
                        queue.append(("win", p))
                elif p in pending and p not in lose:
                    pending[p] -= 1
                    if pending[p] == 0:
                        lose.add(p)
                        queue.append(("lose", p))
        return win

"""Database verification against the rules engine and the forward oracle."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..rules import DEFAULT_CONFIG, GameConfig, StalemateRule
from .db import SENTINEL, EndgameDatabase
from .godel import GodelIndex, count_positions, godel_rank, godel_unrank
from .oracle import ForwardOracle, relative_children, split_value


@dataclass(frozen=True)
class Mismatch:
    level: int
    rank: int
    board: tuple[int, ...]
    stored: int
    expected: int
    check: str  # "bounds", "consistency" or "oracle"


@dataclass
class VerifyReport:
    mode: str
    checked: int = 0
    mismatches: list[Mismatch] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def summary(self) -> str:
        lines = [f"mode: {self.mode}", f"checked: {self.checked}", f"mismatches: {len(self.mismatches)}"]
        for m in self.mismatches[:10]:
            lines.append(
                f"  {m.check} mismatch at level {m.level} rank {m.rank} board {m.board}: "
                f"stored {m.stored}, expected {m.expected}"
            )
        return "\n".join(lines)


def _targets(db: EndgameDatabase, exhaustive: int | None, sample: int | None, seed: int):
    if exhaustive is not None:
        top = min(exhaustive, db.max_seeds)
        return f"exhaustive(<= {top})", [(n, r) for n in range(top + 1) for r in range(count_positions(n))]
    sizes = np.array([count_positions(n) for n in range(db.max_seeds + 1)], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    rng = np.random.default_rng(seed)
    picks = rng.integers(0, offsets[-1], size=sample)
    out = []
    for p in picks:
        n = int(np.searchsorted(offsets, p, side="right") - 1)
        out.append((n, int(p - offsets[n])))
    return f"sampled({sample})", out


def verify(
    db: EndgameDatabase,
    exhaustive: int | None = None,
    sample: int | None = None,
    config: GameConfig = DEFAULT_CONFIG,
    seed: int = 0,
    oracle: ForwardOracle | None = None,
) -> VerifyReport:
    """Check stored values for self-consistency and against forward search.

    Exactly one of ``exhaustive`` (every entry up to that level) or ``sample``
    (that many uniformly drawn entries) selects the checked set.
    """
    if (exhaustive is None) == (sample is None):
        raise ValueError("choose exactly one of exhaustive=L or sample=K")
    oracle = oracle or ForwardOracle(config)
    mode, targets = _targets(db, exhaustive, sample, seed)
    report = VerifyReport(mode)
    stale = lambda n: -n if config.stalemate_rule is StalemateRule.MOVER_LOSES else 0  # noqa: E731
    for n, rank in targets:
        report.checked += 1
        board = godel_unrank(GodelIndex(n, rank))
        stored = int(db.values(n)[rank])

        def flag(expected: int, check: str) -> None:
            report.mismatches.append(Mismatch(n, rank, board, stored, expected, check))

        if stored + db.max_seeds == SENTINEL or abs(stored) > n:
            flag(oracle.value(board), "bounds")
            continue
        moves = relative_children(board, config)
        if not moves:
            expected = stale(n)
        elif oracle.is_dead(board):
            expected = split_value(board)
        else:
            backed = []
            for _, captured, child in moves:
                child_value = int(db.values(n - captured)[godel_rank(child).rank])
                backed.append(captured - child_value)
            expected = max(backed)
        if stored != expected:
            flag(expected, "consistency")
        reference = oracle.value(board)
        if stored != reference:
            flag(reference, "oracle")
    return report


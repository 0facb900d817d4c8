"""Godel numbering of boards by the combinatorial number system.

Boards with ``n`` seeds are ranked lexicographically over the pit tuple
(p0, ..., p11): (0, ..., 0, n) has rank 0 and (n, 0, ..., 0) has rank
C(n + 11, 11) - 1. The rank of a board is

    sum_i C(r_i + k_i, k_i) - C(r_i - p_i + k_i, k_i),   k_i = 11 - i,

where r_i is the number of seeds not yet placed before pit i.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .._accel import maybe_njit

N_PITS = 12
MAX_SEEDS = 48
# C(a, b) for a <= MAX_SEEDS + N_PITS, b <= N_PITS
BINOM = np.array(
    [[math.comb(a, b) for b in range(N_PITS + 1)] for a in range(MAX_SEEDS + N_PITS + 1)],
    dtype=np.int64,
)


class RankError(ValueError):
    pass


@dataclass(frozen=True)
class GodelIndex:
    n_seeds: int
    rank: int


def count_positions(n_seeds: int) -> int:
    """Number of 12-pit boards holding ``n_seeds`` seeds: C(n + 11, 11)."""
    if n_seeds < 0:
        raise RankError(f"n_seeds must be >= 0, got {n_seeds}")
    count = math.comb(n_seeds + N_PITS - 1, N_PITS - 1)
    if count > np.iinfo(np.int64).max:
        raise OverflowError(f"{count} positions at level {n_seeds} exceed a 64-bit index")
    return count


def godel_rank(board: Sequence[int]) -> GodelIndex:
    pits = [int(p) for p in board]
    if len(pits) != N_PITS or min(pits) < 0:
        raise RankError(f"not a 12-pit board: {board}")
    n = sum(pits)
    remaining = n
    rank = 0
    for i, p in enumerate(pits):
        k = N_PITS - 1 - i
        rank += math.comb(remaining + k, k) - math.comb(remaining - p + k, k)
        remaining -= p
    return GodelIndex(n, rank)


def godel_unrank(index: GodelIndex) -> tuple[int, ...]:
    n, rank = index.n_seeds, index.rank
    if not 0 <= rank < count_positions(n):
        raise RankError(f"rank {rank} out of range for {n} seeds")
    pits = []
    remaining = n
    for i in range(N_PITS - 1):
        k = N_PITS - 1 - i
        v = 0
        while True:
            block = math.comb(remaining - v + k - 1, k - 1)
            if rank < block:
                break
            rank -= block
            v += 1
        pits.append(v)
        remaining -= v
    pits.append(remaining)
    return tuple(pits)


@lru_cache(maxsize=None)
def _compositions(n: int, parts: int) -> np.ndarray:
    if parts == 1:
        return np.array([[n]], dtype=np.int8)
    blocks = []
    for v in range(n + 1):
        tail = _compositions(n - v, parts - 1)
        head = np.full((len(tail), 1), v, dtype=np.int8)
        blocks.append(np.hstack([head, tail]))
    return np.vstack(blocks)


def enumerate_level(n_seeds: int) -> np.ndarray:
    """All boards with ``n_seeds`` seeds as an (N, 12) int8 array in rank order."""
    if not 0 <= n_seeds <= MAX_SEEDS:
        raise RankError(f"level {n_seeds} outside 0..{MAX_SEEDS}")
    return _compositions(n_seeds, N_PITS).copy()


def rank_boards(boards: np.ndarray) -> np.ndarray:
    """Vectorised rank of each row of an (N, 12) array; each row ranks within its own level."""
    boards = np.asarray(boards, dtype=np.int64)
    remaining = boards.sum(axis=1)
    rank = np.zeros(len(boards), dtype=np.int64)
    for i in range(N_PITS - 1):
        k = N_PITS - 1 - i
        p = boards[:, i]
        rank += BINOM[remaining + k, k] - BINOM[remaining - p + k, k]
        remaining = remaining - p
    return rank


@maybe_njit()
def rank_kernel(board, binom):
    remaining = 0
    for i in range(12):
        remaining += board[i]
    rank = 0
    for i in range(11):
        k = 11 - i
        p = board[i]
        rank += binom[remaining + k, k] - binom[remaining - p + k, k]
        remaining -= p
    return rank


@maybe_njit()
def unrank_kernel(n, rank, binom, out):
    remaining = n
    for i in range(11):
        k = 11 - i
        v = 0
        while True:
            block = binom[remaining - v + k - 1, k - 1]
            if rank < block:
                break
            rank -= block
            v += 1
        out[i] = v
        remaining -= v
    out[11] = remaining

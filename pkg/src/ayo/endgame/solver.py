"""Retrograde construction of endgame values, level by level.

Every board is stored from the side to move (own row = pits 0-5); a child is
re-encoded by swapping rows. Level ``n`` holds the boards with ``n`` seeds.
A capturing move leads to an already solved lower level, a quiet move stays
inside level ``n``.

Value semantics (optimal capture differential still to come, mover's view):

* no legal move: stalemate, 0 when the game is cancelled, ``-n`` when the
  mover loses;
* dead board, from which no sequence of play reaches a capture or a
  stalemate: the game ends and each side keeps its own row, so the value is
  own-row seeds minus opponent-row seeds;
* otherwise ``max_m [captured(m) - value(child)]``, where play that circles
  inside the level forever yields 0.

The cyclic part is solved by iterating pessimistic and optimistic bounds
(``lo`` starts at ``-n``, ``hi`` at ``+n``) with synchronous sweeps until
neither moves. The value is then ``clip(0, lo, hi)``: positive only when the
mover can force it, negative only when the opponent can.
"""

from __future__ import annotations

import logging
import time
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import kernels
from .._accel import USE_NUMBA, maybe_njit
from ..rules import StalemateRule
from .godel import BINOM, MAX_SEEDS, enumerate_level, rank_boards, rank_kernel

log = logging.getLogger(__name__)

ILLEGAL = -1000


@dataclass
class LevelStats:
    level: int
    entries: int
    sweeps: int
    dead: int
    stalemates: int
    seconds: float


def _chunks(n: int, workers: int) -> list[tuple[int, int]]:
    workers = max(1, min(workers, n))
    bounds = np.linspace(0, n, workers + 1).astype(np.int64)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _run(parts: list[tuple[int, int]], fn: Callable[[int, int], object], pool: ThreadPoolExecutor | None):
    if pool is None or len(parts) == 1:
        return [fn(a, b) for a, b in parts]
    return list(pool.map(lambda ab: fn(*ab), parts))


# --- numba path -----------------------------------------------------------


@maybe_njit()
def _move_table_kernel(boards, start, stop, binom, cap, child, legal):
    board = np.empty(12, dtype=np.int64)
    after = np.empty(12, dtype=np.int64)
    swapped = np.empty(12, dtype=np.int64)
    for i in range(start, stop):
        for j in range(12):
            board[j] = boards[i, j]
        mask = kernels.legal_mask(board, 0)
        for m in range(6):
            if not (mask >> m) & 1:
                legal[i, m] = False
                cap[i, m] = 0
                child[i, m] = 0
                continue
            captured, _ = kernels.sow_capture(board, 0, m, after)
            for j in range(6):
                swapped[j] = after[j + 6]
                swapped[j + 6] = after[j]
            legal[i, m] = True
            cap[i, m] = captured
            child[i, m] = rank_kernel(swapped, binom)


@maybe_njit()
def _live_sweep_kernel(start, stop, legal, cap, child, live_old, live_new):
    changed = 0
    for i in range(start, stop):
        if live_old[i]:
            live_new[i] = True
            continue
        hit = False
        for m in range(6):
            if legal[i, m] and cap[i, m] == 0 and live_old[child[i, m]]:
                hit = True
                break
        live_new[i] = hit
        if hit:
            changed += 1
    return changed


@maybe_njit()
def _bound_sweep_kernel(start, stop, legal, cap, child, exitv, fixed, lo, hi, lo_new, hi_new):
    changed = 0
    for i in range(start, stop):
        if fixed[i]:
            lo_new[i] = lo[i]
            hi_new[i] = hi[i]
            continue
        best_lo = -1000
        best_hi = -1000
        for m in range(6):
            if not legal[i, m]:
                continue
            if cap[i, m] > 0:
                a = exitv[i, m]
                b = a
            else:
                c = child[i, m]
                a = -hi[c]
                b = -lo[c]
            if a > best_lo:
                best_lo = a
            if b > best_hi:
                best_hi = b
        lo_new[i] = best_lo
        hi_new[i] = best_hi
        if best_lo != lo[i] or best_hi != hi[i]:
            changed += 1
    return changed


# --- numpy path -----------------------------------------------------------


def _move_table_numpy(boards: np.ndarray, start: int, stop: int, cap, child, legal) -> None:
    b = boards[start:stop].astype(np.int16)
    rows = np.arange(len(b))
    for m in range(6):
        seeds = b[:, m]
        after = b.copy()
        after[:, m] = 0
        q, rem = np.divmod(seeds, 11)
        for j in range(1, 12):
            after[:, (m + j) % 12] += q + (j <= rem)
        landing = (m + (seeds - 1) % 11 + 1) % 12
        take = np.zeros_like(after, dtype=bool)
        active = seeds > 0
        for step in range(6):
            pos = landing - step
            ok = active & (pos >= 6)
            vals = after[rows, np.clip(pos, 0, 11)]
            ok &= (vals == 2) | (vals == 3)
            take[rows[ok], pos[ok]] = True
            active = ok
        captured = np.where(take, after, 0).sum(axis=1)
        opp_total = after[:, 6:].sum(axis=1)
        slam = captured == opp_total
        take[slam] = False
        captured[slam] = 0
        after[take] = 0
        legal[start:stop, m] = (seeds > 0) & (after[:, 6:].sum(axis=1) > 0)
        cap[start:stop, m] = np.where(legal[start:stop, m], captured, 0)
        swapped = np.concatenate([after[:, 6:], after[:, :6]], axis=1)
        child[start:stop, m] = np.where(legal[start:stop, m], rank_boards(swapped), 0)


def _live_sweep_numpy(start, stop, legal, cap, child, live_old, live_new):
    quiet = legal[start:stop] & (cap[start:stop] == 0)
    reach = (quiet & live_old[child[start:stop]]).any(axis=1)
    live_new[start:stop] = live_old[start:stop] | reach
    return int(np.count_nonzero(live_new[start:stop] != live_old[start:stop]))


def _bound_sweep_numpy(start, stop, legal, cap, child, exitv, fixed, lo, hi, lo_new, hi_new):
    sl = slice(start, stop)
    capture = cap[sl] > 0
    ch = child[sl]
    cand_lo = np.where(capture, exitv[sl], -hi[ch])
    cand_hi = np.where(capture, exitv[sl], -lo[ch])
    cand_lo[~legal[sl]] = ILLEGAL
    cand_hi[~legal[sl]] = ILLEGAL
    new_lo = np.where(fixed[sl], lo[sl], cand_lo.max(axis=1))
    new_hi = np.where(fixed[sl], hi[sl], cand_hi.max(axis=1))
    lo_new[sl] = new_lo
    hi_new[sl] = new_hi
    return int(np.count_nonzero((new_lo != lo[sl]) | (new_hi != hi[sl])))


_KERNELS = {
    "numba": (_move_table_kernel, _live_sweep_kernel, _bound_sweep_kernel),
    "numpy": (_move_table_numpy, _live_sweep_numpy, _bound_sweep_numpy),
}


def default_backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


def solve_level(
    n: int,
    lower: list[np.ndarray],
    stalemate_rule: StalemateRule,
    workers: int = 1,
    backend: str | None = None,
    pool: ThreadPoolExecutor | None = None,
) -> tuple[np.ndarray, LevelStats]:
    """Values (int8, rank order) for level ``n`` given the solved levels below it."""
    backend = backend or default_backend()
    move_table, live_sweep, bound_sweep = _KERNELS[backend]
    t0 = time.perf_counter()
    boards = enumerate_level(n)
    size = len(boards)
    parts = _chunks(size, workers)

    cap = np.zeros((size, 6), dtype=np.int16)
    child = np.zeros((size, 6), dtype=np.int64)
    legal = np.zeros((size, 6), dtype=bool)
    _run(parts, lambda a, b: move_table(boards, a, b, BINOM, cap, child, legal) if backend == "numba"
         else move_table(boards, a, b, cap, child, legal), pool)

    exitv = np.zeros((size, 6), dtype=np.int16)
    for c in range(1, n + 1):
        hit = cap == c
        if hit.any():
            exitv[hit] = c - lower[n - c][child[hit]].astype(np.int16)

    stalemate = ~legal.any(axis=1)
    live = stalemate | (cap > 0).any(axis=1)
    while True:
        nxt = np.empty_like(live)
        changed = sum(_run(parts, lambda a, b: live_sweep(a, b, legal, cap, child, live, nxt), pool))
        live = nxt
        if not changed:
            break
    dead = ~live

    lo = np.full(size, -n, dtype=np.int16)
    hi = np.full(size, n, dtype=np.int16)
    stale_value = -n if stalemate_rule is StalemateRule.MOVER_LOSES else 0
    lo[stalemate] = hi[stalemate] = stale_value
    split = (boards[:, :6].sum(axis=1, dtype=np.int16) - boards[:, 6:].sum(axis=1, dtype=np.int16))
    lo[dead] = hi[dead] = split[dead]
    fixed = stalemate | dead

    sweeps = 0
    while True:
        lo_new = np.empty_like(lo)
        hi_new = np.empty_like(hi)
        changed = sum(
            _run(parts, lambda a, b: bound_sweep(a, b, legal, cap, child, exitv, fixed, lo, hi, lo_new, hi_new), pool)
        )
        lo, hi = lo_new, hi_new
        sweeps += 1
        if not changed:
            break

    values = np.clip(np.zeros(size, dtype=np.int16), lo, hi).astype(np.int8)
    stats = LevelStats(n, size, sweeps, int(dead.sum()), int(stalemate.sum()), time.perf_counter() - t0)
    return values, stats


def solve_values(
    max_seeds: int,
    stalemate_rule: StalemateRule,
    workers: int = 1,
    backend: str | None = None,
    progress: Callable[[LevelStats], None] | None = None,
) -> list[np.ndarray]:
    if not 0 <= max_seeds <= MAX_SEEDS:
        raise ValueError(f"max_seeds must be in 0..{MAX_SEEDS}, got {max_seeds}")
    levels: list[np.ndarray] = []
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for n in range(max_seeds + 1):
            try:
                values, stats = solve_level(n, levels, stalemate_rule, workers, backend, pool)
            except MemoryError as exc:
                raise MemoryError(f"out of memory while solving level {n}") from exc
            log.info("level %d: %d entries, %d sweeps, %.2fs", n, stats.entries, stats.sweeps, stats.seconds)
            if progress is not None:
                progress(stats)
            levels.append(values)
    finally:
        if pool is not None:
            pool.shutdown()
    return levels

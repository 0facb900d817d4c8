"""Array kernels shared by search and the endgame solver.

Boards are int64 arrays of 12 absolute pit counts; ``mover`` is 0 (South) or
1 (North). Everything here is written in the numba-compilable subset and is
compiled by :func:`ayo._accel.maybe_njit` unless ``AYO_NUMBA=0``.
"""

from __future__ import annotations

import numpy as np

from ._accel import maybe_njit

LARGE = 1000.0

# params vector layout for the search kernel
P_REPETITION_LIMIT = 0
P_MAX_PLIES = 1
P_STALEMATE_LOSES = 2
P_TOTAL = 3


@maybe_njit()
def sow_capture(pits, mover, pit, out):
    """Play ``pit`` for ``mover`` writing the new board to ``out``.

    Returns (captured, landing). A capture that would empty the whole opposing
    row is forfeited.
    """
    for i in range(12):
        out[i] = pits[i]
    seeds = out[pit]
    out[pit] = 0
    pos = pit
    while seeds > 0:
        pos = (pos + 1) % 12
        if pos == pit:
            continue
        out[pos] += 1
        seeds -= 1
    opp_lo = 6 if mover == 0 else 0
    captured = 0
    p = pos
    while p >= opp_lo and p < opp_lo + 6 and (out[p] == 2 or out[p] == 3):
        captured += out[p]
        p -= 1
    if captured > 0:
        opp_total = 0
        for i in range(opp_lo, opp_lo + 6):
            opp_total += out[i]
        if captured == opp_total:
            return 0, pos
        p = pos
        while p >= opp_lo and p < opp_lo + 6 and (out[p] == 2 or out[p] == 3):
            out[p] = 0
            p -= 1
    return captured, pos


@maybe_njit()
def legal_mask(pits, mover):
    """Bit r set when the mover's r-th pit (0..5 from the mover's side) is legal."""
    own_lo = 6 * mover
    opp_lo = 6 - own_lo
    opp_seeds = 0
    for i in range(opp_lo, opp_lo + 6):
        opp_seeds += pits[i]
    mask = 0
    for r in range(6):
        seeds = pits[own_lo + r]
        if seeds > 0 and (opp_seeds > 0 or seeds >= 6 - r):
            mask |= 1 << r
    return mask


@maybe_njit()
def popcount6(mask):
    n = 0
    for r in range(6):
        n += (mask >> r) & 1
    return n


@maybe_njit()
def features(pits, stores, mover):
    """Store differential, row differential, opponent pits at 2-3, mobility differential."""
    own_lo = 6 * mover
    opp_lo = 6 - own_lo
    own_row = 0
    opp_row = 0
    vulnerable = 0
    for i in range(6):
        own_row += pits[own_lo + i]
        opp_row += pits[opp_lo + i]
        v = pits[opp_lo + i]
        if v == 2 or v == 3:
            vulnerable += 1
    f = np.empty(4, dtype=np.float64)
    f[0] = stores[mover] - stores[1 - mover]
    f[1] = own_row - opp_row
    f[2] = vulnerable
    f[3] = popcount6(legal_mask(pits, mover)) - popcount6(legal_mask(pits, 1 - mover))
    return f


@maybe_njit()
def evaluate_kernel(pits, stores, mover, weights):
    f = features(pits, stores, mover)
    total = 0.0
    for i in range(4):
        total += weights[i] * f[i]
    return total


@maybe_njit()
def _signed(d, remaining):
    if d > 0:
        return LARGE * d + remaining
    if d < 0:
        return LARGE * d - remaining
    return 0.0


@maybe_njit()
def terminal_value(pits, stores, mover, mask, hist, hist_mover, seg_start, hlen, ply, params, remaining):
    """Score of a terminal node from the mover's side, or NaN when play continues.

    Mirrors :func:`ayo.rules.status`: store majority, then stalemate, then
    repetition or the ply cap (row split).
    """
    total = params[P_TOTAL]
    own = stores[mover]
    opp = stores[1 - mover]
    if 2 * own > total or 2 * opp > total or (2 * own == total and 2 * opp == total):
        return _signed(own - opp, remaining)
    if mask == 0:
        if params[P_STALEMATE_LOSES] == 1:
            return -(LARGE * total + remaining)
        return 0.0
    count = 0
    for h in range(seg_start, hlen):
        if hist_mover[h] != mover:
            continue
        same = True
        for i in range(12):
            if hist[h, i] != pits[i]:
                same = False
                break
        if same:
            count += 1
    if count > params[P_REPETITION_LIMIT] or ply >= params[P_MAX_PLIES]:
        own_lo = 6 * mover
        opp_lo = 6 - own_lo
        for i in range(6):
            own += pits[own_lo + i]
            opp += pits[opp_lo + i]
        return _signed(own - opp, remaining)
    return np.nan


@maybe_njit()
def negamax(pits, stores, mover, depth, alpha, beta, prune, weights, hist, hist_mover, seg_start, hlen, ply, params, boards, counter):
    """Fixed-depth negamax over the real game.

    ``hist`` rows [seg_start, hlen) are the positions since the last capture,
    the current one last. ``boards`` is scratch space with one row per ply of
    remaining depth. Returns (value, best relative pit or -1). ``counter[0]``
    counts visited nodes.
    """
    counter[0] += 1
    mask = legal_mask(pits, mover)
    term = terminal_value(pits, stores, mover, mask, hist, hist_mover, seg_start, hlen, ply, params, depth)
    if not np.isnan(term):
        return term, -1
    if depth == 0:
        return evaluate_kernel(pits, stores, mover, weights), -1

    own_lo = 6 * mover
    child = boards[depth]
    child_stores = np.empty(2, dtype=np.int64)
    best = -np.inf
    best_rel = -1
    for r in range(6):
        if not (mask >> r) & 1:
            continue
        captured, _ = sow_capture(pits, mover, own_lo + r, child)
        child_stores[0] = stores[0]
        child_stores[1] = stores[1]
        child_stores[mover] += captured
        for i in range(12):
            hist[hlen, i] = child[i]
        hist_mover[hlen] = 1 - mover
        child_seg = hlen if captured > 0 else seg_start
        v, _ = negamax(child, child_stores, 1 - mover, depth - 1, -beta, -alpha, prune, weights,
                       hist, hist_mover, child_seg, hlen + 1, ply + 1, params, boards, counter)
        v = -v
        if v > best:
            best = v
            best_rel = r
        if prune:
            if best > alpha:
                alpha = best
            if alpha >= beta:
                break
    return best, best_rel

import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ayo.endgame import GodelIndex, RankError, count_positions, godel_rank, godel_unrank
from ayo.endgame.godel import enumerate_level, rank_boards


def boards_by_brute_force(n: int) -> list[tuple[int, ...]]:
    """Every 12-pit board with n seeds, in lexicographic order, via stars and bars."""
    out = []
    for bars in itertools.combinations(range(n + 11), 11):
        cuts = (-1,) + bars + (n + 11,)
        out.append(tuple(cuts[i + 1] - cuts[i] - 1 for i in range(12)))
    return sorted(out)


@pytest.mark.parametrize("n,expected", [(0, 1), (1, 12), (2, 78), (3, 364), (4, 1365)])
def test_level_counts(n, expected):
    assert count_positions(n) == expected == math.comb(n + 11, 11)


def test_empty_board():
    assert godel_rank((0,) * 12) == GodelIndex(0, 0)
    assert godel_unrank(GodelIndex(0, 0)) == (0,) * 12


def test_rank_extremes_at_two_seeds():
    assert godel_rank((0,) * 11 + (2,)) == GodelIndex(2, 0)
    assert godel_rank((2,) + (0,) * 11) == GodelIndex(2, 77)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_rank_order_is_lexicographic(n):
    brute = boards_by_brute_force(n)
    assert [godel_rank(b).rank for b in brute] == list(range(len(brute)))
    assert [tuple(row) for row in enumerate_level(n)] == brute


@given(st.lists(st.integers(0, 8), min_size=12, max_size=12))
def test_round_trip_random_boards(pits):
    idx = godel_rank(pits)
    assert idx.n_seeds == sum(pits)
    assert 0 <= idx.rank < count_positions(idx.n_seeds)
    assert godel_unrank(idx) == tuple(pits)


@given(st.integers(0, 48), st.data())
def test_unrank_then_rank(n, data):
    rank = data.draw(st.integers(0, count_positions(n) - 1))
    board = godel_unrank(GodelIndex(n, rank))
    assert sum(board) == n
    assert godel_rank(board) == GodelIndex(n, rank)


def test_vector_rank_matches_scalar():
    rng = np.random.default_rng(3)
    boards = rng.integers(0, 5, size=(500, 12))
    assert rank_boards(boards).tolist() == [godel_rank(b).rank for b in boards]


def test_bad_inputs():
    with pytest.raises(RankError):
        godel_unrank(GodelIndex(2, 78))
    with pytest.raises(RankError):
        godel_rank((1, 2, 3))
    with pytest.raises(RankError):
        count_positions(-1)

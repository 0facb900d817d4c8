import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from ayo.arena import MinimaxAgent, RandomAgent, play_match
from ayo.cbr import (
    CbrConfig,
    CbrError,
    Episode,
    EpisodeLibrary,
    PerceptronModel,
    casing_move,
    classify,
    correlation,
    harvest_episodes,
    hybrid_move,
    retrieve,
    similarities,
    similarity,
    train_perceptron,
)
from ayo.rules import SOUTH, GameStatus, StatusKind, apply_move, legal_moves, new_game, status
from ayo.search import alphabeta
from test_rules import random_walk

vectors = st.lists(st.integers(0, 20), min_size=12, max_size=12)
real_vectors = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=12, max_size=12)
positions = st.builds(lambda s, n: random_walk(s, n)[-1], st.integers(0, 2**32 - 1), st.integers(1, 80))


def pearson(x, y) -> float:
    """Two-pass product-moment correlation with compensated sums."""
    n = len(x)
    mx, my = math.fsum(x) / n, math.fsum(y) / n
    dx = [a - mx for a in x]
    dy = [b - my for b in y]
    num = math.fsum(a * b for a, b in zip(dx, dy))
    return num / math.sqrt(math.fsum(a * a for a in dx) * math.fsum(b * b for b in dy))


def non_constant(v) -> bool:
    return len(set(v)) > 1


# --- similarity -----------------------------------------------------------------


def test_self_similarity():
    x = (4,) * 11 + (0,)
    assert similarity(x, x) == 1.0


def test_affine_image():
    x = [3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8]
    assert similarity(x, [2 * v + 3 for v in x]) == pytest.approx(1.0, abs=1e-15)


def test_reversal():
    x = list(range(1, 13))
    assert similarity(x, x[::-1]) == -1.0


def test_fixed_random_pair():
    rng = np.random.default_rng(42)
    x, y = rng.integers(0, 15, 12).tolist(), rng.integers(0, 15, 12).tolist()
    assert abs(similarity(x, y) - pearson(x, y)) <= 1e-12


def test_constant_vector_is_degenerate():
    assert correlation((4,) * 12, tuple(range(12))) == (0.0, True)


def test_wrong_length():
    with pytest.raises(CbrError):
        similarity((1, 2), (3, 4))


@given(vectors, vectors)
def test_similarity_properties(x, y):
    assume(non_constant(x) and non_constant(y))
    r = similarity(x, y)
    assert -1.0 <= r <= 1.0
    assert r == similarity(y, x)
    assert abs(r - pearson(x, y)) <= 1e-12
    assert similarity(x, x) == pytest.approx(1.0, abs=1e-15)


@given(real_vectors, vectors, st.floats(0.01, 100), st.floats(-100, 100))
def test_affine_invariance(x, y, a, b):
    assume(non_constant(y) and max(x) - min(x) > 1e-3)
    assert similarity([a * v + b for v in x], y) == pytest.approx(similarity(x, y), abs=1e-9)


@given(st.lists(vectors, min_size=1, max_size=20), vectors)
def test_batch_matches_pairwise(rows, target):
    lib = EpisodeLibrary(Episode(tuple(r), 0) for r in rows)
    assert similarities(lib, target).tolist() == pytest.approx([similarity(r, target) for r in rows], abs=1e-12)


# --- retrieval ---------------------------------------------------------------------


def test_threshold_one_without_duplicates():
    lib = EpisodeLibrary([Episode((1, 2, 3, 4, 5, 6, 0, 0, 0, 0, 0, 1), 2), Episode((0,) * 11 + (5,), 1)])
    assert retrieve(lib, (6, 5, 4, 3, 2, 1, 0, 0, 0, 0, 1, 1), CbrConfig(beta=1.0)) == []


def test_target_retrieves_itself_first():
    target = Episode((1, 0, 3, 0, 2, 5, 4, 4, 0, 1, 0, 2), 4)
    lib = EpisodeLibrary([Episode((0, 1, 2, 3, 4, 5, 0, 0, 0, 0, 0, 0), 0), target, Episode((5, 5, 0, 0, 1, 2, 3, 0, 0, 0, 0, 9), 1)])
    ranked = retrieve(lib, target, CbrConfig(beta=0.9))
    assert ranked[0] == (target, 1.0)


def test_five_episode_ranking():
    rows = [
        (0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11),
        (1, 1, 2, 3, 5, 5, 6, 7, 9, 9, 10, 12),
        (11, 10, 9, 8, 7, 6, 5, 4, 3, 2, 1, 0),
        (0, 2, 1, 3, 5, 4, 6, 8, 7, 9, 11, 10),
        (3, 0, 4, 1, 5, 2, 6, 3, 7, 4, 8, 5),
    ]
    lib = EpisodeLibrary(Episode(r, i) for i, r in enumerate(rows))
    target = tuple(range(12))
    expected = sorted(
        (i for i, r in enumerate(rows) if pearson(r, target) >= 0.5), key=lambda i: -pearson(rows[i], target)
    )
    assert [ep.move_label for ep, _ in retrieve(lib, target, CbrConfig(beta=0.5))] == expected


def test_alpha_filters_on_game_value():
    a = Episode((1, 2, 3, 4, 5, 6, 0, 0, 0, 0, 0, 1), 0, 10)
    b = Episode((1, 2, 3, 4, 5, 6, 0, 0, 0, 0, 0, 1), 1, -3)
    lib = EpisodeLibrary([a, b])
    assert [ep for ep, _ in retrieve(lib, a, CbrConfig(alpha=0, beta=0.9))] == [b]


@given(st.lists(vectors, max_size=25), vectors, st.floats(-1, 1), st.integers(-5, 5))
def test_retrieval_is_sorted_and_filtered(rows, target, beta, alpha):
    lib = EpisodeLibrary(Episode(tuple(r), i % 6, (i % 11) - 5) for i, r in enumerate(rows))
    ranked = retrieve(lib, target, CbrConfig(alpha=alpha, beta=beta))
    sims = [s for _, s in ranked]
    assert sims == sorted(sims, reverse=True)
    assert all(s >= beta and ep.game_value <= alpha for ep, s in ranked)


def test_bad_beta():
    with pytest.raises(CbrError):
        CbrConfig(beta=1.5)


# --- perceptron ---------------------------------------------------------------------


def test_single_episode_is_memorised():
    ep = Episode((0, 3, 1, 0, 2, 0, 1, 1, 0, 4, 0, 0), 3)
    model = train_perceptron(EpisodeLibrary([ep]), rate=0.1, epochs=1)
    assert model.epochs_trained == 1
    assert classify(model, ep, range(6)) == 3


def separable_set(seed: int, size: int = 40) -> EpisodeLibrary:
    rng = np.random.default_rng(seed)
    eps = []
    while len(eps) < size:
        v = rng.integers(0, 10, 12)
        if v[0] != v[5]:
            eps.append(Episode(tuple(int(a) for a in v), 0 if v[0] > v[5] else 1))
    return EpisodeLibrary(eps)


def test_separable_set_reaches_zero_error():
    model = train_perceptron(separable_set(0), rate=0.1, epochs=500)
    assert model.epoch_errors[-1] == 0
    assert model.epochs_trained < 500


@given(st.integers(0, 2**32 - 1))
def test_training_error_never_increases(seed):
    lib = separable_set(seed)
    model = train_perceptron(lib, rate=0.1, epochs=2000)
    errs = model.epoch_errors
    assert all(a >= b for a, b in zip(errs, errs[1:]))
    assert errs[-1] == 0
    assert all(classify(model, ep, range(6)) == ep.move_label for ep in lib)


def test_training_preconditions():
    lib = EpisodeLibrary([Episode((1,) * 12, 0)])
    with pytest.raises(CbrError):
        train_perceptron(lib, rate=0)
    with pytest.raises(CbrError):
        train_perceptron(EpisodeLibrary())


def test_zero_model_picks_lowest_class():
    assert classify(PerceptronModel.zeros(), (4,) * 12, range(6)) == 0
    assert classify(PerceptronModel.zeros(), (4,) * 12, [3, 5]) == 3


@given(st.integers(0, 2**32 - 1), vectors, st.sets(st.integers(0, 5), min_size=1))
def test_classify_is_argmax(seed, target, legal):
    w = np.random.default_rng(seed).normal(size=(6, 13))
    model = PerceptronModel(w)
    x = list(target) + [1.0]
    acts = [math.fsum(a * b for a, b in zip(w[k], x)) for k in range(6)]
    best = max(sorted(legal), key=lambda k: acts[k])
    assert classify(model, target, legal) == best


def test_model_json_round_trip(tmp_path):
    model = train_perceptron(separable_set(1), 0.25, 50)
    model.save(tmp_path / "m.json")
    again = PerceptronModel.load(tmp_path / "m.json")
    assert np.array_equal(again.weights, model.weights)
    assert again.epoch_errors == model.epoch_errors


def test_library_file_round_trip(tmp_path):
    lib = EpisodeLibrary([Episode((1, 2, 3, 4, 5, 6, 0, 0, 0, 0, 0, 1), 2, -4), Episode((0,) * 11 + (5,), 1, 0.5)])
    lib.save(tmp_path / "lib.txt")
    assert (tmp_path / "lib.txt").read_text() == "1,2,3,4,5,6,0,0,0,0,0,1;2;-4\n0,0,0,0,0,0,0,0,0,0,0,5;1;0.5\n"
    assert EpisodeLibrary.load(tmp_path / "lib.txt").episodes == lib.episodes


def test_bad_library_line(tmp_path):
    (tmp_path / "lib.txt").write_text("1,2,3;0;0\n")
    with pytest.raises(CbrError, match="line 1"):
        EpisodeLibrary.load(tmp_path / "lib.txt")


# --- players --------------------------------------------------------------------------


def test_casing_uses_exact_match():
    state = random_walk(3, 9)[-1]
    label = legal_moves(state)[-1] - 6 * int(state.to_move)
    lib = EpisodeLibrary([Episode(state.relative_pits(), label)])
    assert casing_move(state, lib, PerceptronModel.zeros(), CbrConfig(beta=0.99)) == legal_moves(state)[-1]


def test_casing_falls_back_to_perceptron():
    state = random_walk(3, 9)[-1]
    lib = EpisodeLibrary([Episode((9, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1), 4)])
    w = np.zeros((6, 13))
    w[:, 12] = [0, 0, 1, 3, 2, 0]
    expected = max(
        (p - 6 * int(state.to_move) for p in legal_moves(state)), key=lambda k: (w[k, 12], -k)
    )
    assert casing_move(state, lib, PerceptronModel(w), CbrConfig(beta=1.0)) == expected + 6 * int(state.to_move)


def test_casing_on_opening_board():
    # the opening board is constant, so nothing is retrieved and the bias picks class 3
    lib = EpisodeLibrary(Episode(tuple(int(v) for v in np.roll(np.arange(12), i)), i % 6) for i in range(10))
    w = np.zeros((6, 13))
    w[3, 12] = 1.0
    assert casing_move(new_game(), lib, PerceptronModel(w)) == 3


@given(positions, st.lists(st.tuples(vectors, st.integers(0, 5)), max_size=8), st.integers(0, 5))
def test_players_only_return_legal_moves(state, rows, seed):
    assume(not status(state).is_terminal)
    rows = rows + [(list(state.relative_pits()), seed)]
    lib = EpisodeLibrary(Episode(tuple(v), k) for v, k in rows)
    model = PerceptronModel(np.random.default_rng(seed).normal(size=(6, 13)))
    assert casing_move(state, lib, model, CbrConfig(beta=0.5)) in legal_moves(state)
    assert hybrid_move(state, 2, library=lib, config=CbrConfig(beta=0.5)).move in legal_moves(state)


@given(positions, st.integers(1, 4))
def test_empty_library_is_plain_search(state, depth):
    assume(not status(state).is_terminal)
    d = hybrid_move(state, depth, library=EpisodeLibrary())
    assert d.move == alphabeta(state, depth).best_move
    assert not d.overridden and d.similarity_used is None


def test_agreeing_case_is_not_an_override():
    state = random_walk(5, 7)[-1]
    best = alphabeta(state, 3).best_move
    lib = EpisodeLibrary([Episode.from_state(state, best)])
    d = hybrid_move(state, 3, library=lib, config=CbrConfig(beta=0.9))
    assert d.move == best and not d.overridden


def test_disagreeing_case_overrides():
    state = random_walk(5, 7)[-1]
    best = alphabeta(state, 3).best_move
    other = next(p for p in legal_moves(state) if p != best)
    lib = EpisodeLibrary([Episode.from_state(state, other)])
    d = hybrid_move(state, 3, library=lib, config=CbrConfig(beta=0.9))
    assert d.move == other and d.overridden and d.similarity_used == 1.0


# --- harvesting ----------------------------------------------------------------------


def test_empty_harvest():
    assert len(harvest_episodes([])) == 0


def test_thirty_ply_game_gives_fifteen_winner_episodes():
    walk = random_walk(1, 30)
    moves = []
    for before, after in zip(walk, walk[1:]):
        pit = next(p for p in legal_moves(before) if apply_move(before, p).next.pits == after.pits)
        moves.append((before, pit))
    assert len(moves) == 30
    record = SimpleNamespace(moves=moves, captures=(26, 10), result=GameStatus(StatusKind.WIN_SOUTH, (26, 10)), opening_plies=0)
    lib = harvest_episodes([record], winner_only=True)
    assert len(lib) == 15
    assert all(ep.game_value == 16 for ep in lib)
    south_labels = [m for s, m in moves if s.to_move is SOUTH]
    assert [ep.move_label for ep in lib] == south_labels


def test_batch_harvest_counts_winner_plies():
    played = play_match(MinimaxAgent(2), RandomAgent(4), 50, base_seed=77, opening_plies=2)
    records = [rec for rec, _ in played]
    expected = sum(
        1
        for rec in records
        if rec.result.winner is not None
        for state, _ in rec.moves[rec.opening_plies:]
        if state.to_move is rec.result.winner
    )
    assert len(harvest_episodes(records)) == expected
    assert len(harvest_episodes(records, winner_only=False)) == sum(len(r.moves) - r.opening_plies for r in records)

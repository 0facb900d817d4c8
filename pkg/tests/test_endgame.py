import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ayo.endgame import (
    DatabaseError,
    EndgameDatabase,
    GodelIndex,
    SeedBoundError,
    best_move_from_db,
    count_positions,
    godel_unrank,
    move_values,
    probe,
    solve,
    verify,
)
from ayo.endgame.db import COUNT, HEADER, SENTINEL, pack_entries, packed_size, unpack_entries
from ayo.endgame.oracle import ForwardOracle, relative_children
from ayo.endgame.solver import solve_values
from ayo.rules import NORTH, SOUTH, GameConfig, GameState, StalemateRule, legal_moves, state_from_relative

LOSES = GameConfig(stalemate_rule=StalemateRule.MOVER_LOSES)
HAND_BOARD = (0, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 0)


def level_boards(n):
    return [godel_unrank(GodelIndex(n, r)) for r in range(count_positions(n))]


# --- packing -------------------------------------------------------------------


@given(st.lists(st.integers(0, SENTINEL), max_size=200))
def test_pack_round_trip(entries):
    packed = pack_entries(np.array(entries, dtype=np.uint8))
    assert len(packed) == packed_size(len(entries))
    assert unpack_entries(packed, len(entries)).tolist() == entries


def test_packing_is_msb_first():
    assert pack_entries(np.array([1, 127], dtype=np.uint8)) == bytes([0b00000011, 0b11111100])


# --- solved values -------------------------------------------------------------


def test_level_zero(db4):
    assert db4.values(0).tolist() == [0]


def test_hand_traced_two_seed_board(db4):
    # South's single seed feeds North's pit 6; taking both seeds would be a grand
    # slam, so nothing is captured and North is left with an unplayable row.
    assert db4.value_of_board(HAND_BOARD) == 0
    assert solve(2, LOSES).value_of_board(HAND_BOARD) == 2


@pytest.mark.parametrize("config", [GameConfig(), LOSES], ids=["cancelled", "mover-loses"])
def test_level_four_matches_forward_search(config):
    db = solve(4, config)
    oracle = ForwardOracle(config)
    for n in range(5):
        assert db.values(n).tolist() == [oracle.value(b) for b in level_boards(n)]


@pytest.mark.parametrize("config", [GameConfig(), LOSES], ids=["cancelled", "mover-loses"])
def test_six_seed_database_verifies(config, db6, db6_loses):
    db = db6 if config == GameConfig() else db6_loses
    report = verify(db, exhaustive=6, config=config)
    assert report.ok, report.summary()
    assert report.checked == sum(count_positions(n) for n in range(7))


def test_value_bound(db6):
    for n in range(7):
        assert np.abs(db6.values(n)).max(initial=0) <= n


def test_backends_agree():
    assert all(
        np.array_equal(a, b) for a, b in zip(solve_values(6, StalemateRule.CANCELLED, backend="numba"),
                                           solve_values(6, StalemateRule.CANCELLED, backend="numpy"))
    )


def test_worker_count_does_not_change_bytes(db6):
    assert solve(6, workers=4).to_bytes() == db6.to_bytes()
    assert solve(6, workers=3).to_bytes() == db6.to_bytes()


def test_pure_python_backend_in_subprocess(db4, tmp_path):
    code = (
        "import sys; from ayo.endgame import solve; from ayo._accel import backend_name;"
        "assert backend_name() == 'numpy', backend_name();"
        "sys.stdout.buffer.write(solve(4).to_bytes())"
    )
    env = dict(os.environ, AYO_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, check=True)
    assert out.stdout == db4.to_bytes()


# --- verify --------------------------------------------------------------------


def test_flipped_bit_is_reported(db4):
    # lowest bit of entry 10 at level 3: the value moves by one and stays in range
    report = verify(db4.with_flipped_bit(3, 7 * 10 + 6), exhaustive=4)
    assert not report.ok
    assert any(m.check == "consistency" for m in report.mismatches)
    assert "mismatches:" in report.summary()


def test_flipped_high_bit_is_out_of_bounds(db4):
    report = verify(db4.with_flipped_bit(3, 7 * 10), exhaustive=4)
    assert [(m.level, m.rank, m.check) for m in report.mismatches] == [(3, 10, "bounds")]


def test_sampled_verify(db6):
    report = verify(db6, sample=300, seed=5)
    assert report.ok and report.checked == 300


def test_verify_needs_one_mode(db4):
    with pytest.raises(ValueError):
        verify(db4)
    with pytest.raises(ValueError):
        verify(db4, exhaustive=2, sample=3)


# --- probing -------------------------------------------------------------------


def test_probe_empty_board(db4):
    assert probe(db4, GameState((0,) * 12, 24, 24)) == 0


def test_probe_beyond_bound(db4):
    with pytest.raises(SeedBoundError):
        probe(db4, GameState((1,) * 12, 18, 18))


def test_probe_under_other_rules(db4):
    with pytest.raises(DatabaseError, match="different rules"):
        probe(db4, GameState(HAND_BOARD, 23, 23), LOSES)


def test_probe_is_side_independent(db6):
    south = state_from_relative((0, 2, 0, 0, 1, 0, 1, 0, 0, 2, 0, 0), SOUTH)
    north = state_from_relative((0, 2, 0, 0, 1, 0, 1, 0, 0, 2, 0, 0), NORTH)
    assert probe(db6, south) == probe(db6, north)


@given(st.lists(st.integers(0, 3), min_size=12, max_size=12), st.sampled_from([SOUTH, NORTH]))
def test_probe_matches_forward_search(pits, side):
    pits = tuple(pits)
    if sum(pits) > 6:
        return
    state = state_from_relative(pits, side)
    assert probe(_DB6, state) == _ORACLE.value(pits)


def test_forced_move(db4):
    state = GameState((0, 0, 0, 0, 0, 3, 0, 0, 0, 0, 0, 0))
    assert legal_moves(state) == [5]
    assert best_move_from_db(db4, state) == 5


def test_immediate_win_is_preferred(db8):
    # pit 5 captures 5 of the 7 seeds left; pit 0 captures nothing
    state = GameState((1, 0, 0, 0, 0, 2, 1, 2, 0, 0, 0, 1), 20, 21)
    ranked = move_values(db8, state)
    assert [mv.pit for mv in ranked] == [5, 0]
    assert ranked[0].captured == 5 and ranked[0].value > ranked[1].value
    assert best_move_from_db(db8, state) == 5


def test_chosen_move_backs_up_to_probe(db6):
    rng = np.random.default_rng(11)
    checked = 0
    while checked < 100:
        n = int(rng.integers(1, 7))
        board = godel_unrank(GodelIndex(n, int(rng.integers(count_positions(n)))))
        state = state_from_relative(board, SOUTH if rng.random() < 0.5 else NORTH)
        if not legal_moves(state) or _ORACLE.is_dead(board):
            continue
        ranked = move_values(db6, state)
        assert ranked[0].value == probe(db6, state)
        assert ranked[0].pit == best_move_from_db(db6, state)
        checked += 1


def test_no_move_is_an_error(db4):
    with pytest.raises(DatabaseError):
        best_move_from_db(db4, GameState((1,) + (0,) * 11))


# --- file format -----------------------------------------------------------------


def test_save_load_round_trip(db4, tmp_path):
    path = tmp_path / "four.ayodb"
    db4.save(path)
    again = EndgameDatabase.load(path, GameConfig())
    assert again == db4
    assert all(np.array_equal(again.values(n), db4.values(n)) for n in range(5))


def test_file_size(db4, tmp_path):
    path = tmp_path / "four.ayodb"
    db4.save(path)
    counts = [1, 12, 78, 364, 1365]
    expected = HEADER.size + len(counts) * COUNT.size + sum((7 * c + 7) // 8 for c in counts)
    assert path.stat().st_size == expected == 1652


def test_truncated_file_names_the_level(db4, tmp_path):
    blob = db4.to_bytes()
    with pytest.raises(DatabaseError, match="level 4 is incomplete"):
        EndgameDatabase.from_bytes(blob[:-5])
    with pytest.raises(DatabaseError, match="level 3 is missing"):
        EndgameDatabase.from_bytes(blob[: HEADER.size + 3 * COUNT.size + 1 + 11 + 69])


@pytest.mark.parametrize("offset,value,message", [(0, b"X", "magic"), (5, b"\x09", "version"), (8, b"\x05", "entry_bits")])
def test_corrupt_header(db4, offset, value, message):
    blob = bytearray(db4.to_bytes())
    blob[offset:offset + 1] = value
    with pytest.raises(DatabaseError, match=message):
        EndgameDatabase.from_bytes(bytes(blob))


def test_trailing_bytes_rejected(db4):
    with pytest.raises(DatabaseError, match="trailing"):
        EndgameDatabase.from_bytes(db4.to_bytes() + b"\0")


def test_unsolved_entry_is_reported():
    db = EndgameDatabase.from_values([np.array([0]), np.full(12, SENTINEL - 1)])
    with pytest.raises(DatabaseError, match="unsolved"):
        db.entry(1, 3)


def test_failed_save_leaves_nothing(db4, tmp_path):
    target = tmp_path / "missing" / "db.ayodb"
    with pytest.raises(OSError):
        db4.save(target)
    assert not target.exists()
    assert list(tmp_path.iterdir()) == []


_DB6 = solve(6)
_ORACLE = ForwardOracle()


def test_relative_children_conserve_seeds():
    for board in level_boards(3):
        for _, captured, child in relative_children(board):
            assert sum(child) + captured == 3

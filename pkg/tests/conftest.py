import os

import pytest
from hypothesis import HealthCheck, settings

from ayo.arena import DbPerfectAgent, play_match
from ayo.cbr import harvest_episodes
from ayo.endgame import solve
from ayo.rules import GameConfig, StalemateRule

settings.register_profile(
    "ayo", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ayo"))

# 8 seeds: the reduced variant played against a fully solved database
VARIANT_PITS = (1, 1, 1, 1, 0, 0, 1, 1, 1, 1, 0, 0)
VARIANT = GameConfig(initial_pits=VARIANT_PITS)

_ACCEPTANCE: dict[int, str] = {}


def record_acceptance(number: int, ok: bool, detail: str) -> None:
    _ACCEPTANCE[number] = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(_ACCEPTANCE[number])


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])


@pytest.fixture(scope="session")
def variant_config() -> GameConfig:
    return VARIANT


@pytest.fixture(scope="session")
def db4():
    return solve(4)


@pytest.fixture(scope="session")
def db6():
    return solve(6)


@pytest.fixture(scope="session")
def db6_loses():
    return solve(6, GameConfig(stalemate_rule=StalemateRule.MOVER_LOSES))


@pytest.fixture(scope="session")
def db8():
    return solve(8)


@pytest.fixture(scope="session")
def variant_library(db8):
    """Winners' moves from 500 self-play games of the database player on the variant.

    Six random opening plies leave some games decided; with fewer, perfect play
    draws every game and there is no winner to learn from.
    """
    agent = DbPerfectAgent(db8)
    played = play_match(agent, agent, 500, VARIANT, base_seed=9000, opening_plies=6, workers=4)
    return harvest_episodes([rec for rec, _ in played], winner_only=True)

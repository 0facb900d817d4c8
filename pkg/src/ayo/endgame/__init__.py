from .db import (
    DatabaseError,
    EndgameDatabase,
    MoveValue,
    SeedBoundError,
    best_move_from_db,
    move_values,
    probe,
    solve,
)
from .godel import GodelIndex, RankError, count_positions, godel_rank, godel_unrank
from .verify import VerifyReport, verify

__all__ = [
    "DatabaseError",
    "EndgameDatabase",
    "GodelIndex",
    "MoveValue",
    "RankError",
    "SeedBoundError",
    "VerifyReport",
    "best_move_from_db",
    "count_positions",
    "godel_rank",
    "godel_unrank",
    "move_values",
    "probe",
    "solve",
    "verify",
]

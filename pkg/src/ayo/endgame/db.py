"""Bit-packed endgame database: construction, probing and the on-disk format.

File layout (all integers little-endian)::

    b"AYODB" 0x01
    max_seeds      u16
    entry_bits     u8   (7)
    rule digest    8 bytes
    per level 0..max_seeds:
        entry count  u64
        ceil(7 * count / 8) bytes, entries MSB-first in rank order

An entry stores ``value + max_seeds``; the all-ones pattern marks an unsolved
slot.
"""

from __future__ import annotations

import hashlib
import os
import struct
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .._io import write_atomic
from ..rules import (
    DEFAULT_CONFIG,
    GameConfig,
    GameState,
    apply_move,
    legal_moves,
)
from .godel import count_positions, godel_rank
from .solver import LevelStats, solve_values

MAGIC = b"AYODB"
VERSION = 1
ENTRY_BITS = 7
SENTINEL = (1 << ENTRY_BITS) - 1
HEADER = struct.Struct("<5sBHB8s")
COUNT = struct.Struct("<Q")


class DatabaseError(ValueError):
    pass


class SeedBoundError(DatabaseError):
    pass


def rule_digest(config: GameConfig) -> bytes:
    """8-byte fingerprint of the rules that change database values."""
    text = (
        f"ayo-endgame;v{VERSION};stalemate={config.stalemate_rule.value};"
        f"grand-slam={config.grand_slam_rule.value};cycles=zero;dead=row-split"
    )
    return hashlib.blake2b(text.encode(), digest_size=8).digest()


def pack_entries(stored: np.ndarray) -> bytes:
    stored = np.asarray(stored, dtype=np.uint8)
    bits = np.unpackbits(stored[:, None], axis=1)[:, 8 - ENTRY_BITS:]
    return np.packbits(bits.ravel()).tobytes()


def unpack_entries(data: bytes, count: int) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), count=count * ENTRY_BITS)
    bits = bits.reshape(count, ENTRY_BITS)
    weights = (1 << np.arange(ENTRY_BITS - 1, -1, -1)).astype(np.uint8)
    return (bits * weights).sum(axis=1, dtype=np.uint16).astype(np.uint8)


def packed_size(count: int) -> int:
    return (ENTRY_BITS * count + 7) // 8


@dataclass
class EndgameDatabase:
    max_seeds: int
    digest: bytes
    levels: list[bytes]
    entry_bits: int = ENTRY_BITS
    _decoded: dict[int, np.ndarray] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.entry_bits != ENTRY_BITS:
            raise DatabaseError(f"entry_bits must be {ENTRY_BITS}, got {self.entry_bits}")
        if self.max_seeds > SENTINEL // 2:
            raise DatabaseError(f"max_seeds {self.max_seeds} does not fit {ENTRY_BITS}-bit entries")
        if len(self.levels) != self.max_seeds + 1:
            raise DatabaseError("one packed level per seed count is required")
        for n, data in enumerate(self.levels):
            if len(data) != packed_size(count_positions(n)):
                raise DatabaseError(f"level {n} has {len(data)} bytes, expected {packed_size(count_positions(n))}")

    @classmethod
    def from_values(cls, values: list[np.ndarray], config: GameConfig = DEFAULT_CONFIG) -> EndgameDatabase:
        max_seeds = len(values) - 1
        levels = [pack_entries(np.asarray(v, dtype=np.int16) + max_seeds) for v in values]
        return cls(max_seeds, rule_digest(config), levels)

    def stored(self, level: int) -> np.ndarray:
        """Raw unsigned entries of a level (cached)."""
        if level not in self._decoded:
            self._decoded[level] = unpack_entries(self.levels[level], count_positions(level))
        return self._decoded[level]

    def values(self, level: int) -> np.ndarray:
        """Signed values of a level; unsolved slots are reported as ``SENTINEL - max_seeds``."""
        return self.stored(level).astype(np.int16) - self.max_seeds

    def entry(self, level: int, rank: int) -> int:
        """Decode a single entry straight from the packed bytes."""
        data = self.levels[level]
        bit = ENTRY_BITS * rank
        byte, offset = divmod(bit, 8)
        word = int.from_bytes(data[byte:byte + 2].ljust(2, b"\0"), "big")
        raw = (word >> (16 - offset - ENTRY_BITS)) & SENTINEL
        if raw == SENTINEL:
            raise DatabaseError(f"entry {rank} at level {level} is unsolved")
        return raw - self.max_seeds

    def check_rules(self, config: GameConfig) -> None:
        if rule_digest(config) != self.digest:
            raise DatabaseError("database was built under different rules (digest mismatch)")

    def value_of_board(self, rel_board) -> int:
        rel = tuple(int(v) for v in rel_board)
        n = sum(rel)
        if n > self.max_seeds:
            raise SeedBoundError(f"{n} seeds on the board, database holds up to {self.max_seeds}")
        return self.entry(n, godel_rank(rel).rank)

    def with_flipped_bit(self, level: int, bit: int) -> EndgameDatabase:
        data = bytearray(self.levels[level])
        data[bit // 8] ^= 0x80 >> (bit % 8)
        levels = list(self.levels)
        levels[level] = bytes(data)
        return EndgameDatabase(self.max_seeds, self.digest, levels)

    def to_bytes(self) -> bytes:
        parts = [HEADER.pack(MAGIC, VERSION, self.max_seeds, self.entry_bits, self.digest)]
        for n, data in enumerate(self.levels):
            parts.append(COUNT.pack(count_positions(n)))
            parts.append(data)
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, blob: bytes) -> EndgameDatabase:
        if len(blob) < HEADER.size:
            raise DatabaseError("corrupt header: file too short")
        magic, version, max_seeds, entry_bits, digest = HEADER.unpack_from(blob)
        if magic != MAGIC:
            raise DatabaseError("corrupt header: bad magic bytes")
        if version != VERSION:
            raise DatabaseError(f"corrupt header: unsupported version {version}")
        if entry_bits != ENTRY_BITS:
            raise DatabaseError(f"corrupt header: entry_bits {entry_bits}")
        pos = HEADER.size
        levels = []
        for n in range(max_seeds + 1):
            if pos + COUNT.size > len(blob):
                raise DatabaseError(f"truncated file: level {n} is missing")
            (count,) = COUNT.unpack_from(blob, pos)
            pos += COUNT.size
            if count != count_positions(n):
                raise DatabaseError(f"level {n} declares {count} entries, expected {count_positions(n)}")
            size = packed_size(count)
            if pos + size > len(blob):
                raise DatabaseError(f"truncated file: level {n} is incomplete")
            levels.append(blob[pos:pos + size])
            pos += size
        if pos != len(blob):
            raise DatabaseError("trailing bytes after the last level")
        return cls(max_seeds, digest, levels)

    def save(self, path: str | os.PathLike) -> None:
        write_atomic(Path(path), self.to_bytes())

    @classmethod
    def load(cls, path: str | os.PathLike, config: GameConfig | None = None) -> EndgameDatabase:
        db = cls.from_bytes(Path(path).read_bytes())
        if config is not None:
            db.check_rules(config)
        return db


def solve(
    max_seeds: int,
    config: GameConfig = DEFAULT_CONFIG,
    workers: int = 1,
    backend: str | None = None,
    progress: Callable[[LevelStats], None] | None = None,
) -> EndgameDatabase:
    """Build the database for every board holding at most ``max_seeds`` seeds."""
    values = solve_values(max_seeds, config.stalemate_rule, workers, backend, progress)
    return EndgameDatabase.from_values(values, config)


def probe(db: EndgameDatabase, state: GameState, config: GameConfig | None = None) -> int:
    """Optimal future capture differential for the side to move."""
    if config is not None:
        db.check_rules(config)
    return db.value_of_board(state.relative_pits())


@dataclass(frozen=True)
class MoveValue:
    pit: int
    captured: int
    value: int


def move_values(db: EndgameDatabase, state: GameState, config: GameConfig = DEFAULT_CONFIG) -> list[MoveValue]:
    """Backed-up value of every legal move, best first (value, then capture, then lowest pit)."""
    out = []
    for pit in legal_moves(state):
        res = apply_move(state, pit, config)
        backed = res.captured_now - db.value_of_board(res.next.relative_pits())
        out.append(MoveValue(pit, res.captured_now, backed))
    out.sort(key=lambda mv: (-mv.value, -mv.captured, mv.pit))
    return out


def best_move_from_db(db: EndgameDatabase, state: GameState, config: GameConfig = DEFAULT_CONFIG) -> int:
    ranked = move_values(db, state, config)
    if not ranked:
        raise DatabaseError("no legal move in this position")
    return ranked[0].pit

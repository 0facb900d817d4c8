"""Case-based move selection: episode memory, correlation retrieval, a
one-vs-rest perceptron, the casing player and the minimax override hybrid."""

from __future__ import annotations

import json
import math
import os
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._accel import maybe_njit
from ._io import write_atomic
from .rules import DEFAULT_CONFIG, ROW, GameConfig, GameState, legal_moves
from .search import DEFAULT_EVAL, EvalWeights, alphabeta

N_VALUES = 12
N_CLASSES = ROW


class CbrError(ValueError):
    pass


@dataclass(frozen=True)
class Episode:
    values: tuple[int, ...]
    move_label: int
    game_value: float = 0.0

    def __post_init__(self):
        if len(self.values) != N_VALUES:
            raise CbrError(f"an episode holds {N_VALUES} values, got {len(self.values)}")
        if min(self.values) < 0:
            raise CbrError("episode values must be non-negative")
        if not 0 <= self.move_label < N_CLASSES:
            raise CbrError(f"move label {self.move_label} outside 0..{N_CLASSES - 1}")

    @classmethod
    def from_state(cls, state: GameState, move: int = 0, game_value: float = 0.0) -> Episode:
        """Episode for ``state`` seen by its mover; ``move`` is an absolute pit."""
        return cls(state.relative_pits(), move - ROW * int(state.to_move), game_value)

    def to_line(self) -> str:
        gv = self.game_value
        gv_text = str(int(gv)) if float(gv).is_integer() else repr(float(gv))
        return f"{','.join(map(str, self.values))};{self.move_label};{gv_text}"

    @classmethod
    def from_line(cls, line: str) -> Episode:
        parts = line.strip().split(";")
        if len(parts) != 3:
            raise CbrError(f"expected 'v1,...,v12;label;game_value', got {line!r}")
        try:
            values = tuple(int(v) for v in parts[0].split(","))
            label = int(parts[1])
            gv = float(parts[2])
        except ValueError as exc:
            raise CbrError(f"bad episode line {line!r}: {exc}") from None
        if not math.isfinite(gv):
            raise CbrError(f"game value must be finite in {line!r}")
        return cls(values, label, int(gv) if gv.is_integer() else gv)


class EpisodeLibrary:
    """Ordered episode store with a precomputed centred matrix for retrieval."""

    def __init__(self, episodes: Iterable[Episode] = ()):
        self.episodes: list[Episode] = list(episodes)
        self.by_label: dict[int, list[int]] = {k: [] for k in range(N_CLASSES)}
        for i, ep in enumerate(self.episodes):
            self.by_label[ep.move_label].append(i)
        self._matrix = np.array([ep.values for ep in self.episodes], dtype=np.float64).reshape(-1, N_VALUES)
        self._game_values = np.array([ep.game_value for ep in self.episodes], dtype=np.float64)
        self._centred, self._ss, self._constant = _centre(self._matrix)

    def __len__(self) -> int:
        return len(self.episodes)

    def __iter__(self):
        return iter(self.episodes)

    def save(self, path: str | os.PathLike) -> None:
        text = "".join(ep.to_line() + "\n" for ep in self.episodes)
        write_atomic(Path(path), text.encode())

    @classmethod
    def load(cls, path: str | os.PathLike) -> EpisodeLibrary:
        episodes = []
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            if not line.strip():
                continue
            try:
                episodes.append(Episode.from_line(line))
            except CbrError as exc:
                raise CbrError(f"line {lineno}: {exc}") from None
        return cls(episodes)


@dataclass(frozen=True)
class CbrConfig:
    alpha: float = math.inf
    beta: float = 0.99

    def __post_init__(self):
        if not -1.0 <= self.beta <= 1.0:
            raise CbrError(f"beta must lie in [-1, 1], got {self.beta}")
        if math.isnan(self.alpha):
            raise CbrError("alpha must not be NaN")


DEFAULT_CBR = CbrConfig()


# --- similarity ---------------------------------------------------------------


def _centre(matrix: np.ndarray):
    # n * (x - mean) keeps integer boards in exact integer arithmetic
    n = matrix.shape[1]
    centred = n * matrix - matrix.sum(axis=1, keepdims=True)
    ss = (centred * centred).sum(axis=1)
    constant = (matrix == matrix[:, :1]).all(axis=1) if len(matrix) else np.zeros(0, dtype=bool)
    return centred, ss, constant


def _as_vector(x) -> np.ndarray:
    vals = x.values if isinstance(x, Episode) else x
    arr = np.asarray(vals, dtype=np.float64)
    if arr.shape != (N_VALUES,):
        raise CbrError(f"similarity needs two {N_VALUES}-vectors, got shape {arr.shape}")
    return arr


def correlation(x: Episode | Sequence[float], y: Episode | Sequence[float]) -> tuple[float, bool]:
    """Product-moment correlation and a flag telling whether it was degenerate."""
    cx, sx, kx = _centre(_as_vector(x)[None, :])
    cy, sy, ky = _centre(_as_vector(y)[None, :])
    if kx[0] or ky[0]:
        return 0.0, True
    r = float((cx[0] * cy[0]).sum() / math.sqrt(sx[0] * sy[0]))
    return min(1.0, max(-1.0, r)), False


def similarity(x: Episode | Sequence[float], y: Episode | Sequence[float]) -> float:
    return correlation(x, y)[0]


def similarities(library: EpisodeLibrary, target: Episode | Sequence[float]) -> np.ndarray:
    """Correlation of ``target`` with every library episode (0 where degenerate)."""
    if not len(library):
        return np.zeros(0)
    ct, st, kt = _centre(_as_vector(target)[None, :])
    if kt[0]:
        return np.zeros(len(library))
    with np.errstate(invalid="ignore", divide="ignore"):
        r = (library._centred * ct[0]).sum(axis=1) / np.sqrt(library._ss * st[0])
    r[library._constant] = 0.0
    return np.clip(r, -1.0, 1.0)


def retrieve(library: EpisodeLibrary, target: Episode | Sequence[float],
             config: CbrConfig = DEFAULT_CBR) -> list[tuple[Episode, float]]:
    """Episodes meeting both thresholds, most similar first (stable on ties)."""
    sims = similarities(library, target)
    keep = np.flatnonzero((sims >= config.beta) & (library._game_values <= config.alpha))
    order = keep[np.argsort(-sims[keep], kind="stable")]
    return [(library.episodes[i], float(sims[i])) for i in order]


# --- perceptron ---------------------------------------------------------------


@maybe_njit()
def _argmax_errors(x, labels, weights):
    n, width = x.shape
    wrong = 0
    for i in range(n):
        best = 0
        best_act = -np.inf
        for k in range(weights.shape[0]):
            act = 0.0
            for j in range(width):
                act += weights[k, j] * x[i, j]
            if act > best_act:
                best_act = act
                best = k
        if best != labels[i]:
            wrong += 1
    return wrong


@maybe_njit()
def _train_kernel(x, labels, weights, pocket, rate, epochs, errors):
    n, width = x.shape
    classes = weights.shape[0]
    best_wrong = _argmax_errors(x, labels, pocket)
    for epoch in range(epochs):
        updates = 0
        for i in range(n):
            for k in range(classes):
                act = 0.0
                for j in range(width):
                    act += weights[k, j] * x[i, j]
                out = 1 if act > 0.0 else 0
                target = 1 if labels[i] == k else 0
                if out != target:
                    step = rate * (target - out)
                    for j in range(width):
                        weights[k, j] += step * x[i, j]
                    updates += 1
        wrong = _argmax_errors(x, labels, weights)
        if wrong < best_wrong or updates == 0:
            best_wrong = wrong
            pocket[:, :] = weights
        errors[epoch] = best_wrong
        if updates == 0:
            return epoch + 1
    return epochs


@dataclass
class PerceptronModel:
    weights: np.ndarray  # (6, 13), last column is the bias
    learning_rate: float = 0.1
    epochs_trained: int = 0
    epoch_errors: list[int] = field(default_factory=list)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.shape != (N_CLASSES, N_VALUES + 1):
            raise CbrError(f"weights must be {N_CLASSES}x{N_VALUES + 1}, got {self.weights.shape}")
        if not np.isfinite(self.weights).all():
            raise CbrError("perceptron weights must be finite")

    @classmethod
    def zeros(cls) -> PerceptronModel:
        return cls(np.zeros((N_CLASSES, N_VALUES + 1)))

    def activations(self, target: Episode | Sequence[float]) -> np.ndarray:
        return self.weights @ np.append(_as_vector(target), 1.0)

    def to_json(self) -> str:
        return json.dumps(
            {
                "weights": self.weights.tolist(),
                "learning_rate": self.learning_rate,
                "epochs_trained": self.epochs_trained,
                "epoch_errors": list(self.epoch_errors),
            },
            indent=1,
        )

    @classmethod
    def from_json(cls, text: str) -> PerceptronModel:
        try:
            data = json.loads(text)
            return cls(np.array(data["weights"], dtype=np.float64), float(data["learning_rate"]),
                       int(data["epochs_trained"]), [int(e) for e in data.get("epoch_errors", [])])
        except (KeyError, TypeError, ValueError) as exc:
            raise CbrError(f"bad model file: {exc}") from None

    def save(self, path: str | os.PathLike) -> None:
        write_atomic(Path(path), self.to_json().encode())

    @classmethod
    def load(cls, path: str | os.PathLike) -> PerceptronModel:
        return cls.from_json(Path(path).read_text())


def train_perceptron(library: EpisodeLibrary, rate: float = 0.1, epochs: int = 100) -> PerceptronModel:
    """Rosenblatt updates on six one-vs-rest units, episodes in library order.

    The returned weights are the best seen at the end of any epoch (fewest
    argmax errors over the library), so ``epoch_errors`` never increases.
    Stops early after an epoch with no update.
    """
    if not len(library):
        raise CbrError("cannot train on an empty library")
    if not rate > 0:
        raise CbrError(f"learning rate must be positive, got {rate}")
    if epochs < 1:
        raise CbrError(f"epochs must be >= 1, got {epochs}")
    x = np.hstack([library._matrix, np.ones((len(library), 1))])
    labels = np.array([ep.move_label for ep in library.episodes], dtype=np.int64)
    weights = np.zeros((N_CLASSES, N_VALUES + 1))
    pocket = np.zeros_like(weights)
    errors = np.zeros(epochs, dtype=np.int64)
    ran = int(_train_kernel(x, labels, weights, pocket, float(rate), int(epochs), errors))
    return PerceptronModel(pocket, float(rate), ran, errors[:ran].tolist())


def classify(model: PerceptronModel, target: Episode | Sequence[float], legal: Iterable[int]) -> int:
    """Legal relative pit with the highest activation, lowest index on ties."""
    legal = sorted(set(legal))
    if not legal:
        raise CbrError("no legal class to choose from")
    acts = model.activations(target)
    return max(legal, key=lambda k: (acts[k], -k))


# --- players ------------------------------------------------------------------


def _relative_legal(state: GameState) -> list[int]:
    base = ROW * int(state.to_move)
    return [p - base for p in legal_moves(state)]


def _first_legal(ranked: list[tuple[Episode, float]], legal: list[int]) -> tuple[int, float] | None:
    for ep, sim in ranked:
        if ep.move_label in legal:
            return ep.move_label, sim
    return None


def casing_move(state: GameState, library: EpisodeLibrary, model: PerceptronModel,
                config: CbrConfig = DEFAULT_CBR) -> int:
    """Best retrieved legal label, else the perceptron's best legal class (absolute pit)."""
    legal = _relative_legal(state)
    if not legal:
        raise CbrError("no legal move in this position")
    base = ROW * int(state.to_move)
    target = state.relative_pits()
    hit = _first_legal(retrieve(library, target, config), legal) if len(library) else None
    if hit is not None:
        return hit[0] + base
    return classify(model, target, legal) + base


@dataclass(frozen=True)
class HybridDecision:
    move: int
    overridden: bool
    similarity_used: float | None
    search: object = field(default=None, compare=False, repr=False)


def hybrid_move(state: GameState, depth: int, weights: EvalWeights = DEFAULT_EVAL,
                library: EpisodeLibrary | None = None, config: CbrConfig = DEFAULT_CBR,
                game_config: GameConfig = DEFAULT_CONFIG) -> HybridDecision:
    """Alpha-beta move unless a retrieved episode proposes a different legal move."""
    result = alphabeta(state, depth, weights, game_config)
    if result.best_move is None:
        raise CbrError("no legal move in this position")
    if library is None or not len(library):
        return HybridDecision(result.best_move, False, None, result)
    hit = _first_legal(retrieve(library, state.relative_pits(), config), _relative_legal(state))
    if hit is None:
        return HybridDecision(result.best_move, False, None, result)
    move = hit[0] + ROW * int(state.to_move)
    return HybridDecision(move, move != result.best_move, hit[1], result)


def harvest_episodes(games: Iterable, winner_only: bool = True) -> EpisodeLibrary:
    """Episodes from game records: every (position, move) of the winner, or of both sides.

    ``game_value`` is the final capture differential from the mover's side.
    Drawn games contribute nothing when ``winner_only`` is set, and random
    opening plies are skipped.
    """
    episodes = []
    for record in games:
        south, north = record.captures
        winner = record.result.winner
        if winner_only and winner is None:
            continue
        for state, move in record.moves[getattr(record, "opening_plies", 0):]:
            if winner_only and state.to_move is not winner:
                continue
            diff = south - north if int(state.to_move) == 0 else north - south
            episodes.append(Episode.from_state(state, move, diff))
    return EpisodeLibrary(episodes)

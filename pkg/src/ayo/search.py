"""Minimax and alpha-beta search with a linear evaluation, plus solution trees.

Search runs in the compiled :func:`ayo.kernels.negamax` kernel. Values are
from the side to move; terminal nodes score ``LARGE`` times the final capture
differential, nudged toward nearer results.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import kernels
from .rules import DEFAULT_CONFIG, ROW, GameConfig, GameState, StalemateRule

LARGE = kernels.LARGE
DEFAULT_WEIGHTS = (10.0, 1.0, 2.0, 1.0)


@dataclass(frozen=True)
class EvalWeights:
    """Coefficients for store diff, row diff, opponent pits at 2-3, mobility diff."""

    w: tuple[float, float, float, float] = DEFAULT_WEIGHTS

    def __post_init__(self):
        w = tuple(float(x) for x in self.w)
        if len(w) != 4 or not all(math.isfinite(x) for x in w):
            raise ValueError(f"EvalWeights needs 4 finite coefficients, got {self.w}")
        object.__setattr__(self, "w", w)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.w, dtype=np.float64)


DEFAULT_EVAL = EvalWeights()


@dataclass(frozen=True)
class SearchResult:
    value: float
    best_move: int | None
    nodes: int
    depth: int


def _arrays(state: GameState):
    return np.asarray(state.pits, dtype=np.int64), np.asarray(
        (state.captured_south, state.captured_north), dtype=np.int64
    )


def features(state: GameState) -> np.ndarray:
    pits, stores = _arrays(state)
    return kernels.features(pits, stores, int(state.to_move))


def evaluate(state: GameState, weights: EvalWeights = DEFAULT_EVAL) -> float:
    """Linear polynomial of the four features, from the mover's perspective.

    This is the static evaluator only; terminal positions are scored by the
    search itself.
    """
    pits, stores = _arrays(state)
    return float(kernels.evaluate_kernel(pits, stores, int(state.to_move), weights.as_array()))


def _search(state: GameState, depth: int, weights: EvalWeights, config: GameConfig, prune: bool) -> SearchResult:
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    pits, stores = _arrays(state)
    hlen = len(state.history)
    hist = np.zeros((hlen + depth + 1, 12), dtype=np.int64)
    hist_mover = np.zeros(hlen + depth + 1, dtype=np.int64)
    for i, (board, side) in enumerate(state.history):
        hist[i] = board
        hist_mover[i] = int(side)
    params = np.array(
        [
            config.repetition_limit,
            config.max_plies,
            1 if config.stalemate_rule is StalemateRule.MOVER_LOSES else 0,
            state.total_seeds,
        ],
        dtype=np.int64,
    )
    boards = np.zeros((depth + 1, 12), dtype=np.int64)
    counter = np.zeros(1, dtype=np.int64)
    value, rel = kernels.negamax(
        pits, stores, int(state.to_move), depth, -np.inf, np.inf, prune, weights.as_array(),
        hist, hist_mover, 0, hlen, state.ply, params, boards, counter,
    )
    best = None if rel < 0 else int(rel) + ROW * int(state.to_move)
    return SearchResult(float(value) + 0.0, best, int(counter[0]), depth)


def minimax(state: GameState, depth: int, weights: EvalWeights = DEFAULT_EVAL,
            config: GameConfig = DEFAULT_CONFIG) -> SearchResult:
    """Full-width fixed-depth minimax (negamax form); ties go to the lowest pit."""
    return _search(state, depth, weights, config, prune=False)


def alphabeta(state: GameState, depth: int, weights: EvalWeights = DEFAULT_EVAL,
              config: GameConfig = DEFAULT_CONFIG) -> SearchResult:
    """Alpha-beta with natural move order; same value and move as :func:`minimax`."""
    return _search(state, depth, weights, config, prune=True)


def is_proven_win(value: float) -> bool:
    return value >= LARGE


# --- explicit trees and the Stockman equality --------------------------------


class NodeKind(Enum):
    MAX = "max"
    MIN = "min"
    LEAF = "leaf"


@dataclass(frozen=True)
class ExplicitTree:
    kind: NodeKind
    value: float | None = None
    children: tuple[ExplicitTree, ...] = field(default=())

    def __post_init__(self):
        if self.kind is NodeKind.LEAF:
            if self.value is None or self.children:
                raise ValueError("a leaf carries a value and no children")
        elif not self.children:
            raise ValueError("an internal node needs at least one child")

    @classmethod
    def leaf(cls, value: float) -> ExplicitTree:
        return cls(NodeKind.LEAF, value)

    @classmethod
    def max_node(cls, *children: ExplicitTree) -> ExplicitTree:
        return cls(NodeKind.MAX, None, tuple(children))

    @classmethod
    def min_node(cls, *children: ExplicitTree) -> ExplicitTree:
        return cls(NodeKind.MIN, None, tuple(children))

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)


class TreeTooLarge(ValueError):
    pass


MAX_TREE_NODES = 100_000
MAX_SOLUTION_TREES = 2_000_000


def tree_value(tree: ExplicitTree) -> float:
    """Plain minimax value: max at max nodes, min at min nodes."""
    if tree.kind is NodeKind.LEAF:
        return tree.value
    vals = [tree_value(c) for c in tree.children]
    return max(vals) if tree.kind is NodeKind.MAX else min(vals)


def _count(tree: ExplicitTree, pick_one: NodeKind) -> int:
    if tree.kind is NodeKind.LEAF:
        return 1
    counts = [_count(c, pick_one) for c in tree.children]
    return sum(counts) if tree.kind is pick_one else math.prod(counts)


def solution_trees(tree: ExplicitTree, pick_one: NodeKind) -> list[tuple[float, ...]]:
    """Leaf values of every solution tree.

    ``pick_one`` names the node kind that keeps exactly one child; the other
    kind keeps all of them. MAX gives the min solution trees, MIN the max ones.
    """
    if tree.kind is NodeKind.LEAF:
        return [(tree.value,)]
    per_child = [solution_trees(c, pick_one) for c in tree.children]
    if tree.kind is pick_one:
        return [t for trees in per_child for t in trees]
    return [tuple(itertools.chain.from_iterable(combo)) for combo in itertools.product(*per_child)]


def solution_tree_check(tree: ExplicitTree) -> tuple[float, float, float]:
    """Return (f, max over min solution trees of g, min over max solution trees of g).

    A min solution tree keeps one child at max nodes and all children at min
    nodes; its g is the smallest leaf. Max solution trees are the dual.
    """
    if tree.size() > MAX_TREE_NODES:
        raise TreeTooLarge(f"tree has more than {MAX_TREE_NODES} nodes")
    for kind in (NodeKind.MAX, NodeKind.MIN):
        if _count(tree, kind) > MAX_SOLUTION_TREES:
            raise TreeTooLarge("too many solution trees to enumerate")
    f = tree_value(tree)
    lower = max(min(leaves) for leaves in solution_trees(tree, NodeKind.MAX))
    upper = min(max(leaves) for leaves in solution_trees(tree, NodeKind.MIN))
    return f, lower, upper


def random_tree(rng: np.random.Generator, max_branching: int = 3, max_depth: int = 4,
                root: NodeKind = NodeKind.MAX, values: Sequence[int] = range(-20, 21)) -> ExplicitTree:
    """Random alternating max/min tree with integer leaves."""
    values = list(values)

    def build(kind: NodeKind, depth: int) -> ExplicitTree:
        if depth == max_depth or (depth > 0 and rng.random() < 0.25):
            return ExplicitTree.leaf(float(values[rng.integers(len(values))]))
        nxt = NodeKind.MIN if kind is NodeKind.MAX else NodeKind.MAX
        n = int(rng.integers(1, max_branching + 1))
        return ExplicitTree(kind, None, tuple(build(nxt, depth + 1) for _ in range(n)))

    return build(root, 0)

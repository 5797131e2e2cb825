"""Sparse term-vector routing: scores tool relevance to an intent and picks
the token-budget-optimal subset.

Tool descriptions and intents are embedded as TF-IDF vectors over a shared
vocabulary (IDF = ln((1 + N) / (1 + df)) + 1), relevance is cosine
similarity, and subset selection is an exact 0/1 knapsack over integer
token costs. A bounded LRU cache short-circuits near-duplicate intents.
"""

from __future__ import annotations

import math
import re
import threading
from collections import Counter, OrderedDict
from dataclasses import dataclass, field
from typing import Any, Optional

from .errors import IntentGateError
from .registry import ToolRegistry

DEFAULT_SIMILARITY_THRESHOLD = 0.97
DEFAULT_TOKEN_BUDGET = 512
DEFAULT_CACHE_CAPACITY = 1024

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


class EmptyRegistry(IntentGateError):
    """An index cannot be built over zero tools."""


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumeric runs, drop tokens shorter than 2."""
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if len(t) >= 2]


@dataclass(frozen=True)
class TermVector:
    """Sparse nonnegative term weights; zero-weight entries are never stored."""

    weights: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        assert all(w > 0.0 for w in self.weights.values())

    def norm(self) -> float:
        return math.sqrt(sum(w * w for w in self.weights.values()))

    def dot(self, other: "TermVector") -> float:
        a, b = self.weights, other.weights
        if len(b) < len(a):
            a, b = b, a
        return sum(w * b[t] for t, w in a.items() if t in b)

    def scale(self, factor: float) -> "TermVector":
        return TermVector({t: w * factor for t, w in self.weights.items()})


def cosine_similarity(a: TermVector, b: TermVector) -> float:
    na, nb = a.norm(), b.norm()
    if na == 0.0 or nb == 0.0:
        return 0.0
    return a.dot(b) / (na * nb)


@dataclass(frozen=True)
class RoutingIndex:
    vocabulary: dict[str, int]  # term -> document frequency
    tool_vectors: dict[str, TermVector]
    token_costs: dict[str, int]
    corpus_size: int

    def idf(self, term: str) -> float:
        df = self.vocabulary.get(term, 0)
        return math.log((1 + self.corpus_size) / (1 + df)) + 1.0


def build_index(registry: ToolRegistry) -> RoutingIndex:
    """Index every tool's description as one document."""
    if len(registry) == 0:
        raise EmptyRegistry("cannot index an empty registry")
    docs = {schema.name: tokenize(schema.description) for schema in registry}
    vocabulary: dict[str, int] = Counter()
    for terms in docs.values():
        vocabulary.update(set(terms))
    index = RoutingIndex(
        vocabulary=dict(vocabulary),
        tool_vectors={},
        token_costs={schema.name: schema.token_cost for schema in registry},
        corpus_size=len(registry),
    )
    for name, terms in docs.items():
        index.tool_vectors[name] = _weigh(index, Counter(terms))
    return index


def _weigh(index: RoutingIndex, counts: Counter) -> TermVector:
    weights = {
        term: tf * index.idf(term)
        for term, tf in counts.items()
        if term in index.vocabulary
    }
    return TermVector({t: w for t, w in weights.items() if w > 0.0})


def embed(index: RoutingIndex, text: str) -> TermVector:
    """TF x IDF over in-vocabulary terms; out-of-vocabulary terms are dropped."""
    return _weigh(index, Counter(tokenize(text)))


def similarities(index: RoutingIndex, intent_vector: TermVector) -> dict[str, float]:
    return {
        name: cosine_similarity(intent_vector, vec)
        for name, vec in index.tool_vectors.items()
    }


def select_tools(index: RoutingIndex, intent_vector: TermVector, budget: int) -> list[str]:
    """Pick the similarity-maximizing tool subset within the token budget.

    Exact 0/1 knapsack over integer token costs. Zero-similarity tools are
    excluded outright. The result is ordered by descending similarity, with
    ties broken lexicographically by tool name.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    sims = similarities(index, intent_vector)
    items = [
        (name, sims[name], index.token_costs[name])
        for name in sorted(sims)
        if sims[name] > 0.0 and index.token_costs[name] <= budget
    ]
    chosen = _knapsack(items, budget)
    return sorted(chosen, key=lambda name: (-sims[name], name))


def _knapsack(items: list[tuple[str, float, int]], budget: int) -> tuple[str, ...]:
    # dp[w] = best (value, cost, names) reachable with total cost <= w.
    # Among equal-value subsets prefer lower cost, then the lexicographically
    # smallest name tuple, so the selected set is canonical.
    dp: list[Optional[tuple[float, int, tuple[str, ...]]]] = [(0.0, 0, ())] + [None] * budget
    for name, value, cost in items:
        for w in range(budget, cost - 1, -1):
            base = dp[w - cost]
            if base is None:
                continue
            cand = (base[0] + value, base[1] + cost, base[2] + (name,))
            cur = dp[w]
            if cur is None or _better(cand, cur):
                dp[w] = cand
    best = (0.0, 0, ())
    for cell in dp:
        if cell is not None and _better(cell, best):
            best = cell
    return best[2]


def _better(a: tuple[float, int, tuple[str, ...]], b: tuple[float, int, tuple[str, ...]]) -> bool:
    if a[0] != b[0]:
        return a[0] > b[0]
    if a[1] != b[1]:
        return a[1] < b[1]
    return a[2] < b[2]


@dataclass(frozen=True)
class CacheEntry:
    intent_vector: TermVector
    response: Any
    created_at: float


class CognitiveCache:
    """Similarity-thresholded response cache (bounded LRU).

    Lookups may run concurrently; inserts are serialized. The cache is an
    optimization only, never an authority.
    """

    def __init__(self, capacity: int = DEFAULT_CACHE_CAPACITY):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._entries: OrderedDict[int, CacheEntry] = OrderedDict()
        self._next_id = 0
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._entries)

    def lookup(
        self, intent_vector: TermVector, threshold: float = DEFAULT_SIMILARITY_THRESHOLD
    ) -> Optional[CacheEntry]:
        """Best entry with similarity >= threshold, or None on a miss."""
        if not 0.0 <= threshold <= 1.0:
            raise ValueError("threshold must lie in [0, 1]")
        best_key, best_sim = None, -1.0
        for key, entry in list(self._entries.items()):
            sim = cosine_similarity(intent_vector, entry.intent_vector)
            if sim > best_sim:
                best_key, best_sim = key, sim
        if best_key is None or best_sim < threshold:
            return None
        with self._lock:
            if best_key in self._entries:
                self._entries.move_to_end(best_key)
        return self._entries.get(best_key)

    def insert(self, intent_vector: TermVector, response: Any, created_at: float) -> None:
        with self._lock:
            self._entries[self._next_id] = CacheEntry(intent_vector, response, created_at)
            self._next_id += 1
            while len(self._entries) > self.capacity:
                self._entries.popitem(last=False)

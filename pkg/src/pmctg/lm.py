"""Causal language-model backends.

The builtin backend is an interpolated Kneser-Ney n-gram model: the
highest order uses raw counts, lower orders use continuation counts
(number of distinct left extensions), and the recursion bottoms out in a
uniform distribution over the predictable ids, which keeps every
conditional strictly positive and summing to exactly 1.

Prediction space: every vocabulary id except BOS/MASK/CLS/SEP. EOS is
predictable (sentence termination), BOS appears only in contexts.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyCorpusError
from .text import (
    BOS_ID,
    CLS_ID,
    EOS_ID,
    MASK_ID,
    NUM_SPECIALS,
    SEP_ID,
    Corpus,
    Sentence,
    Token,
    Vocabulary,
)

FORWARD = "forward"
BACKWARD = "backward"

# ids that are never predicted by any causal backend
_NON_PREDICTABLE = (BOS_ID, MASK_ID, CLS_ID, SEP_ID)

_DIST_CACHE_CAP = 4096


class CausalLMHandle(ABC):
    """Shared surface of builtin and remote causal language models.

    ``direction`` is bookkeeping only: a backward handle expects callers
    to pass the reversed suffix as the prefix.
    """

    direction: str = FORWARD
    backend: str = "builtin"

    @abstractmethod
    def top_candidates(
        self,
        prefix: Sequence[Token],
        top_k: int,
        exclude_surfaces: frozenset[str] = frozenset(),
    ) -> list[tuple[Token, float]]:
        """Top-k next tokens (specials excluded), probabilities renormalized."""

    @abstractmethod
    def mean_nll(self, tokens: Sequence[Token], include_eos: bool = False) -> float:
        """Average negative log-likelihood per token."""


class _ContextEntry:
    """Per-context count data, prepared for both scalar and vector queries."""

    __slots__ = ("counts", "ids", "values", "denom", "types")

    def __init__(self, counts: dict[int, int]):
        self.counts = counts
        items = sorted(counts.items())
        self.ids = np.array([w for w, _ in items], dtype=np.intp)
        self.values = np.array([c for _, c in items], dtype=np.float64)
        self.denom = float(self.values.sum())
        self.types = len(items)


class KneserNeyLM(CausalLMHandle):
    """Interpolated Kneser-Ney n-gram model over a fixed vocabulary."""

    backend = "builtin"

    def __init__(
        self,
        vocab: Vocabulary,
        order: int,
        discount: float,
        raw_tables: list[dict[tuple[int, ...], dict[int, int]]],
        direction: str = FORWARD,
    ):
        if order < 1:
            raise ValueError("order must be >= 1")
        if not 0.0 < discount < 1.0:
            raise ValueError("discount must lie strictly between 0 and 1")
        if len(raw_tables) != order:
            raise ValueError("need one raw count table per order")
        self.vocab = vocab
        self.order = order
        self.discount = discount
        self.direction = direction
        # raw_tables[k-1]: context tuple of length k-1 -> {word id: count}
        self._raw = raw_tables
        self._tables = self._build_effective_tables()
        pred = np.ones(vocab.size, dtype=bool)
        for sid in _NON_PREDICTABLE:
            pred[sid] = False
        self._predictable = pred
        base = np.zeros(vocab.size, dtype=np.float64)
        base[pred] = 1.0 / pred.sum()
        self._base = base
        self._dist_cache: dict[tuple[int, tuple[int, ...]], np.ndarray] = {}

    def _build_effective_tables(self) -> list[dict[tuple[int, ...], _ContextEntry]]:
        """Level k table: raw counts at the top, continuation counts below."""
        levels: list[dict[tuple[int, ...], dict[int, int]]] = [
            {} for _ in range(self.order)
        ]
        levels[self.order - 1] = self._raw[self.order - 1]
        for k in range(self.order - 1, 0, -1):
            cont: dict[tuple[int, ...], dict[int, int]] = {}
            for ctx, words in self._raw[k].items():
                inner = ctx[1:]
                bucket = cont.setdefault(inner, {})
                for w in words:
                    bucket[w] = bucket.get(w, 0) + 1
            levels[k - 1] = cont
        return [
            {ctx: _ContextEntry(words) for ctx, words in level.items()}
            for level in levels
        ]

    def _context(self, prefix_ids: Sequence[int]) -> tuple[int, ...]:
        """BOS-pad and truncate a prefix to the model's context length."""
        need = self.order - 1
        padded = (BOS_ID,) * need + tuple(prefix_ids)
        return padded[len(padded) - need :] if need else ()

    def _prob(self, level: int, ctx: tuple[int, ...], token_id: int) -> float:
        if level == 0:
            return float(self._base[token_id])
        entry = self._tables[level - 1].get(ctx)
        lower_ctx = ctx[1:] if ctx else ()
        if entry is None:
            return self._prob(level - 1, lower_ctx, token_id)
        lower = self._prob(level - 1, lower_ctx, token_id)
        c = entry.counts.get(token_id, 0)
        return (max(c - self.discount, 0.0) + self.discount * entry.types * lower) / entry.denom

    def _dist(self, level: int, ctx: tuple[int, ...]) -> np.ndarray:
        if level == 0:
            return self._base
        key = (level, ctx)
        cached = self._dist_cache.get(key)
        if cached is not None:
            return cached
        entry = self._tables[level - 1].get(ctx)
        lower_ctx = ctx[1:] if ctx else ()
        lower = self._dist(level - 1, lower_ctx)
        if entry is None:
            vec = lower
        else:
            vec = lower * (self.discount * entry.types / entry.denom)
            vec[entry.ids] += np.maximum(entry.values - self.discount, 0.0) / entry.denom
        if len(self._dist_cache) >= _DIST_CACHE_CAP:
            self._dist_cache.clear()
        self._dist_cache[key] = vec
        return vec

    def token_prob(self, prefix_ids: Sequence[int], token_id: int) -> float:
        """Smoothed P(token | prefix); strictly positive on predictable ids."""
        return self._prob(self.order, self._context(prefix_ids), token_id)

    def distribution(self, prefix_ids: Sequence[int]) -> np.ndarray:
        """Full conditional distribution over the vocabulary.

        Zero at BOS/MASK/CLS/SEP, strictly positive elsewhere, sums to 1.
        The returned array is shared with an internal cache; do not mutate.
        """
        return self._dist(self.order, self._context(prefix_ids))

    def _own_ids(self, tokens: Sequence[Token]) -> list[int]:
        """Map tokens into this model's vocabulary by surface (OOV -> UNK),
        so handles stay usable as judges for foreign-vocabulary sentences."""
        return [self.vocab.lookup(t.surface) for t in tokens]

    def top_candidates(
        self,
        prefix: Sequence[Token],
        top_k: int,
        exclude_surfaces: frozenset[str] = frozenset(),
    ) -> list[tuple[Token, float]]:
        if top_k < 1:
            raise ValueError("top_k must be >= 1")
        vec = self.distribution(self._own_ids(prefix)).copy()
        vec[:NUM_SPECIALS] = 0.0  # no special-token candidates, EOS/UNK included
        for surface in exclude_surfaces:
            if surface in self.vocab:
                vec[self.vocab.lookup(surface)] = 0.0
        k = min(top_k, int(np.count_nonzero(vec)))
        if k == 0:
            return []
        # stable top-k: probability desc, id asc on ties
        order = np.lexsort((np.arange(len(vec)), -vec))[:k]
        probs = vec[order]
        probs = probs / probs.sum()
        return [
            (self.vocab.token(int(i)), float(p)) for i, p in zip(order, probs)
        ]

    def mean_nll(self, tokens: Sequence[Token], include_eos: bool = False) -> float:
        ids = self._own_ids(tokens)
        total = 0.0
        for i, w in enumerate(ids):
            total -= math.log(self.token_prob(ids[:i], w))
        m = len(ids)
        if include_eos:
            total -= math.log(self.token_prob(ids, EOS_ID))
            m += 1
        return total / m

    def ngram_counts(self) -> list[int]:
        """Number of distinct raw n-grams per order (1-based)."""
        return [
            sum(len(words) for words in table.values()) for table in self._raw
        ]

    @property
    def raw_tables(self) -> list[dict[tuple[int, ...], dict[int, int]]]:
        return self._raw


def train_kn(
    corpus: Corpus,
    order: int = 3,
    discount: float = 0.75,
    direction: str = FORWARD,
) -> KneserNeyLM:
    """Count n-grams and build an interpolated KN model.

    Sequences are padded with BOS x (order-1) and terminated with EOS;
    every real target (sentence tokens plus EOS) contributes one n-gram
    per order. A backward model is trained on reversed sequences.
    """
    if len(corpus) == 0:
        raise EmptyCorpusError("cannot train on an empty corpus")
    raw: list[dict[tuple[int, ...], dict[int, int]]] = [{} for _ in range(order)]
    pad = (BOS_ID,) * (order - 1)
    for seq in corpus.sequences:
        if direction == BACKWARD:
            seq = tuple(reversed(seq))
        padded = pad + tuple(seq) + (EOS_ID,)
        for t in range(order - 1, len(padded)):
            w = padded[t]
            for k in range(1, order + 1):
                ctx = padded[t - k + 1 : t]
                raw[k - 1].setdefault(ctx, {})
                bucket = raw[k - 1][ctx]
                bucket[w] = bucket.get(w, 0) + 1
    return KneserNeyLM(corpus.vocabulary, order, discount, raw, direction)


def next_token_distribution(
    lm: CausalLMHandle, prefix: Sequence[Token], top_k: int
) -> list[tuple[Token, float]]:
    """Top-k candidate tokens after a prefix, renormalized to sum to 1.

    For a backward-direction handle the prefix is the reversed suffix.
    """
    return lm.top_candidates(prefix, top_k)


def sequence_nll(
    lm: CausalLMHandle, sentence: Sentence, include_eos: bool = False
) -> float:
    """Average negative log-likelihood of a sentence.

    Search scoring excludes the terminal EOS factor; evaluation includes
    it (include_eos=True), adding it as the (m+1)-th factor.
    """
    return lm.mean_nll(sentence.tokens, include_eos=include_eos)


@dataclass(frozen=True)
class LMStats:
    """Summary printed after training (vocab size, n-grams per order)."""

    vocab_size: int
    ngrams_per_order: tuple[int, ...]

    def describe(self) -> str:
        parts = [f"vocab size: {self.vocab_size}"]
        for i, n in enumerate(self.ngrams_per_order, start=1):
            parts.append(f"{i}-grams: {n}")
        return "\n".join(parts)


def lm_stats(lm: KneserNeyLM) -> LMStats:
    return LMStats(lm.vocab.size, tuple(lm.ngram_counts()))

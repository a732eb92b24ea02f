"""Masked contextual encoder backends.

The builtin encoder is deliberately linear: each vocabulary token gets a
static vector (PPMI co-occurrence row, window 2, projected to D dims by
a seeded Gaussian matrix), and the contextual vector at position i is a
1/distance-weighted sum of the *other* unmasked tokens' static vectors.
Linearity gives a closed form for two-mask impacts, which the test suite
exploits; a remote transformer backend supplies fidelity behind the same
interface.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Collection, Sequence

import numpy as np

from .text import Corpus, Token, Vocabulary

DEFAULT_DIM = 64
DEFAULT_WINDOW = 2


def decay_weight(distance: int) -> float:
    """Context contribution weight by token distance."""
    return 1.0 / distance


class EncoderHandle(ABC):
    """Masked contextual encoder: one D-vector per input position."""

    backend: str = "builtin"

    @property
    @abstractmethod
    def dim(self) -> int: ...

    @abstractmethod
    def encode(
        self, tokens: Sequence[Token], masked_positions: Collection[int] = ()
    ) -> np.ndarray:
        """(len(tokens), dim) array; masked positions contribute to nothing."""

    @abstractmethod
    def sentence_vector(self, tokens: Sequence[Token]) -> np.ndarray:
        """Pooled whole-sentence representation."""

    def masked_vector(
        self, tokens: Sequence[Token], masked_positions: Collection[int], position: int
    ) -> np.ndarray:
        """Single position of encode(); backends may shortcut it."""
        return self.encode(tokens, masked_positions)[position]


class PPMIEncoder(EncoderHandle):
    """Static-vector encoder with distance-decayed linear contexts.

    Invariants the rest of the system relies on:
      * H(x \\ M)_i = sum over j not in M, j != i of w(|i-j|) * e(x_j)
      * sentence vector = mean of the tokens' static vectors
    Special tokens never co-occur in corpora, so their rows are zero.
    """

    backend = "builtin"

    _STATIC_CACHE_CAP = 512

    def __init__(
        self,
        vectors: np.ndarray,
        vocab: Vocabulary,
        window: int = DEFAULT_WINDOW,
        seed: int = 0,
    ):
        if vectors.shape[0] != vocab.size:
            raise ValueError("one static vector per vocabulary id required")
        self.vectors = vectors.astype(np.float64)
        self.vocab = vocab
        self.window = window
        self.seed = seed
        # benign caches: recomputation is cheap, entries are read-only
        self._statics_cache: dict[tuple[int, ...], np.ndarray] = {}
        self._row_cache: dict[tuple[int, int], np.ndarray] = {}

    def _statics(self, ids: tuple[int, ...]) -> np.ndarray:
        hit = self._statics_cache.get(ids)
        if hit is None:
            if len(self._statics_cache) >= self._STATIC_CACHE_CAP:
                self._statics_cache.clear()
            hit = self.vectors[list(ids)]
            self._statics_cache[ids] = hit
        return hit

    def _weight_row(self, n: int, position: int) -> np.ndarray:
        key = (n, position)
        hit = self._row_cache.get(key)
        if hit is None:
            dist = np.abs(np.arange(n, dtype=np.float64) - position)
            dist[position] = np.inf
            hit = 1.0 / dist
            self._row_cache[key] = hit
        return hit

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def static_vector(self, token: Token) -> np.ndarray:
        return self.vectors[token.id]

    def _weights(self, n: int) -> np.ndarray:
        idx = np.arange(n, dtype=np.float64)
        dist = np.abs(idx[:, None] - idx[None, :])
        with np.errstate(divide="ignore"):
            w = 1.0 / dist
        np.fill_diagonal(w, 0.0)
        return w

    def encode(
        self, tokens: Sequence[Token], masked_positions: Collection[int] = ()
    ) -> np.ndarray:
        ids = tuple(t.id for t in tokens)
        statics = self._statics(ids)
        weights = self._weights(len(ids))
        if masked_positions:
            weights[:, list(masked_positions)] = 0.0
        return weights @ statics

    def masked_vector(
        self, tokens: Sequence[Token], masked_positions: Collection[int], position: int
    ) -> np.ndarray:
        ids = tuple(t.id for t in tokens)
        row = self._weight_row(len(ids), position)
        if masked_positions:
            row = row.copy()
            for m in masked_positions:
                row[m] = 0.0
        return row @ self._statics(ids)

    def sentence_vector(self, tokens: Sequence[Token]) -> np.ndarray:
        ids = [t.id for t in tokens]
        return self.vectors[ids].mean(axis=0)


def cooccurrence_counts(corpus: Corpus, window: int = DEFAULT_WINDOW) -> np.ndarray:
    """Symmetric within-window co-occurrence count matrix (V x V)."""
    size = corpus.vocabulary.size
    counts = np.zeros((size, size), dtype=np.float64)
    for seq in corpus.sequences:
        n = len(seq)
        for i in range(n):
            a = seq[i]
            for offset in range(1, window + 1):
                j = i + offset
                if j >= n:
                    break
                b = seq[j]
                counts[a, b] += 1.0
                counts[b, a] += 1.0
    return counts


def ppmi_matrix(counts: np.ndarray) -> np.ndarray:
    """Positive pointwise mutual information of a co-occurrence matrix."""
    total = counts.sum()
    if total == 0:
        return np.zeros_like(counts)
    row = counts.sum(axis=1, keepdims=True)
    col = counts.sum(axis=0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = counts * total / (row * col)
        pmi = np.log(ratio)
    pmi[~np.isfinite(pmi)] = 0.0
    return np.maximum(pmi, 0.0)


def build_ppmi_encoder(
    corpus: Corpus,
    dim: int = DEFAULT_DIM,
    window: int = DEFAULT_WINDOW,
    seed: int = 0,
) -> PPMIEncoder:
    """PPMI rows projected to ``dim`` by a seeded Gaussian matrix."""
    ppmi = ppmi_matrix(cooccurrence_counts(corpus, window))
    rng = np.random.default_rng(seed)
    projection = rng.standard_normal((corpus.vocabulary.size, dim)) / np.sqrt(dim)
    return PPMIEncoder(ppmi @ projection, corpus.vocabulary, window=window, seed=seed)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; 0 when either vector is zero."""
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def encoder_sentence_vector(enc: EncoderHandle, tokens: Sequence[Token]) -> np.ndarray:
    return enc.sentence_vector(tokens)

"""Perturbed-masking impacts, per-token edit scores, position sampling.

The impact of token j on token i is the Euclidean distance between i's
contextual vector with {i} masked and with {i, j} masked. A token whose
impact on its neighbors is low sits incongruently in its chunk, gets a
high edit score, and is more likely to be sampled as the edit position.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Collection, Sequence

import numpy as np

from .encoder import EncoderHandle
from .text import CLS_ID, SEP_ID, Sentence, Token

CLS_TOKEN = Token(CLS_ID, "[CLS]")
SEP_TOKEN = Token(SEP_ID, "[SEP]")

_TIE_VALUE = 0.5  # min-max convention when all values coincide


def frame(tokens: Sequence[Token]) -> tuple[Token, ...]:
    """Wrap content tokens with the CLS/SEP boundary pair."""
    return (CLS_TOKEN,) + tuple(tokens) + (SEP_TOKEN,)


def impact(enc: EncoderHandle, tokens: Sequence[Token], j: int, i: int) -> float:
    """Impact of the token at j on the token at i (framed indices).

    Exactly two encoder calls: mask {i}, then mask {i, j}; the distance
    between the two vectors at position i is the impact.
    """
    if i == j:
        raise ValueError("impact requires distinct source and target")
    only_target = enc.masked_vector(tokens, frozenset((i,)), i)
    both = enc.masked_vector(tokens, frozenset((i, j)), i)
    return float(np.linalg.norm(only_target - both))


class MemoEncoder(EncoderHandle):
    """Per-invocation cache so shared mask sets are encoded once."""

    def __init__(self, inner: EncoderHandle):
        self.inner = inner
        self.backend = inner.backend
        self._cache: dict[tuple[frozenset[int], int], np.ndarray] = {}

    @property
    def dim(self) -> int:
        return self.inner.dim

    def encode(self, tokens, masked_positions: Collection[int] = ()):
        return self.inner.encode(tokens, masked_positions)

    def sentence_vector(self, tokens):
        return self.inner.sentence_vector(tokens)

    def masked_vector(self, tokens, masked_positions, position):
        key = (frozenset(masked_positions), position)
        hit = self._cache.get(key)
        if hit is None:
            hit = self.inner.masked_vector(tokens, masked_positions, position)
            self._cache[key] = hit
        return hit


@dataclass
class EditScoreVector:
    """Per-content-token edit scores and the derived sampling distribution."""

    scores: np.ndarray         # ES_i, one per content token
    probabilities: np.ndarray  # softmax(ES)
    raw_impacts: np.ndarray    # (n, 2): impact on right / left neighbor

    def __len__(self) -> int:
        return len(self.scores)


def softmax(values: np.ndarray) -> np.ndarray:
    shifted = values - np.max(values)
    exp = np.exp(shifted)
    return exp / exp.sum()


def minmax_normalize(values: np.ndarray) -> np.ndarray:
    lo = float(values.min())
    hi = float(values.max())
    if hi - lo < 1e-12:
        return np.full_like(values, _TIE_VALUE)
    return (values - lo) / (hi - lo)


def adjacent_impacts(enc: EncoderHandle, sentence: Sentence) -> np.ndarray:
    """(n, 2) raw impacts of each content token on its framed neighbors.

    Column 0: impact on the right neighbor, column 1: on the left; the
    neighbors of boundary tokens are the CLS/SEP frame positions.
    """
    framed = frame(sentence.tokens)
    memo = MemoEncoder(enc)
    n = len(sentence)
    out = np.zeros((n, 2), dtype=np.float64)
    for i in range(n):
        p = i + 1
        out[i, 0] = impact(memo, framed, p, p + 1)
        out[i, 1] = impact(memo, framed, p, p - 1)
    return out


def edit_scores(enc: EncoderHandle, sentence: Sentence) -> EditScoreVector:
    """Edit score and edit probability for every content token.

    Impacts are min-max normalized across all (token, neighbor) pairs of
    the sentence before entering the 1 - mean(neighbor impacts) formula,
    then the scores pass through a softmax.
    """
    raw = adjacent_impacts(enc, sentence)
    normalized = minmax_normalize(raw)
    scores = 1.0 - normalized.mean(axis=1)
    return EditScoreVector(scores, softmax(scores), raw)


def mean_adjacent_impact(enc: EncoderHandle, sentence: Sentence) -> float:
    """Sentence-level congruence: mean over tokens of the two-neighbor impact mean."""
    return float(adjacent_impacts(enc, sentence).mean())


def sample_position(
    esv: EditScoreVector,
    rng: np.random.Generator,
    protected: frozenset[int] = frozenset(),
    force_protected_insert: bool = False,
) -> tuple[int, str | None]:
    """Sample an edit position from p_edit.

    When the sampled position is protected and forcing is on, the caller
    must perform an insert there (keywords cannot be replaced or deleted).
    """
    p = esv.probabilities
    if len(p) == 1:
        position = 0  # no draw, so degenerate inputs behave identically
    else:
        position = int(rng.choice(len(p), p=p / p.sum()))
    if force_protected_insert and position in protected:
        return position, "insert"
    return position, None

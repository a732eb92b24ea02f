"""Multi-aspect scoring of pre-implemented edits.

Four aspects: fluency (LM negative log-likelihood), editorial
rationality (post-edit impact between the edited token and its
neighbors), semantic similarity (keyword + sentence cosine terms), and
expression diversity (1 - BLEU against the original). Raw values live on
different scales, so combination min-max normalizes each aspect across
the proposal set, flipping fluency so that higher is uniformly better.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .encoder import EncoderHandle, cosine
from .lm import CausalLMHandle, sequence_nll
from .masking import MemoEncoder, frame, impact, mean_adjacent_impact, minmax_normalize
from .metrics import BleuConfig, DEFAULT_BLEU, bleu
from .text import DELETE, INSERT, REPLACE, Sentence, Token

HARD = "hard"
SOFT = "soft"
TASKS = (HARD, SOFT)


@dataclass(frozen=True)
class ScoreWeights:
    """Aspect weights; defaults follow the all-ones configuration."""

    fluency: float = 1.0
    edit: float = 1.0
    semantic: float = 1.0
    expression: float = 1.0

    def __post_init__(self):
        values = (self.fluency, self.edit, self.semantic, self.expression)
        if any(v < 0 for v in values):
            raise ValueError("weights must be non-negative")
        if not any(v > 0 for v in values):
            raise ValueError("at least one weight must be positive")

    def active_total(self, task: str) -> float:
        if task == HARD:
            return self.fluency + self.edit
        return self.fluency + self.edit + self.semantic + self.expression


@dataclass
class ComponentScores:
    """Raw aspect values plus their post-normalization counterparts.

    Raw directions: flu_raw is an NLL (lower is better), the rest are
    higher-is-better. Normalized values are all in [0, 1], higher-better.
    """

    flu_raw: float
    edit_raw: float
    sem_raw: float | None = None
    exp_raw: float | None = None
    sem_key: float | None = None
    sem_sen: float | None = None
    flu_norm: float | None = None
    edit_norm: float | None = None
    sem_norm: float | None = None
    exp_norm: float | None = None
    combined: float | None = None


def fluency(lm: CausalLMHandle, sentence: Sentence) -> float:
    """Average NLL of the sentence (terminal EOS excluded for search)."""
    return sequence_nll(lm, sentence, include_eos=False)


def edit_rationality(
    enc: EncoderHandle, s_after: Sentence, action: str, position: int
) -> float:
    """Post-edit congruence of the edited spot.

    For replace/insert, ``position`` is the edited token's index in
    s_after and the score is its mean impact on the two neighbors. For
    delete, ``position`` is the deletion gap's left-neighbor index in
    s_after (-1 at the front) and the score is the mean of the two
    newly-adjacent tokens' mutual impacts. Out-of-range neighbors fall
    back to the CLS/SEP frame tokens.
    """
    framed = frame(s_after.tokens)
    memo = MemoEncoder(enc)
    n = len(s_after)
    if action in (REPLACE, INSERT):
        if not 0 <= position < n:
            raise IndexError(f"position {position} invalid for {action}")
        p = position + 1
        return 0.5 * (impact(memo, framed, p, p + 1) + impact(memo, framed, p, p - 1))
    if action == DELETE:
        if not -1 <= position < n:
            raise IndexError(f"position {position} invalid for delete")
        left = position + 1
        right = position + 2
        return 0.5 * (
            impact(memo, framed, left, right) + impact(memo, framed, right, left)
        )
    raise ValueError(f"unknown action {action!r}")


def contextual_vectors(enc: EncoderHandle, sentence: Sentence) -> np.ndarray:
    """Unmasked contextual vectors at the content positions."""
    return enc.encode(frame(sentence.tokens))[1:-1]


def semantic_similarity(
    enc: EncoderHandle,
    keywords: Sequence[tuple[Token, int]],
    x0: Sentence,
    xstar: Sentence,
) -> tuple[float, float, float]:
    """Keyword, sentence, and total similarity of xstar to x0.

    The keyword term matches each keyword's contextual vector in x0 to
    its closest contextual vector in xstar; the sentence term compares
    pooled sentence vectors. An empty keyword set contributes 0.
    """
    sen = cosine(enc.sentence_vector(x0.tokens), enc.sentence_vector(xstar.tokens))
    if not keywords:
        return 0.0, sen, sen
    h0 = contextual_vectors(enc, x0)
    hstar = contextual_vectors(enc, xstar)
    key_total = 0.0
    for _, index in keywords:
        anchor = h0[index]
        key_total += max(cosine(anchor, hstar[i]) for i in range(len(hstar)))
    key = key_total / len(keywords)
    return key, sen, key + sen


def diversity(
    x0: Sentence, xstar: Sentence, cfg: BleuConfig = DEFAULT_BLEU
) -> float:
    """Expression difference from the original: 1 - BLEU(xstar, x0)."""
    return 1.0 - bleu(xstar, x0, cfg)


def _normalize_across(values: list[float]) -> np.ndarray:
    return minmax_normalize(np.asarray(values, dtype=np.float64))


def combine(
    weights: ScoreWeights, task: str, components: Sequence[ComponentScores]
) -> list[float]:
    """Normalize each aspect across the proposal set and weight-sum.

    Fluency is flipped (1 - minmax NLL) so higher is better everywhere;
    an aspect constant across all proposals normalizes to 0.5. The hard
    task combines fluency and edit rationality, the soft task all four.
    Fills the *_norm and combined fields in place and returns the
    combined scores.
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    if not components:
        raise ValueError("combine requires at least one proposal")
    flu = 1.0 - _normalize_across([c.flu_raw for c in components])
    edit = _normalize_across([c.edit_raw for c in components])
    combined = weights.fluency * flu + weights.edit * edit
    if task == SOFT:
        sem = _normalize_across([c.sem_raw for c in components])
        exp = _normalize_across([c.exp_raw for c in components])
        combined = combined + weights.semantic * sem + weights.expression * exp
    for i, c in enumerate(components):
        c.flu_norm = float(flu[i])
        c.edit_norm = float(edit[i])
        if task == SOFT:
            c.sem_norm = float(sem[i])
            c.exp_norm = float(exp[i])
        c.combined = float(combined[i])
    return [float(v) for v in combined]


def sentence_objectives(
    weights: ScoreWeights,
    task: str,
    sentences: Sequence[Sentence],
    lm: CausalLMHandle,
    enc: EncoderHandle,
    x0: Sentence | None = None,
    keywords: Sequence[tuple[Token, int]] = (),
) -> list[float]:
    """Final-selection objective for every sentence in a comparison set.

    Aspects are computed per sentence (the edit term is the sentence-wide
    mean adjacent impact) and min-max normalized across the whole set;
    a single-sentence set falls back to the 0.5 tie convention.
    """
    if task == SOFT and x0 is None:
        raise ValueError("soft task objectives require the original sentence")
    unique: dict[tuple[str, ...], ComponentScores] = {}
    for s in sentences:
        key = s.surfaces
        if key in unique:
            continue
        comp = ComponentScores(
            flu_raw=fluency(lm, s),
            edit_raw=mean_adjacent_impact(enc, s),
        )
        if task == SOFT:
            _, _, comp.sem_raw = semantic_similarity(enc, keywords, x0, s)
            comp.exp_raw = diversity(x0, s)
        unique[key] = comp
    ordered = [unique[s.surfaces] for s in sentences]
    combine(weights, task, ordered)
    return [c.combined for c in ordered]


def sentence_objective(
    weights: ScoreWeights,
    task: str,
    x0: Sentence,
    xstar: Sentence,
    lm: CausalLMHandle,
    enc: EncoderHandle,
    keywords: Sequence[tuple[Token, int]] = (),
    comparison: Sequence[Sentence] = (),
) -> float:
    """Objective of one sentence against a traced comparison set."""
    values = sentence_objectives(
        weights, task, [xstar, *comparison], lm, enc, x0=x0, keywords=keywords
    )
    return values[0]

"""The local-edit search loop.

Each step: sample an edit position from the perturbed-masking edit
probabilities (forced insert on protected keyword positions),
pre-implement the insert/replace/delete actions with LM-sampled
candidate tokens, score every proposal on the task's aspects, sample one
proposal with softmax weights over the combined scores, and apply it.
After the step budget, the output is the traced sentence with the
highest whole-trace objective.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace as dc_replace
from typing import Sequence

import numpy as np

from .encoder import EncoderHandle
from .errors import OovKeywordError, PmctgError
from .keywords import KeywordExtractor, extract_keywords
from .lm import BACKWARD, CausalLMHandle
from .masking import edit_scores, sample_position, softmax
from .scoring import (
    HARD,
    SOFT,
    ComponentScores,
    ScoreWeights,
    combine,
    diversity,
    edit_rationality,
    fluency,
    semantic_similarity,
    sentence_objectives,
)
from .text import (
    DELETE,
    INSERT,
    NUM_SPECIALS,
    REPLACE,
    UNK_ID,
    Sentence,
    Token,
    apply_edit,
)

FRONT = "front"
BACK = "back"

CANDIDATE_FORWARD = "forward"
CANDIDATE_BIDIRECTIONAL = "bidirectional-product"

DEFAULT_STEPS = {HARD: 100, SOFT: 50}


class TraceFullError(PmctgError):
    """step() called on a trace that already holds max_steps steps."""


@dataclass(frozen=True)
class SearchConfig:
    task: str = HARD
    max_steps: int | None = None  # None = task default (100 hard / 50 soft)
    top_k: int = 50
    weights: ScoreWeights = field(default_factory=ScoreWeights)
    seed: int = 0
    insertion_side_policy: str = "coin"
    candidate_direction: str = CANDIDATE_FORWARD

    def __post_init__(self):
        if self.task not in DEFAULT_STEPS:
            raise ValueError(f"unknown task {self.task!r}")
        if self.max_steps is not None and self.max_steps < 0:
            raise ValueError("max_steps must be >= 0")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.candidate_direction not in (
            CANDIDATE_FORWARD,
            CANDIDATE_BIDIRECTIONAL,
        ):
            raise ValueError(
                f"unknown candidate direction {self.candidate_direction!r}"
            )

    def resolved_max_steps(self) -> int:
        if self.max_steps is not None:
            return self.max_steps
        return DEFAULT_STEPS[self.task]

    def with_seed(self, seed: int) -> "SearchConfig":
        return dc_replace(self, seed=seed)


@dataclass
class EditProposal:
    """One pre-implemented action with its scores."""

    action: str
    position: int  # token index (replace/delete) or insertion index (insert)
    candidate: Token | None
    sentence: Sentence
    scores: ComponentScores | None = None
    side: str | None = None
    probability: float | None = None


@dataclass
class TraceStep:
    position: int
    forced_insert: bool
    p_edit: tuple[float, ...]
    proposals: list[EditProposal]
    chosen: int
    sentence: Sentence


@dataclass
class SearchTrace:
    """Ordered record of one search, plus the selected best sentence."""

    initial: Sentence
    config: SearchConfig
    steps: list[TraceStep] = field(default_factory=list)
    keywords: tuple[tuple[Token, int], ...] = ()
    best: Sentence | None = None
    best_objective: float | None = None
    best_index: int | None = None

    def sentences(self) -> list[Sentence]:
        """Initial sentence followed by the state after every step."""
        return [self.initial] + [s.sentence for s in self.steps]


@dataclass(frozen=True)
class TaskInput:
    """Hard task: ordered keywords. Soft task: original sentence plus
    the extracted keyword set (may be filled later by the searcher)."""

    task: str
    keywords: tuple[Token, ...] = ()
    x0: Sentence | None = None
    extracted: tuple[tuple[Token, int], ...] | None = None

    @classmethod
    def hard(cls, keywords: Sequence[Token]) -> "TaskInput":
        return cls(task=HARD, keywords=tuple(keywords))

    @classmethod
    def soft(
        cls,
        sentence: Sentence,
        extracted: Sequence[tuple[Token, int]] | None = None,
    ) -> "TaskInput":
        return cls(
            task=SOFT,
            x0=sentence,
            extracted=None if extracted is None else tuple(extracted),
        )


def initialize(task_input: TaskInput) -> Sentence:
    """Initial search state.

    Hard: concatenation of the keywords, all positions protected.
    Soft: the original sentence with extracted keyword positions protected.
    """
    if task_input.task == HARD:
        keywords = task_input.keywords
        if not keywords:
            raise OovKeywordError("hard task requires at least one keyword")
        for tok in keywords:
            if tok.id < NUM_SPECIALS:
                raise OovKeywordError(
                    f"keyword {tok.surface!r} is not in the vocabulary"
                    if tok.id == UNK_ID
                    else f"special token {tok.surface!r} cannot be a keyword"
                )
        return Sentence(tuple(keywords), frozenset(range(len(keywords))))
    if task_input.x0 is None:
        raise ValueError("soft task requires an original sentence")
    positions = frozenset(
        index for _, index in (task_input.extracted or ())
    )
    return Sentence(task_input.x0.tokens, positions)


def _weighted_choice(
    rng: np.random.Generator, items: list[tuple[Token, float]]
) -> Token:
    probs = np.array([p for _, p in items], dtype=np.float64)
    idx = int(rng.choice(len(items), p=probs / probs.sum()))
    return items[idx][0]


def _candidate_pool(
    prefix: Sequence[Token],
    suffix: Sequence[Token],
    lm_forward: CausalLMHandle,
    lm_backward: CausalLMHandle | None,
    config: SearchConfig,
    exclude_surfaces: frozenset[str],
) -> list[tuple[Token, float]]:
    """Candidate tokens and sampling weights at one edit point.

    Forward mode conditions on the prefix only. Bidirectional-product
    mode multiplies forward and backward token probabilities and
    renormalizes over the union of the two top-k pools.
    """
    forward = lm_forward.top_candidates(prefix, config.top_k, exclude_surfaces)
    if config.candidate_direction == CANDIDATE_FORWARD:
        return forward
    if lm_backward is None or lm_backward.direction != BACKWARD:
        raise PmctgError(
            "bidirectional-product candidates require a backward builtin model"
        )
    if not hasattr(lm_forward, "token_prob") or not hasattr(lm_backward, "token_prob"):
        raise PmctgError("bidirectional-product candidates need builtin backends")
    rev_suffix = tuple(reversed(tuple(suffix)))
    backward = lm_backward.top_candidates(rev_suffix, config.top_k, exclude_surfaces)
    pool: dict[str, Token] = {}
    for tok, _ in forward + backward:
        pool.setdefault(tok.surface, tok)
    prefix_ids = [t.id for t in prefix]
    suffix_ids = [t.id for t in rev_suffix]
    weights = []
    tokens = sorted(pool.values())  # deterministic union order
    for tok in tokens:
        p_f = lm_forward.token_prob(prefix_ids, tok.id)
        p_b = lm_backward.token_prob(suffix_ids, tok.id)
        weights.append(p_f * p_b)
    total = sum(weights)
    return [(tok, w / total) for tok, w in zip(tokens, weights)]


def propose(
    sentence: Sentence,
    position: int,
    forced_insert: bool,
    lm_forward: CausalLMHandle,
    lm_backward: CausalLMHandle | None,
    enc: EncoderHandle,
    config: SearchConfig,
    rng: np.random.Generator,
    x0: Sentence | None = None,
    keywords: Sequence[tuple[Token, int]] = (),
) -> list[EditProposal]:
    """Pre-implement the legal actions at a position and score them.

    Replace and delete are omitted at protected positions (and delete on
    length-1 sentences); insert is always available, with a fair coin
    choosing the front or back side. Component scores are combined
    across the proposal set before returning.
    """
    tokens = sentence.tokens
    protected = position in sentence.keyword_positions
    proposals: list[EditProposal] = []

    if not forced_insert and not protected:
        pool = _candidate_pool(
            tokens[:position],
            tokens[position + 1 :],
            lm_forward,
            lm_backward,
            config,
            frozenset((tokens[position].surface,)),
        )
        if pool:
            candidate = _weighted_choice(rng, pool)
            after = apply_edit(sentence, REPLACE, position, candidate)
            proposals.append(
                EditProposal(REPLACE, position, candidate, after, None)
            )

    side = FRONT if rng.random() < 0.5 else BACK
    insert_at = position if side == FRONT else position + 1
    pool = _candidate_pool(
        tokens[:insert_at],
        tokens[insert_at:],
        lm_forward,
        lm_backward,
        config,
        frozenset(),
    )
    if not pool:
        raise PmctgError("no insert candidates available from the backend")
    candidate = _weighted_choice(rng, pool)
    after = apply_edit(sentence, INSERT, insert_at, candidate)
    proposals.append(EditProposal(INSERT, insert_at, candidate, after, None, side=side))

    if not forced_insert and not protected and len(sentence) >= 2:
        after = apply_edit(sentence, DELETE, position)
        proposals.append(EditProposal(DELETE, position, None, after, None))

    for prop in proposals:
        if prop.action == DELETE:
            rationality = edit_rationality(enc, prop.sentence, DELETE, prop.position - 1)
        else:
            rationality = edit_rationality(
                enc, prop.sentence, prop.action, prop.position
            )
        comp = ComponentScores(
            flu_raw=fluency(lm_forward, prop.sentence), edit_raw=rationality
        )
        if config.task == SOFT:
            comp.sem_key, comp.sem_sen, comp.sem_raw = semantic_similarity(
                enc, keywords, x0, prop.sentence
            )
            comp.exp_raw = diversity(x0, prop.sentence)
        prop.scores = comp
    combine(config.weights, config.task, [p.scores for p in proposals])
    return proposals


def step(
    sentence: Sentence,
    lm_forward: CausalLMHandle,
    lm_backward: CausalLMHandle | None,
    enc: EncoderHandle,
    config: SearchConfig,
    rng: np.random.Generator,
    trace: SearchTrace,
    x0: Sentence | None = None,
    keywords: Sequence[tuple[Token, int]] = (),
    uniform_position: bool = False,
) -> Sentence:
    """One edit: sample position, propose, sample action, apply, record."""
    if len(trace.steps) >= config.resolved_max_steps():
        raise TraceFullError("search trace already holds max_steps steps")
    n = len(sentence)
    if uniform_position:
        position = 0 if n == 1 else int(rng.integers(n))
        forced = (
            "insert" if position in sentence.keyword_positions else None
        )
        p_edit = tuple([1.0 / n] * n)
    else:
        esv = edit_scores(enc, sentence)
        position, forced = sample_position(
            esv, rng, sentence.keyword_positions, force_protected_insert=True
        )
        p_edit = tuple(float(p) for p in esv.probabilities)
    proposals = propose(
        sentence,
        position,
        forced == "insert",
        lm_forward,
        lm_backward,
        enc,
        config,
        rng,
        x0=x0,
        keywords=keywords,
    )
    sampling = softmax(np.array([p.scores.combined for p in proposals]))
    for prop, prob in zip(proposals, sampling):
        prop.probability = float(prob)
    chosen = int(rng.choice(len(proposals), p=sampling / sampling.sum()))
    after = proposals[chosen].sentence
    trace.steps.append(
        TraceStep(
            position=position,
            forced_insert=forced == "insert",
            p_edit=p_edit,
            proposals=proposals,
            chosen=chosen,
            sentence=after,
        )
    )
    return after


def _run(
    task_input: TaskInput,
    lm_forward: CausalLMHandle,
    lm_backward: CausalLMHandle | None,
    enc: EncoderHandle,
    kx: KeywordExtractor | None,
    config: SearchConfig,
    uniform_position: bool,
) -> tuple[Sentence, SearchTrace]:
    if config.task != task_input.task:
        raise ValueError("config task and input task differ")
    extracted = task_input.extracted
    if task_input.task == SOFT and extracted is None:
        if kx is None:
            extracted = ()
        else:
            extracted = tuple(
                extract_keywords(kx, task_input.x0, _lm_vocab(lm_forward))
            )
        task_input = dc_replace(task_input, extracted=extracted)
    current = initialize(task_input)
    x0 = current
    keywords = task_input.extracted or ()
    trace = SearchTrace(initial=current, config=config, keywords=tuple(keywords))
    rng = np.random.default_rng(config.seed)
    for _ in range(config.resolved_max_steps()):
        current = step(
            current,
            lm_forward,
            lm_backward,
            enc,
            config,
            rng,
            trace,
            x0=x0,
            keywords=keywords,
            uniform_position=uniform_position,
        )
    traced = trace.sentences()
    objectives = sentence_objectives(
        config.weights,
        config.task,
        traced,
        lm_forward,
        enc,
        x0=x0,
        keywords=keywords,
    )
    best_index = int(np.argmax(objectives))  # earliest sentence wins ties
    trace.best = traced[best_index]
    trace.best_objective = float(objectives[best_index])
    trace.best_index = best_index
    return trace.best, trace


def _lm_vocab(lm: CausalLMHandle):
    vocab = getattr(lm, "vocab", None)
    if vocab is None:
        raise PmctgError("keyword extraction needs a vocabulary-bearing backend")
    return vocab


def search(
    task_input: TaskInput,
    lm_forward: CausalLMHandle,
    lm_backward: CausalLMHandle | None,
    enc: EncoderHandle,
    kx: KeywordExtractor | None,
    config: SearchConfig,
) -> tuple[Sentence, SearchTrace]:
    """Full PMCTG search; deterministic under a fixed seed."""
    return _run(task_input, lm_forward, lm_backward, enc, kx, config, False)


def search_baseline_uniform(
    task_input: TaskInput,
    lm_forward: CausalLMHandle,
    lm_backward: CausalLMHandle | None,
    enc: EncoderHandle,
    kx: KeywordExtractor | None,
    config: SearchConfig,
) -> tuple[Sentence, SearchTrace]:
    """Ablation baseline: uniform random edit positions, same action scoring."""
    return _run(task_input, lm_forward, lm_backward, enc, kx, config, True)

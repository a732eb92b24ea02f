"""Deterministic synthetic corpora for the test and acceptance suites.

Template sentences over small word pools give the n-gram model sharp
conditionals and give content words selective co-occurrence (high PPMI
norms). Filler tokens can be sprinkled uniformly into a fraction of
sentences: their co-occurrence is flat, so their PPMI rows are near
zero, which makes them the least congruent positions under the
perturbed-masking edit score while staying low-probability under the LM.
"""

from __future__ import annotations

import numpy as np

from pmctg import build_corpus

DETERMINERS = ["the", "a"]
NOUNS = [
    "cat", "dog", "bird", "fish", "horse", "farmer", "teacher", "doctor",
    "child", "sailor", "river", "mountain", "garden", "castle", "market",
    "painter", "singer", "lawyer", "pilot", "baker",
]
VERBS = [
    "chased", "watched", "admired", "followed", "helped", "visited",
    "carried", "painted", "greeted", "taught",
]
ADJECTIVES = [
    "old", "young", "happy", "quiet", "clever", "brave", "gentle", "tired",
    "proud", "curious",
]
ADVERBS = [
    "slowly", "quickly", "quietly", "happily", "carefully", "eagerly",
    "proudly", "calmly",
]
FILLERS = ["um", "uh", "er"]

CONTENT_POOL = NOUNS + VERBS + ADJECTIVES


def _sentence(rng: np.random.Generator, punctuation: bool = True) -> list[str]:
    det = lambda: DETERMINERS[rng.integers(len(DETERMINERS))]
    noun = lambda: NOUNS[rng.integers(len(NOUNS))]
    verb = lambda: VERBS[rng.integers(len(VERBS))]
    adj = lambda: ADJECTIVES[rng.integers(len(ADJECTIVES))]
    adv = lambda: ADVERBS[rng.integers(len(ADVERBS))]
    templates = (
        lambda: [det(), noun(), verb(), det(), noun()],
        lambda: [det(), adj(), noun(), verb(), det(), noun()],
        lambda: [det(), noun(), verb(), det(), adj(), noun()],
        lambda: [det(), noun(), verb(), det(), noun(), adv()],
        lambda: [det(), adj(), noun(), verb(), adv()],
        lambda: [det(), noun(), "and", det(), noun(), verb(), det(), noun()],
    )
    pick = templates[rng.integers(len(templates))]
    words = pick()
    if punctuation:
        words.append(".")
    return words


def template_lines(
    n_sentences: int,
    seed: int,
    filler_rate: float = 0.0,
    punctuation: bool = True,
) -> list[str]:
    rng = np.random.default_rng(seed)
    lines = []
    for _ in range(n_sentences):
        words = _sentence(rng, punctuation)
        if filler_rate > 0.0 and rng.random() < filler_rate:
            filler = FILLERS[rng.integers(len(FILLERS))]
            pos = int(rng.integers(len(words) + 1))
            words = words[:pos] + [filler] + words[pos:]
        lines.append(" ".join(words))
    return lines


def template_corpus(
    n_sentences: int,
    seed: int,
    filler_rate: float = 0.0,
    punctuation: bool = True,
):
    return build_corpus(template_lines(n_sentences, seed, filler_rate, punctuation))


def corrupted_sentence(
    rng: np.random.Generator, n_fillers: int = 2, punctuation: bool = True
) -> str:
    """A clean template sentence with filler tokens injected."""
    words = _sentence(rng, punctuation)
    for _ in range(n_fillers):
        filler = FILLERS[rng.integers(len(FILLERS))]
        pos = int(rng.integers(len(words) + 1))
        words = words[:pos] + [filler] + words[pos:]
    return " ".join(words)


def sample_keywords(rng: np.random.Generator, count: int) -> list[str]:
    idx = rng.choice(len(CONTENT_POOL), size=count, replace=False)
    return [CONTENT_POOL[i] for i in idx]


def efficiency_input(rng: np.random.Generator) -> str:
    """Short clean sentence with two fillers: the step-count race input.

    [det adj noun verb adv] keeps the clean form unambiguous, so the
    judge-NLL target is reachable exactly when the fillers are fixed.
    """
    words = [
        DETERMINERS[rng.integers(len(DETERMINERS))],
        ADJECTIVES[rng.integers(len(ADJECTIVES))],
        NOUNS[rng.integers(len(NOUNS))],
        VERBS[rng.integers(len(VERBS))],
        ADVERBS[rng.integers(len(ADVERBS))],
    ]
    for _ in range(2):
        filler = FILLERS[rng.integers(len(FILLERS))]
        pos = int(rng.integers(len(words) + 1))
        words = words[:pos] + [filler] + words[pos:]
    return " ".join(words)

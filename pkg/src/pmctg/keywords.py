"""Keyword extraction for the soft-constraint task.

The builtin extractor ranks sentence tokens by TF-IDF against corpus
frequency counts. The remote extractor (see remote module) ranks by
embedding similarity on the model server; both sit behind the same
interface.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod

from .text import NUM_SPECIALS, Sentence, Token, Vocabulary

DEFAULT_MAX_KEYWORDS = 3

# compact function-word list; corpus IDF already demotes most of these,
# the explicit list makes extraction deterministic across corpora.
# hesitation/discourse markers (um, uh, er, ...) carry no content either.
STOPWORDS = frozenset(
    """a an the and or but if then else of to in on at by for with from as is
    are was were be been being am do does did have has had will would can
    could shall should may might must not no nor so than too very just it
    its this that these those he she they them his her their i you we me my
    your our us what which who whom how when where why there here about into
    over under again once all any both each few more most other some such
    own same s t don now um uh er erm hmm mm oh ah""".split()
)

PUNCTUATION = frozenset(".,;:!?\"'`()[]{}-")


def is_stopword(surface: str) -> bool:
    return surface.lower() in STOPWORDS or all(c in PUNCTUATION for c in surface)


class KeywordExtractor(ABC):
    """Picks up to max_keywords tokens of a sentence, with their indices."""

    max_keywords: int = DEFAULT_MAX_KEYWORDS

    @abstractmethod
    def extract(
        self, sentence: Sentence, corpus_stats: Vocabulary
    ) -> list[tuple[Token, int]]: ...


class TfidfKeywordExtractor(KeywordExtractor):
    """TF within the sentence times inverse corpus frequency."""

    method = "tf-idf"

    def __init__(self, max_keywords: int = DEFAULT_MAX_KEYWORDS):
        self.max_keywords = max_keywords

    def extract(
        self, sentence: Sentence, corpus_stats: Vocabulary
    ) -> list[tuple[Token, int]]:
        if self.max_keywords <= 0:
            return []
        total = sum(corpus_stats.counts) or 1
        tf: dict[str, int] = {}
        first_index: dict[str, int] = {}
        for i, tok in enumerate(sentence.tokens):
            if tok.id < NUM_SPECIALS or is_stopword(tok.surface):
                continue
            tf[tok.surface] = tf.get(tok.surface, 0) + 1
            first_index.setdefault(tok.surface, i)
        scored = []
        for surface, count in tf.items():
            freq = corpus_stats.counts[corpus_stats.lookup(surface)]
            idf = math.log((1 + total) / (1 + freq))
            score = (count / len(sentence)) * idf
            scored.append((score, first_index[surface], surface))
        # rank by score desc, earlier index breaks ties
        scored.sort(key=lambda item: (-item[0], item[1]))
        result = []
        for _, index, surface in scored[: self.max_keywords]:
            result.append((sentence.tokens[index], index))
        result.sort(key=lambda pair: pair[1])
        return result


def extract_keywords(
    kx: KeywordExtractor, sentence: Sentence, corpus_stats: Vocabulary
) -> list[tuple[Token, int]]:
    """Keyword tokens of a sentence with their positions in it."""
    return kx.extract(sentence, corpus_stats)

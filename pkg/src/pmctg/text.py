"""Token, vocabulary, sentence and corpus primitives.

Everything here is value-semantic: Vocabulary and Corpus are immutable
after construction, Sentence edits return new objects, so all of it is
safe to share across concurrent searches.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

from .errors import (
    ConstraintViolationError,
    EmptyCorpusError,
    EmptyInputError,
)

# Reserved special tokens, ids fixed so serialized models and traces are
# portable across backends. Specials are never legal edit candidates.
BOS_ID, EOS_ID, MASK_ID, CLS_ID, SEP_ID, UNK_ID = range(6)
SPECIAL_SURFACES = ("<bos>", "<eos>", "[MASK]", "[CLS]", "[SEP]", "<unk>")
NUM_SPECIALS = len(SPECIAL_SURFACES)

INSERT = "insert"
REPLACE = "replace"
DELETE = "delete"
EDIT_KINDS = (INSERT, REPLACE, DELETE)


class Token(NamedTuple):
    """A vocabulary entry: non-negative id plus its surface form."""

    id: int
    surface: str


@dataclass(frozen=True)
class Vocabulary:
    """Total bijection between surfaces and ids 0..size-1.

    Ids 0-5 are the reserved specials; the rest are assigned
    deterministically by (frequency desc, surface asc).
    """

    surfaces: tuple[str, ...]
    counts: tuple[int, ...]
    _index: dict[str, int] = field(repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        if self.surfaces[:NUM_SPECIALS] != SPECIAL_SURFACES:
            raise ValueError("vocabulary must start with the reserved specials")
        if len(self.counts) != len(self.surfaces):
            raise ValueError("counts/surfaces length mismatch")
        index = {s: i for i, s in enumerate(self.surfaces)}
        if len(index) != len(self.surfaces):
            raise ValueError("duplicate surfaces break the id bijection")
        object.__setattr__(self, "_index", index)

    @property
    def size(self) -> int:
        return len(self.surfaces)

    def lookup(self, surface: str) -> int:
        """Id for a surface, UNK_ID if absent."""
        return self._index.get(surface, UNK_ID)

    def __contains__(self, surface: str) -> bool:
        return surface in self._index

    def surface(self, token_id: int) -> str:
        return self.surfaces[token_id]

    def token(self, token_id: int) -> Token:
        return Token(token_id, self.surfaces[token_id])

    def token_for(self, surface: str) -> Token:
        token_id = self.lookup(surface)
        return Token(token_id, self.surfaces[token_id])

    def content_ids(self) -> range:
        """Ids of non-special tokens."""
        return range(NUM_SPECIALS, self.size)

    @classmethod
    def from_counts(cls, counts: dict[str, int], unk_count: int = 0) -> "Vocabulary":
        """Build a vocabulary from surface frequency counts.

        Surfaces colliding with reserved specials are dropped (the caller
        maps those occurrences to UNK).
        """
        items = [(s, c) for s, c in counts.items() if s not in SPECIAL_SURFACES]
        items.sort(key=lambda it: (-it[1], it[0]))
        surfaces = SPECIAL_SURFACES + tuple(s for s, _ in items)
        special_counts = [0] * NUM_SPECIALS
        special_counts[UNK_ID] = unk_count
        all_counts = tuple(special_counts) + tuple(c for _, c in items)
        return cls(surfaces, all_counts)


def save_vocabulary(vocab: Vocabulary, path: str | Path) -> None:
    """Write "surface<TAB>count" lines; ids implied by order after specials."""
    lines = [
        f"{vocab.surfaces[i]}\t{vocab.counts[i]}\n"
        for i in range(NUM_SPECIALS, vocab.size)
    ]
    Path(path).write_text("".join(lines), encoding="utf-8")


def load_vocabulary(path: str | Path) -> Vocabulary:
    surfaces = list(SPECIAL_SURFACES)
    counts = [0] * NUM_SPECIALS
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line:
            continue
        surface, _, count = line.partition("\t")
        surfaces.append(surface)
        counts.append(int(count))
    return Vocabulary(tuple(surfaces), tuple(counts))


def vocabulary_hash(vocab: Vocabulary) -> str:
    """Stable 16-hex-digit fingerprint used to pair models with a vocabulary."""
    payload = "".join(
        f"{vocab.surfaces[i]}\t{vocab.counts[i]}\n"
        for i in range(NUM_SPECIALS, vocab.size)
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class Sentence:
    """Ordered content tokens plus the set of protected keyword positions.

    Keyword positions index into ``tokens``; the tokens there are never
    altered by legal edits, and the indices are remapped consistently
    when inserts/deletes shift the sequence.
    """

    tokens: tuple[Token, ...]
    keyword_positions: frozenset[int] = frozenset()

    def __post_init__(self):
        if len(self.tokens) < 1:
            raise EmptyInputError("sentence must contain at least one token")
        for pos in self.keyword_positions:
            if not 0 <= pos < len(self.tokens):
                raise ValueError(f"keyword position {pos} out of range")

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(t.id for t in self.tokens)

    @property
    def surfaces(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)

    def keyword_tokens(self) -> list[Token]:
        """Protected tokens in sentence order."""
        return [self.tokens[i] for i in sorted(self.keyword_positions)]

    def text(self) -> str:
        return detokenize(self)


def tokenize(text: str, vocab: Vocabulary, lowercase: bool = False) -> Sentence:
    """Whitespace-split a string into a Sentence; OOV surfaces become UNK."""
    if lowercase:
        text = text.lower()
    surfaces = text.split()
    if not surfaces:
        raise EmptyInputError("no tokens after trimming")
    return Sentence(tuple(vocab.token_for(s) for s in surfaces))


def detokenize(sentence: Sentence) -> str:
    """Space-join the surfaces (inverse of tokenize for in-vocab text)."""
    return " ".join(sentence.surfaces)


@dataclass(frozen=True)
class Corpus:
    """Token-id sequences plus the vocabulary they are valid under."""

    sequences: tuple[tuple[int, ...], ...]
    vocabulary: Vocabulary

    def __post_init__(self):
        size = self.vocabulary.size
        for seq in self.sequences:
            for token_id in seq:
                if not 0 <= token_id < size:
                    raise ValueError(f"token id {token_id} outside vocabulary")

    def __len__(self) -> int:
        return len(self.sequences)


def build_corpus(
    lines: Iterable[str], lowercase: bool = False, min_count: int = 1
) -> Corpus:
    """Build a corpus from raw sentence strings.

    Tokens with frequency < min_count (and tokens colliding with special
    surfaces) are replaced by UNK in the stored sequences.
    """
    tokenized: list[list[str]] = []
    freq: dict[str, int] = {}
    for line in lines:
        if lowercase:
            line = line.lower()
        surfaces = line.split()
        if not surfaces:
            continue
        tokenized.append(surfaces)
        for s in surfaces:
            freq[s] = freq.get(s, 0) + 1
    if not tokenized:
        raise EmptyCorpusError("corpus contains no sentences")

    kept = {s: c for s, c in freq.items() if c >= min_count and s not in SPECIAL_SURFACES}
    unk_count = sum(freq.values()) - sum(kept.values())
    vocab = Vocabulary.from_counts(kept, unk_count=unk_count)
    sequences = tuple(
        tuple(UNK_ID if s in SPECIAL_SURFACES else vocab.lookup(s) for s in surfaces)
        for surfaces in tokenized
    )
    return Corpus(sequences, vocab)


def ingest_corpus(
    path: str | Path, lowercase: bool = False, min_count: int = 1
) -> Corpus:
    """Read a UTF-8, one-sentence-per-line corpus file."""
    with open(path, encoding="utf-8") as handle:
        return build_corpus(handle, lowercase=lowercase, min_count=min_count)


def apply_edit(
    sentence: Sentence,
    action: str,
    position: int,
    token: Token | None = None,
) -> Sentence:
    """Apply one edit and return the new Sentence (input unchanged).

    ``position`` is an absolute index: a token index for replace/delete,
    an insertion index in 0..len for insert (the caller resolves the
    front/back side into this index). Keyword positions are remapped:
    insert at i shifts positions >= i by +1, delete at i shifts
    positions > i by -1.
    """
    n = len(sentence)
    keywords = sentence.keyword_positions
    if action == INSERT:
        if token is None:
            raise ValueError("insert requires a token")
        if not 0 <= position <= n:
            raise IndexError(f"insert position {position} out of range 0..{n}")
        tokens = sentence.tokens[:position] + (token,) + sentence.tokens[position:]
        remapped = frozenset(p + 1 if p >= position else p for p in keywords)
        return Sentence(tokens, remapped)

    if not 0 <= position < n:
        raise IndexError(f"position {position} out of range for length {n}")

    if action == REPLACE:
        if token is None:
            raise ValueError("replace requires a token")
        if position in keywords:
            raise ConstraintViolationError(
                f"cannot replace protected keyword at position {position}"
            )
        tokens = (
            sentence.tokens[:position] + (token,) + sentence.tokens[position + 1 :]
        )
        return Sentence(tokens, keywords)

    if action == DELETE:
        if position in keywords:
            raise ConstraintViolationError(
                f"cannot delete protected keyword at position {position}"
            )
        if n < 2:
            raise EmptyInputError("cannot delete the only token of a sentence")
        tokens = sentence.tokens[:position] + sentence.tokens[position + 1 :]
        remapped = frozenset(p - 1 if p > position else p for p in keywords)
        return Sentence(tokens, remapped)

    raise ValueError(f"unknown edit action {action!r}")

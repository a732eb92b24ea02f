"""HTTP clients for the model server backends.

The server speaks JSON over POST /v1/encode, /v1/sentence_vector,
/v1/next_token, /v1/nll and /v1/keywords, with GET /v1/health reporting
the loaded models and embedding dimension. Remote runs use an open
vocabulary: token ids are assigned on first sight, since the server's
vocabulary is not enumerable client-side.
"""

from __future__ import annotations

import math
from typing import Collection, Sequence

import numpy as np
import requests

from .encoder import EncoderHandle
from .errors import BackendUnavailableError, DimensionMismatchError, PmctgError
from .keywords import DEFAULT_MAX_KEYWORDS, KeywordExtractor
from .lm import CausalLMHandle, FORWARD
from .text import NUM_SPECIALS, SPECIAL_SURFACES, Sentence, Token

DEFAULT_TIMEOUT = 30.0


class OpenVocabulary:
    """Growable surface<->id bijection for remote-backed runs.

    Ids 0-5 stay reserved for the specials; new surfaces get the next
    free id on first sight. Append-only, so shared reads stay valid.
    """

    def __init__(self):
        self._surfaces: list[str] = list(SPECIAL_SURFACES)
        self._index: dict[str, int] = {s: i for i, s in enumerate(self._surfaces)}

    @property
    def size(self) -> int:
        return len(self._surfaces)

    @property
    def counts(self) -> tuple[int, ...]:
        return (0,) * self.size

    def __contains__(self, surface: str) -> bool:
        return surface in self._index

    def lookup(self, surface: str) -> int:
        from .text import UNK_ID

        return self._index.get(surface, UNK_ID)

    def surface(self, token_id: int) -> str:
        return self._surfaces[token_id]

    def token(self, token_id: int) -> Token:
        return Token(token_id, self._surfaces[token_id])

    def token_for(self, surface: str) -> Token:
        existing = self._index.get(surface)
        if existing is not None:
            return Token(existing, surface)
        new_id = len(self._surfaces)
        self._surfaces.append(surface)
        self._index[surface] = new_id
        return Token(new_id, surface)


class _ServerSession:
    """Shared request plumbing with error mapping."""

    def __init__(self, base_url: str, timeout: float = DEFAULT_TIMEOUT):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._session = requests.Session()

    def post(self, path: str, payload: dict) -> dict:
        url = f"{self.base_url}{path}"
        try:
            response = self._session.post(url, json=payload, timeout=self.timeout)
        except requests.RequestException as exc:
            raise BackendUnavailableError(f"model server unreachable: {exc}") from exc
        if response.status_code >= 500:
            raise BackendUnavailableError(
                f"{url} returned {response.status_code}: {response.text[:200]}"
            )
        if response.status_code >= 400:
            raise PmctgError(
                f"{url} rejected the request ({response.status_code}): "
                f"{response.text[:200]}"
            )
        return response.json()

    def get(self, path: str) -> dict:
        url = f"{self.base_url}{path}"
        try:
            response = self._session.get(url, timeout=self.timeout)
            response.raise_for_status()
        except requests.RequestException as exc:
            raise BackendUnavailableError(f"model server unreachable: {exc}") from exc
        return response.json()


class RemoteCausalLM(CausalLMHandle):
    """Causal LM served over HTTP; forward direction only."""

    backend = "remote"
    direction = FORWARD

    def __init__(self, server: _ServerSession, vocab: OpenVocabulary):
        self.server = server
        self.vocab = vocab

    def top_candidates(
        self,
        prefix: Sequence[Token],
        top_k: int,
        exclude_surfaces: frozenset[str] = frozenset(),
    ) -> list[tuple[Token, float]]:
        if top_k < 1:
            raise ValueError("top_k must be >= 1")
        # over-fetch so exclusions don't shrink the pool below top_k
        payload = {
            "prefix": [t.surface for t in prefix],
            "top_k": top_k + len(exclude_surfaces) + 4,
        }
        data = self.server.post("/v1/next_token", payload)
        pairs = [
            (surface, math.exp(logprob))
            for surface, logprob in zip(data["tokens"], data["logprobs"])
            if surface not in exclude_surfaces and surface not in SPECIAL_SURFACES
        ][:top_k]
        if not pairs:
            return []
        total = sum(p for _, p in pairs)
        return [(self.vocab.token_for(s), p / total) for s, p in pairs]

    def mean_nll(self, tokens: Sequence[Token], include_eos: bool = False) -> float:
        # the server scores exactly the provided tokens (no terminal factor)
        data = self.server.post("/v1/nll", {"tokens": [t.surface for t in tokens]})
        return float(data["nll"])


class RemoteEncoder(EncoderHandle):
    """Masked contextual encoder served over HTTP."""

    backend = "remote"

    def __init__(self, server: _ServerSession):
        self.server = server
        health = server.get("/v1/health")
        self._dim = int(health["dim"])

    @property
    def dim(self) -> int:
        return self._dim

    def _check(self, vectors: np.ndarray, expected_rows: int) -> np.ndarray:
        if vectors.ndim != 2 or vectors.shape != (expected_rows, self._dim):
            raise DimensionMismatchError(
                f"server returned shape {vectors.shape}, "
                f"expected ({expected_rows}, {self._dim})"
            )
        return vectors

    def encode(
        self, tokens: Sequence[Token], masked_positions: Collection[int] = ()
    ) -> np.ndarray:
        payload = {
            "tokens": [t.surface for t in tokens],
            "mask_positions": sorted(masked_positions),
        }
        data = self.server.post("/v1/encode", payload)
        vectors = np.asarray(data["vectors"], dtype=np.float64)
        return self._check(vectors, len(tokens))

    def sentence_vector(self, tokens: Sequence[Token]) -> np.ndarray:
        data = self.server.post(
            "/v1/sentence_vector", {"tokens": [t.surface for t in tokens]}
        )
        vector = np.asarray(data["vector"], dtype=np.float64)
        if vector.shape != (self._dim,):
            raise DimensionMismatchError(
                f"server returned sentence vector of shape {vector.shape}"
            )
        return vector


class RemoteKeywordExtractor(KeywordExtractor):
    """Embedding-based keyword ranking on the model server."""

    method = "remote"

    def __init__(
        self,
        server: _ServerSession,
        vocab: OpenVocabulary,
        max_keywords: int = DEFAULT_MAX_KEYWORDS,
    ):
        self.server = server
        self.vocab = vocab
        self.max_keywords = max_keywords

    def extract(self, sentence: Sentence, corpus_stats=None) -> list[tuple[Token, int]]:
        if self.max_keywords <= 0:
            return []
        payload = {
            "tokens": [t.surface for t in sentence.tokens],
            "k": self.max_keywords,
        }
        data = self.server.post("/v1/keywords", payload)
        result = [
            (self.vocab.token_for(surface), int(index))
            for surface, index in zip(data["keywords"], data["indices"])
            if 0 <= int(index) < len(sentence)
        ]
        result.sort(key=lambda pair: pair[1])
        return result


def connect(base_url: str, timeout: float = DEFAULT_TIMEOUT):
    """Remote backend bundle: (vocab, causal LM, encoder, keyword extractor)."""
    server = _ServerSession(base_url, timeout)
    vocab = OpenVocabulary()
    return (
        vocab,
        RemoteCausalLM(server, vocab),
        RemoteEncoder(server),
        RemoteKeywordExtractor(server, vocab),
    )

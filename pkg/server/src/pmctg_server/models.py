"""Model wrappers: word-aligned masked encoding and whole-word causal scoring.

Clients send whole words; subword segmentation stays server-side. The
encoder mean-pools each word's piece vectors from the final hidden
layer, masking replaces every piece of a masked word with the mask
token, and the causal scorer expands subword beams until a word
boundary, scoring continuations by probability product.
"""

from __future__ import annotations

import math

import numpy as np
import torch
from transformers import AutoModelForMaskedLM, AutoModelForCausalLM, AutoTokenizer


class RequestTooLong(Exception):
    pass


class InvalidPositions(Exception):
    pass


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


class MaskedEncoder:
    """Word-aligned contextual vectors from a masked-LM checkpoint."""

    def __init__(self, model_id: str, max_seq_len: int = 128):
        self.model_id = model_id
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModelForMaskedLM.from_pretrained(model_id).eval()
        self.dim = int(self.model.config.hidden_size)
        self.max_seq_len = max_seq_len

    def _word_pieces(self, word: str) -> list[int]:
        ids = self.tokenizer(word, add_special_tokens=False)["input_ids"]
        return ids if ids else [self.tokenizer.unk_token_id]

    def _build(self, words: list[str], mask_positions: set[int]):
        if any(not 0 <= p < len(words) for p in mask_positions):
            raise InvalidPositions("mask positions outside the token range")
        ids = [self.tokenizer.cls_token_id]
        spans = []
        for i, word in enumerate(words):
            pieces = self._word_pieces(word)
            if i in mask_positions:
                pieces = [self.tokenizer.mask_token_id] * len(pieces)
            spans.append((len(ids), len(ids) + len(pieces)))
            ids.extend(pieces)
        ids.append(self.tokenizer.sep_token_id)
        if len(ids) > self.max_seq_len:
            raise RequestTooLong(f"{len(ids)} pieces exceed limit {self.max_seq_len}")
        return ids, spans

    @torch.no_grad()
    def _hidden(self, ids: list[int]) -> np.ndarray:
        out = self.model(
            input_ids=torch.tensor([ids]), output_hidden_states=True
        )
        return out.hidden_states[-1][0].numpy()

    def encode(self, words: list[str], mask_positions: list[int]) -> np.ndarray:
        """(len(words), dim) final-layer vectors, mean-pooled per word."""
        ids, spans = self._build(words, set(mask_positions))
        hidden = self._hidden(ids)
        return np.stack([hidden[a:b].mean(axis=0) for a, b in spans])

    def sentence_vector(self, words: list[str]) -> np.ndarray:
        """CLS-position final-layer vector."""
        ids, _ = self._build(words, set())
        return self._hidden(ids)[0]

    def keywords(self, words: list[str], k: int) -> tuple[list[str], list[int]]:
        """Top-k words by cosine of their vector to the sentence vector."""
        ids, spans = self._build(words, set())
        hidden = self._hidden(ids)
        sentence = hidden[0]
        scored = []
        for i, (a, b) in enumerate(spans):
            scored.append((_cosine(hidden[a:b].mean(axis=0), sentence), i))
        scored.sort(key=lambda item: (-item[0], item[1]))
        picked = sorted(i for _, i in scored[: max(k, 0)])
        return [words[i] for i in picked], picked


class CausalScorer:
    """Whole-word next-token candidates and NLL from a causal checkpoint."""

    _BEAM_DEPTH = 3

    def __init__(self, model_id: str, max_seq_len: int = 128, max_batch: int = 64):
        self.model_id = model_id
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModelForCausalLM.from_pretrained(model_id).eval()
        self.max_seq_len = max_seq_len
        self.max_batch = max_batch
        vocab = self.tokenizer.get_vocab()
        self._id_to_piece = {i: p for p, i in vocab.items()}
        # byte-level BPE marks word starts with the Ġ space marker
        self._word_start = np.array(
            [self._id_to_piece.get(i, "").startswith("Ġ") for i in range(len(vocab))]
        )
        self._special_ids = set(self.tokenizer.all_special_ids)

    def _context_ids(self, prefix_words: list[str]) -> list[int]:
        ids = [self.tokenizer.bos_token_id]
        if prefix_words:
            text = " " + " ".join(prefix_words)
            ids.extend(self.tokenizer(text, add_special_tokens=False)["input_ids"])
        if len(ids) > self.max_seq_len:
            raise RequestTooLong(f"{len(ids)} pieces exceed limit {self.max_seq_len}")
        return ids

    @torch.no_grad()
    def _next_logprobs(self, batch_ids: list[list[int]]) -> np.ndarray:
        out = self.model(input_ids=torch.tensor(batch_ids))
        return torch.log_softmax(out.logits[:, -1, :], dim=-1).numpy()

    def _decode_word(self, piece_ids: list[int]) -> str | None:
        text = self.tokenizer.decode(piece_ids)
        word = text.strip()
        if not word or any(c.isspace() for c in word):
            return None
        return word

    def next_words(self, prefix_words: list[str], top_k: int) -> tuple[list[str], list[float]]:
        """Top-k whole-word continuations with renormalized log-probs."""
        ctx = self._context_ids(prefix_words)
        first = self._next_logprobs([ctx])[0]
        width = min(max(4 * top_k, 16), int(self._word_start.sum()))
        masked = np.where(self._word_start, first, -np.inf)
        start_ids = [int(i) for i in np.argsort(masked)[::-1][:width]]
        candidates: dict[str, float] = {}
        beams = []
        for piece in start_ids:
            if piece in self._special_ids:
                continue
            logp = float(first[piece])
            word = self._decode_word([piece])
            if word is not None:
                candidates[word] = max(candidates.get(word, -np.inf), logp)
            beams.append((ctx + [piece], [piece], logp))
        for _ in range(self._BEAM_DEPTH):
            if not beams:
                break
            scores = []
            for i in range(0, len(beams), self.max_batch):
                chunk = beams[i : i + self.max_batch]
                scores.append(self._next_logprobs([b[0] for b in chunk]))
            logprobs = np.concatenate(scores)
            next_beams = []
            for (ids, pieces, logp), row in zip(beams, logprobs):
                # extend only with word-internal pieces; keep the best two
                internal = np.where(self._word_start, -np.inf, row)
                for piece in np.argsort(internal)[::-1][:2]:
                    piece = int(piece)
                    if internal[piece] == -np.inf or piece in self._special_ids:
                        continue
                    new_logp = logp + float(row[piece])
                    new_pieces = pieces + [piece]
                    word = self._decode_word(new_pieces)
                    if word is not None:
                        candidates[word] = max(
                            candidates.get(word, -np.inf), new_logp
                        )
                    next_beams.append((ids + [piece], new_pieces, new_logp))
            next_beams.sort(key=lambda b: -b[2])
            beams = next_beams[:width]
        ranked = sorted(candidates.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
        if not ranked:
            return [], []
        total = math.log(sum(math.exp(lp) for _, lp in ranked))
        return [w for w, _ in ranked], [lp - total for _, lp in ranked]

    @torch.no_grad()
    def mean_nll(self, words: list[str]) -> float:
        """NLL of the word sequence over its pieces, divided by word count."""
        ids = self._context_ids(words)
        if len(ids) < 2:
            return 0.0
        logits = self.model(input_ids=torch.tensor([ids])).logits[0]
        logprobs = torch.log_softmax(logits[:-1], dim=-1)
        targets = torch.tensor(ids[1:])
        picked = logprobs[torch.arange(len(targets)), targets]
        return float(-picked.sum()) / max(len(words), 1)

"""Serialization of vocabularies, KN models, and encoder tables.

All writers produce byte-identical output for identical inputs, so
retraining reproducibility can be asserted at the file level. Model
files carry the vocabulary fingerprint and loading verifies it.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .encoder import PPMIEncoder
from .errors import ModelFormatError
from .lm import FORWARD, KneserNeyLM
from .text import Vocabulary, load_vocabulary, save_vocabulary, vocabulary_hash

VOCAB_FILE = "vocab.tsv"
FORWARD_FILE = "lm_forward.kn"
BACKWARD_FILE = "lm_backward.kn"
ENCODER_FILE = "encoder.bin"

_KN_MAGIC = "KNLM v1"
_ENC_MAGIC = "PMCTG-ENC v1"


def save_kn(lm: KneserNeyLM, vocab_hash: str, path: str | Path) -> None:
    """Text n-gram tables, one section per order, ids space-joined."""
    lines = [f"{_KN_MAGIC} order={lm.order} discount={lm.discount} vocab_hash={vocab_hash}\n"]
    for k, table in enumerate(lm.raw_tables, start=1):
        lines.append(f"\\{k}-grams\n")
        entries = []
        for ctx, words in table.items():
            for w, count in words.items():
                entries.append((ctx + (w,), count))
        entries.sort()
        for gram, count in entries:
            lines.append(f"{' '.join(str(i) for i in gram)}\t{count}\n")
    Path(path).write_text("".join(lines), encoding="utf-8")


def load_kn(
    path: str | Path, vocab: Vocabulary, direction: str = FORWARD
) -> KneserNeyLM:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or not text[0].startswith(_KN_MAGIC):
        raise ModelFormatError(f"{path}: not a KN model file")
    header = dict(
        part.split("=", 1) for part in text[0][len(_KN_MAGIC) :].split() if "=" in part
    )
    order = int(header["order"])
    discount = float(header["discount"])
    if header.get("vocab_hash") != vocabulary_hash(vocab):
        raise ModelFormatError(f"{path}: vocabulary fingerprint mismatch")
    raw: list[dict[tuple[int, ...], dict[int, int]]] = [{} for _ in range(order)]
    current = None
    for line in text[1:]:
        if line.startswith("\\"):
            current = int(line[1:].split("-")[0]) - 1
            continue
        if not line:
            continue
        gram_part, count = line.split("\t")
        ids = tuple(int(i) for i in gram_part.split())
        raw[current].setdefault(ids[:-1], {})[ids[-1]] = int(count)
    return KneserNeyLM(vocab, order, discount, raw, direction)


def save_encoder(enc: PPMIEncoder, vocab_hash: str, path: str | Path) -> None:
    """Flat binary: one text header line, then row-major float64 vectors."""
    header = (
        f"{_ENC_MAGIC} dim={enc.dim} window={enc.window} seed={enc.seed} "
        f"vocab_hash={vocab_hash} rows={enc.vectors.shape[0]}\n"
    )
    with open(path, "wb") as handle:
        handle.write(header.encode("utf-8"))
        handle.write(np.ascontiguousarray(enc.vectors, dtype=np.float64).tobytes())


def load_encoder(path: str | Path, vocab: Vocabulary) -> PPMIEncoder:
    with open(path, "rb") as handle:
        header = handle.readline().decode("utf-8").rstrip("\n")
        if not header.startswith(_ENC_MAGIC):
            raise ModelFormatError(f"{path}: not an encoder table")
        fields = dict(
            part.split("=", 1) for part in header[len(_ENC_MAGIC) :].split()
        )
        if fields.get("vocab_hash") != vocabulary_hash(vocab):
            raise ModelFormatError(f"{path}: vocabulary fingerprint mismatch")
        rows = int(fields["rows"])
        dim = int(fields["dim"])
        data = np.frombuffer(handle.read(), dtype=np.float64)
    if data.size != rows * dim:
        raise ModelFormatError(f"{path}: truncated vector table")
    vectors = data.reshape(rows, dim)
    return PPMIEncoder(
        vectors, vocab, window=int(fields["window"]), seed=int(fields["seed"])
    )


@dataclass
class ModelBundle:
    """Everything one trained model directory provides."""

    vocabulary: Vocabulary
    forward: KneserNeyLM
    backward: KneserNeyLM
    encoder: PPMIEncoder


def save_model_dir(
    directory: str | Path,
    vocab: Vocabulary,
    forward: KneserNeyLM,
    backward: KneserNeyLM,
    encoder: PPMIEncoder,
) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_vocabulary(vocab, directory / VOCAB_FILE)
    fingerprint = vocabulary_hash(vocab)
    save_kn(forward, fingerprint, directory / FORWARD_FILE)
    save_kn(backward, fingerprint, directory / BACKWARD_FILE)
    save_encoder(encoder, fingerprint, directory / ENCODER_FILE)


def load_model_dir(directory: str | Path) -> ModelBundle:
    directory = Path(directory)
    vocab = load_vocabulary(directory / VOCAB_FILE)
    return ModelBundle(
        vocabulary=vocab,
        forward=load_kn(directory / FORWARD_FILE, vocab, "forward"),
        backward=load_kn(directory / BACKWARD_FILE, vocab, "backward"),
        encoder=load_encoder(directory / ENCODER_FILE, vocab),
    )

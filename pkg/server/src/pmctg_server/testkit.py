"""Tiny deterministic checkpoints for contract tests and local smoke runs.

Builds a 2-layer random-weight masked model with a WordPiece tokenizer
and a 2-layer causal model with a byte-level BPE tokenizer, trained on a
small synthetic word list. Weights are random (seeded): the server's
contract is about shapes, alignment, and normalization, not about what
the vectors mean.
"""

from __future__ import annotations

from pathlib import Path

import torch
from tokenizers import Tokenizer, decoders, pre_tokenizers
from tokenizers.models import BPE, WordPiece
from tokenizers.trainers import BpeTrainer, WordPieceTrainer
from transformers import (
    BertConfig,
    BertForMaskedLM,
    GPT2Config,
    GPT2LMHeadModel,
    PreTrainedTokenizerFast,
)

SAMPLE_LINES = [
    "the cat chased the dog",
    "a dog saw the cat",
    "the bird sang a song",
    "a cat ate the fish",
    "the quick brown fox jumped over the lazy dog",
    "paris is the capital of france",
    "the teacher helped a child read the book",
    "um the uh sailor er carried a box",
]


def build_test_checkpoint(out_dir: str | Path, seed: int = 0) -> tuple[Path, Path]:
    """Write masked/ and causal/ checkpoints; returns their paths."""
    out_dir = Path(out_dir)
    masked_dir = out_dir / "masked"
    causal_dir = out_dir / "causal"

    wp = Tokenizer(WordPiece(unk_token="[UNK]"))
    wp.pre_tokenizer = pre_tokenizers.Whitespace()
    wp_trainer = WordPieceTrainer(
        vocab_size=600,
        special_tokens=["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"],
    )
    wp.train_from_iterator(SAMPLE_LINES * 4, wp_trainer)
    masked_tokenizer = PreTrainedTokenizerFast(
        tokenizer_object=wp,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
    )
    torch.manual_seed(seed)
    masked = BertForMaskedLM(
        BertConfig(
            vocab_size=masked_tokenizer.vocab_size,
            hidden_size=32,
            num_hidden_layers=2,
            num_attention_heads=2,
            intermediate_size=64,
            max_position_embeddings=256,
        )
    )
    masked_dir.mkdir(parents=True, exist_ok=True)
    masked.save_pretrained(masked_dir)
    masked_tokenizer.save_pretrained(masked_dir)

    bpe = Tokenizer(BPE(unk_token=None))
    bpe.pre_tokenizer = pre_tokenizers.ByteLevel(add_prefix_space=True)
    bpe.decoder = decoders.ByteLevel()
    bpe_trainer = BpeTrainer(vocab_size=600, special_tokens=["<|endoftext|>"])
    bpe.train_from_iterator(SAMPLE_LINES * 4, bpe_trainer)
    causal_tokenizer = PreTrainedTokenizerFast(
        tokenizer_object=bpe,
        bos_token="<|endoftext|>",
        eos_token="<|endoftext|>",
        pad_token="<|endoftext|>",
    )
    torch.manual_seed(seed + 1)
    causal = GPT2LMHeadModel(
        GPT2Config(
            vocab_size=causal_tokenizer.vocab_size,
            n_embd=32,
            n_layer=2,
            n_head=2,
            n_positions=256,
            bos_token_id=causal_tokenizer.bos_token_id,
            eos_token_id=causal_tokenizer.eos_token_id,
        )
    )
    causal_dir.mkdir(parents=True, exist_ok=True)
    causal.save_pretrained(causal_dir)
    causal_tokenizer.save_pretrained(causal_dir)
    return masked_dir, causal_dir


def main(argv=None) -> int:
    import argparse

    parser = argparse.ArgumentParser(
        description="build a tiny random-weight test checkpoint pair"
    )
    parser.add_argument("out_dir")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    masked_dir, causal_dir = build_test_checkpoint(args.out_dir, args.seed)
    print(f"masked model: {masked_dir}")
    print(f"causal model: {causal_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

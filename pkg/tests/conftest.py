import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from toydata import template_corpus  # noqa: E402

from pmctg import build_ppmi_encoder, build_corpus, train_kn  # noqa: E402
from pmctg.lm import BACKWARD  # noqa: E402


TINY_LINES = [
    "the cat chased the dog .",
    "a dog saw the cat .",
    "the bird sang a song .",
    "a cat ate the fish .",
    "the dog chased a bird .",
    "the fish saw a song .",
]


@pytest.fixture(scope="session")
def tiny_corpus():
    return build_corpus(TINY_LINES * 5)


@pytest.fixture(scope="session")
def tiny_models(tiny_corpus):
    forward = train_kn(tiny_corpus, order=3, discount=0.75)
    backward = train_kn(tiny_corpus, order=3, discount=0.75, direction=BACKWARD)
    encoder = build_ppmi_encoder(tiny_corpus, dim=16, seed=11)
    return tiny_corpus, forward, backward, encoder


@pytest.fixture(scope="session")
def toy_corpus():
    """10k templated sentences; the main generation-backend corpus."""
    return template_corpus(10_000, seed=100)


@pytest.fixture(scope="session")
def toy_models(toy_corpus):
    forward = train_kn(toy_corpus, order=3, discount=0.75)
    backward = train_kn(toy_corpus, order=3, discount=0.75, direction=BACKWARD)
    encoder = build_ppmi_encoder(toy_corpus, dim=64, seed=7)
    return toy_corpus, forward, backward, encoder


@pytest.fixture(scope="session")
def judge_lm():
    """Order-3 KN judge trained on a disjoint sample of the same process."""
    corpus = template_corpus(10_000, seed=900)
    return train_kn(corpus, order=3, discount=0.75)


@pytest.fixture(scope="session")
def filler_corpus():
    """Efficiency-suite corpus: fillers sprinkled into 25% of sentences.

    No punctuation: the sentence-final period otherwise dominates the
    per-sentence impact range and compresses the filler/content contrast.
    """
    return template_corpus(10_000, seed=300, filler_rate=0.25, punctuation=False)


@pytest.fixture(scope="session")
def filler_models(filler_corpus):
    forward = train_kn(filler_corpus, order=3, discount=0.75)
    backward = train_kn(filler_corpus, order=3, discount=0.75, direction=BACKWARD)
    encoder = build_ppmi_encoder(filler_corpus, dim=64, seed=8)
    return filler_corpus, forward, backward, encoder


@pytest.fixture(scope="session")
def race_judge():
    """Judge for the efficiency race: clean text, matching the race corpus."""
    corpus = template_corpus(10_000, seed=900, punctuation=False)
    return train_kn(corpus, order=3, discount=0.75)

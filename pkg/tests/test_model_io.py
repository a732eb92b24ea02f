import numpy as np
import pytest

from pmctg import build_corpus, build_ppmi_encoder, train_kn
from pmctg.errors import ModelFormatError
from pmctg.lm import BACKWARD
from pmctg.model_io import (
    load_encoder,
    load_kn,
    load_model_dir,
    save_encoder,
    save_kn,
    save_model_dir,
)
from pmctg.text import vocabulary_hash


@pytest.fixture(scope="module")
def trained():
    corpus = build_corpus(
        ["the cat sat on the mat .", "a dog ran in the park .", "the cat ran ."] * 4
    )
    forward = train_kn(corpus, order=3, discount=0.75)
    backward = train_kn(corpus, order=3, discount=0.75, direction=BACKWARD)
    encoder = build_ppmi_encoder(corpus, dim=16, seed=5)
    return corpus, forward, backward, encoder


class TestKnSerialization:
    def test_round_trip_distributions(self, trained, tmp_path):
        corpus, forward, _, _ = trained
        path = tmp_path / "lm.kn"
        fingerprint = vocabulary_hash(corpus.vocabulary)
        save_kn(forward, fingerprint, path)
        loaded = load_kn(path, corpus.vocabulary)
        rng = np.random.default_rng(0)
        for _ in range(30):
            ctx = [int(rng.integers(0, corpus.vocabulary.size)) for _ in range(2)]
            np.testing.assert_allclose(
                loaded.distribution(ctx), forward.distribution(ctx), atol=1e-12
            )

    def test_byte_identical_rewrites(self, trained, tmp_path):
        corpus, forward, _, _ = trained
        fingerprint = vocabulary_hash(corpus.vocabulary)
        a, b = tmp_path / "a.kn", tmp_path / "b.kn"
        save_kn(forward, fingerprint, a)
        save_kn(forward, fingerprint, b)
        assert a.read_bytes() == b.read_bytes()

    def test_vocab_hash_checked(self, trained, tmp_path):
        corpus, forward, _, _ = trained
        path = tmp_path / "lm.kn"
        save_kn(forward, "0" * 16, path)
        with pytest.raises(ModelFormatError):
            load_kn(path, corpus.vocabulary)

    def test_order_one_table(self, trained, tmp_path):
        corpus, *_ = trained
        lm = train_kn(corpus, order=1, discount=0.5)
        path = tmp_path / "uni.kn"
        save_kn(lm, vocabulary_hash(corpus.vocabulary), path)
        text = path.read_text()
        assert "\\1-grams" in text
        assert "\\2-grams" not in text
        loaded = load_kn(path, corpus.vocabulary)
        np.testing.assert_allclose(
            loaded.distribution([]), lm.distribution([]), atol=1e-12
        )


class TestEncoderSerialization:
    def test_round_trip_exact(self, trained, tmp_path):
        corpus, _, _, encoder = trained
        path = tmp_path / "enc.bin"
        save_encoder(encoder, vocabulary_hash(corpus.vocabulary), path)
        loaded = load_encoder(path, corpus.vocabulary)
        np.testing.assert_array_equal(loaded.vectors, encoder.vectors)
        assert loaded.window == encoder.window
        assert loaded.seed == encoder.seed

    def test_byte_identical_rewrites(self, trained, tmp_path):
        corpus, _, _, encoder = trained
        fingerprint = vocabulary_hash(corpus.vocabulary)
        a, b = tmp_path / "a.bin", tmp_path / "b.bin"
        save_encoder(encoder, fingerprint, a)
        save_encoder(encoder, fingerprint, b)
        assert a.read_bytes() == b.read_bytes()

    def test_truncated_rejected(self, trained, tmp_path):
        corpus, _, _, encoder = trained
        path = tmp_path / "enc.bin"
        save_encoder(encoder, vocabulary_hash(corpus.vocabulary), path)
        data = path.read_bytes()
        path.write_bytes(data[:-16])
        with pytest.raises(ModelFormatError):
            load_encoder(path, corpus.vocabulary)


class TestModelDir:
    def test_full_round_trip(self, trained, tmp_path):
        corpus, forward, backward, encoder = trained
        save_model_dir(tmp_path / "model", corpus.vocabulary, forward, backward, encoder)
        bundle = load_model_dir(tmp_path / "model")
        assert bundle.vocabulary.surfaces == corpus.vocabulary.surfaces
        assert bundle.forward.direction == "forward"
        assert bundle.backward.direction == BACKWARD
        ctx = [corpus.vocabulary.lookup("the")]
        np.testing.assert_allclose(
            bundle.forward.distribution(ctx), forward.distribution(ctx), atol=1e-12
        )
        np.testing.assert_allclose(
            bundle.backward.distribution(ctx), backward.distribution(ctx), atol=1e-12
        )
        np.testing.assert_array_equal(bundle.encoder.vectors, encoder.vectors)

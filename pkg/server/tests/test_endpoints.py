import math
import os

import numpy as np
import pytest
from fastapi.testclient import TestClient

from pmctg_server.app import create_app
from pmctg_server.config import ServerConfig

WORDS = ["the", "cat", "chased", "a", "dog"]


class TestHealth:
    def test_reports_models_and_dim(self, client, config):
        data = client.get("/v1/health").json()
        assert data["status"] == "ok"
        assert data["masked_model"] == config.masked_model
        assert data["causal_model"] == config.causal_model
        assert data["dim"] == 32  # tiny checkpoint hidden size

    def test_503_before_models_load(self, config):
        app = create_app(config, preload=False)
        with TestClient(app) as bare:
            assert bare.get("/v1/health").status_code == 503
            assert (
                bare.post("/v1/encode", json={"tokens": ["a"]}).status_code == 503
            )
            assert (
                bare.post(
                    "/v1/next_token", json={"prefix": [], "top_k": 1}
                ).status_code
                == 503
            )


class TestEncode:
    def test_one_vector_per_input_token(self, client):
        data = client.post(
            "/v1/encode", json={"tokens": WORDS[:3], "mask_positions": []}
        ).json()
        assert len(data["vectors"]) == 3
        assert all(len(v) == data["dim"] for v in data["vectors"])

    def test_deterministic(self, client):
        payload = {"tokens": WORDS, "mask_positions": [1]}
        first = client.post("/v1/encode", json=payload).json()["vectors"]
        second = client.post("/v1/encode", json=payload).json()["vectors"]
        assert first == second

    def test_masking_changes_other_positions(self, client):
        # attention mixes positions, so masking token 1 must perturb
        # token 0's vector: the non-zero impact witness
        base = np.array(
            client.post("/v1/encode", json={"tokens": WORDS}).json()["vectors"]
        )
        masked = np.array(
            client.post(
                "/v1/encode", json={"tokens": WORDS, "mask_positions": [1]}
            ).json()["vectors"]
        )
        assert np.linalg.norm(base[0] - masked[0]) > 0

    def test_mask_token_identity_invariance(self, client):
        # a masked position hides its token entirely (cat/dog are both
        # single-piece words in the test checkpoint, so lengths agree)
        a = client.post(
            "/v1/encode", json={"tokens": ["the", "cat", "sat"], "mask_positions": [1]}
        ).json()["vectors"]
        b = client.post(
            "/v1/encode", json={"tokens": ["the", "dog", "sat"], "mask_positions": [1]}
        ).json()["vectors"]
        np.testing.assert_allclose(a, b, atol=1e-6)

    def test_unknown_word_still_one_vector(self, client):
        data = client.post(
            "/v1/encode", json={"tokens": ["zzzzq", "cat"]}
        ).json()
        assert len(data["vectors"]) == 2

    def test_invalid_positions_400(self, client):
        response = client.post(
            "/v1/encode", json={"tokens": ["a", "b"], "mask_positions": [7]}
        )
        assert response.status_code == 400

    def test_too_long_413(self, client, config):
        response = client.post(
            "/v1/encode", json={"tokens": ["cat"] * (config.max_seq_len + 1)}
        )
        assert response.status_code == 413

    def test_model_field_stable(self, client, config):
        first = client.post("/v1/encode", json={"tokens": ["a"]}).json()["model"]
        second = client.post("/v1/encode", json={"tokens": ["b"]}).json()["model"]
        assert first == second == config.masked_model


class TestSentenceVector:
    def test_shape_is_hidden_size(self, client):
        data = client.post("/v1/sentence_vector", json={"tokens": WORDS}).json()
        assert len(data["vector"]) == data["dim"] == 32

    def test_deterministic(self, client):
        a = client.post("/v1/sentence_vector", json={"tokens": WORDS}).json()
        b = client.post("/v1/sentence_vector", json={"tokens": WORDS}).json()
        assert a["vector"] == b["vector"]


class TestNextToken:
    def test_logprobs_renormalize(self, client):
        data = client.post(
            "/v1/next_token", json={"prefix": ["the"], "top_k": 8}
        ).json()
        total = sum(math.exp(lp) for lp in data["logprobs"])
        assert total == pytest.approx(1.0, abs=1e-6)
        assert len(data["tokens"]) == len(data["logprobs"]) <= 8

    def test_top_1(self, client):
        data = client.post(
            "/v1/next_token", json={"prefix": ["a"], "top_k": 1}
        ).json()
        assert len(data["tokens"]) == 1

    def test_candidates_are_single_words(self, client):
        data = client.post(
            "/v1/next_token", json={"prefix": [], "top_k": 10}
        ).json()
        for word in data["tokens"]:
            assert word and not any(c.isspace() for c in word)

    def test_empty_prefix_allowed(self, client):
        response = client.post("/v1/next_token", json={"prefix": [], "top_k": 3})
        assert response.status_code == 200

    def test_descending_probability_order(self, client):
        data = client.post(
            "/v1/next_token", json={"prefix": ["the", "cat"], "top_k": 6}
        ).json()
        logprobs = data["logprobs"]
        assert logprobs == sorted(logprobs, reverse=True)


class TestNll:
    def test_nonnegative(self, client):
        data = client.post("/v1/nll", json={"tokens": WORDS}).json()
        assert data["nll"] >= 0.0

    def test_deterministic(self, client):
        a = client.post("/v1/nll", json={"tokens": WORDS}).json()["nll"]
        b = client.post("/v1/nll", json={"tokens": WORDS}).json()["nll"]
        assert a == b


class TestKeywords:
    def test_subset_with_aligned_indices(self, client):
        data = client.post(
            "/v1/keywords", json={"tokens": WORDS, "k": 2}
        ).json()
        assert len(data["keywords"]) == 2
        for word, index in zip(data["keywords"], data["indices"]):
            assert WORDS[index] == word

    def test_k_larger_than_count_returns_all(self, client):
        data = client.post(
            "/v1/keywords", json={"tokens": ["cat", "dog"], "k": 10}
        ).json()
        assert sorted(data["indices"]) == [0, 1]


@pytest.mark.skipif(
    "PMCTG_REAL_CAUSAL_MODEL" not in os.environ,
    reason="needs a real pretrained causal checkpoint",
)
def test_real_checkpoint_knows_paris(tmp_path):
    from pmctg_server.models import CausalScorer

    scorer = CausalScorer(os.environ["PMCTG_REAL_CAUSAL_MODEL"], max_seq_len=64)
    words, _ = scorer.next_words(["the", "capital", "of", "France", "is"], 10)
    assert any(w.lower() == "paris" for w in words)

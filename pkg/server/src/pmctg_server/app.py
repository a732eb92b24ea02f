"""FastAPI application exposing the model endpoints.

Request handling is stateless over immutable loaded models; every
response echoes the serving model's name (and the embedding dimension
where vectors are involved) so clients can detect mid-flight swaps.
"""

from __future__ import annotations

from contextlib import asynccontextmanager

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .config import ServerConfig
from .models import CausalScorer, InvalidPositions, MaskedEncoder, RequestTooLong


class EncodeRequest(BaseModel):
    tokens: list[str] = Field(min_length=1)
    mask_positions: list[int] = Field(default_factory=list)


class TokensRequest(BaseModel):
    tokens: list[str] = Field(min_length=1)


class NextTokenRequest(BaseModel):
    prefix: list[str] = Field(default_factory=list)
    top_k: int = Field(ge=1)


class KeywordsRequest(BaseModel):
    tokens: list[str] = Field(min_length=1)
    k: int = Field(ge=0)


def create_app(config: ServerConfig, preload: bool = True) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if preload:
            app.state.encoder = MaskedEncoder(config.masked_model, config.max_seq_len)
            app.state.scorer = CausalScorer(
                config.causal_model, config.max_seq_len, config.max_batch
            )
        yield

    app = FastAPI(title="pmctg-server", lifespan=lifespan)
    app.state.encoder = None
    app.state.scorer = None
    app.state.config = config

    def encoder() -> MaskedEncoder:
        if app.state.encoder is None:
            raise HTTPException(503, "masked model not loaded")
        return app.state.encoder

    def scorer() -> CausalScorer:
        if app.state.scorer is None:
            raise HTTPException(503, "causal model not loaded")
        return app.state.scorer

    def guard(call):
        try:
            return call()
        except InvalidPositions as exc:
            raise HTTPException(400, str(exc)) from exc
        except RequestTooLong as exc:
            raise HTTPException(413, str(exc)) from exc

    @app.get("/v1/health")
    def health():
        if app.state.encoder is None or app.state.scorer is None:
            raise HTTPException(503, "models not loaded")
        return {
            "status": "ok",
            "masked_model": config.masked_model,
            "causal_model": config.causal_model,
            "dim": encoder().dim,
        }

    @app.post("/v1/encode")
    def encode(request: EncodeRequest):
        enc = encoder()
        if len(request.tokens) > config.max_seq_len:
            raise HTTPException(413, "too many tokens")
        vectors = guard(lambda: enc.encode(request.tokens, request.mask_positions))
        return {
            "vectors": vectors.tolist(),
            "dim": enc.dim,
            "model": config.masked_model,
        }

    @app.post("/v1/sentence_vector")
    def sentence_vector(request: TokensRequest):
        enc = encoder()
        vector = guard(lambda: enc.sentence_vector(request.tokens))
        return {
            "vector": vector.tolist(),
            "dim": enc.dim,
            "model": config.masked_model,
        }

    @app.post("/v1/next_token")
    def next_token(request: NextTokenRequest):
        model = scorer()
        words, logprobs = guard(
            lambda: model.next_words(request.prefix, request.top_k)
        )
        return {"tokens": words, "logprobs": logprobs, "model": config.causal_model}

    @app.post("/v1/nll")
    def nll(request: TokensRequest):
        model = scorer()
        value = guard(lambda: model.mean_nll(request.tokens))
        return {"nll": value, "model": config.causal_model}

    @app.post("/v1/keywords")
    def keywords(request: KeywordsRequest):
        enc = encoder()
        words, indices = guard(lambda: enc.keywords(request.tokens, request.k))
        return {"keywords": words, "indices": indices, "model": config.masked_model}

    return app

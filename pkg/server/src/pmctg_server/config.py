from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ServerConfig:
    """Server settings; model identifiers are HF hub ids or local paths."""

    masked_model: str
    causal_model: str
    host: str = "127.0.0.1"
    port: int = 8400
    max_batch: int = 64
    max_seq_len: int = 128

    def __post_init__(self):
        if self.max_batch < 1 or self.max_seq_len < 4:
            raise ValueError("max_batch >= 1 and max_seq_len >= 4 required")

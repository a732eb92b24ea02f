"""Server launcher: `pmctg-server --masked-model ... --causal-model ...`."""

from __future__ import annotations

import argparse

import uvicorn

from .app import create_app
from .config import ServerConfig


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmctg-server")
    parser.add_argument("--masked-model", required=True,
                        help="masked-LM checkpoint (hub id or local path)")
    parser.add_argument("--causal-model", required=True,
                        help="causal-LM checkpoint (hub id or local path)")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8400)
    parser.add_argument("--max-batch", type=int, default=64)
    parser.add_argument("--max-seq-len", type=int, default=128)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = ServerConfig(
        masked_model=args.masked_model,
        causal_model=args.causal_model,
        host=args.host,
        port=args.port,
        max_batch=args.max_batch,
        max_seq_len=args.max_seq_len,
    )
    uvicorn.run(create_app(config), host=config.host, port=config.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

import socket
import threading
import time

import pytest
import uvicorn
from fastapi.testclient import TestClient

from pmctg_server.app import create_app
from pmctg_server.config import ServerConfig
from pmctg_server.testkit import build_test_checkpoint


@pytest.fixture(scope="session")
def checkpoint(tmp_path_factory):
    out = tmp_path_factory.mktemp("checkpoint")
    masked, causal = build_test_checkpoint(out, seed=0)
    return str(masked), str(causal)


@pytest.fixture(scope="session")
def config(checkpoint):
    masked, causal = checkpoint
    return ServerConfig(masked_model=masked, causal_model=causal, max_seq_len=96)


@pytest.fixture(scope="session")
def client(config):
    app = create_app(config)
    with TestClient(app) as test_client:
        yield test_client


@pytest.fixture(scope="session")
def live_server_url(config):
    """Real uvicorn server on an ephemeral port, for wire-level clients."""
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    app = create_app(config)
    server = uvicorn.Server(
        uvicorn.Config(app, host="127.0.0.1", port=port, log_level="warning")
    )
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 30
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("server failed to start")
        time.sleep(0.05)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=10)

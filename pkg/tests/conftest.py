"""Shared fixtures: paths to bundled data and a stub HTTP service helper."""

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = REPO_ROOT / "data"


@pytest.fixture(scope="session")
def toy_corpus_path() -> Path:
    return DATA_DIR / "toy_corpus.jsonl"


@pytest.fixture(scope="session")
def toy_qa_path() -> Path:
    return DATA_DIR / "toy_qa.jsonl"


@pytest.fixture(scope="session")
def toy_config_path() -> Path:
    return DATA_DIR / "toy_config.toml"


class StubService:
    """Minimal JSON-over-HTTP stub for exercising the service clients.

    `responder(path, payload)` returns (status, body); body may be a dict
    (sent as JSON) or a raw string. Raise nothing: the stub is the happy or
    deliberately broken side of the wire, never a crash.
    """

    def __init__(self, responder):
        self.responder = responder
        self.requests = []
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                raw = self.rfile.read(length)
                try:
                    payload = json.loads(raw) if raw else {}
                except json.JSONDecodeError:
                    payload = None
                stub.requests.append((self.path, payload))
                status, body = stub.responder(self.path, payload)
                data = (
                    json.dumps(body).encode("utf-8")
                    if isinstance(body, (dict, list))
                    else str(body).encode("utf-8")
                )
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        class QuietServer(ThreadingHTTPServer):
            daemon_threads = True

            def handle_error(self, request, client_address):
                pass  # clients abandoning a slow stub are expected in timeout tests

        self.server = QuietServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self.server.server_address
        return f"http://{host}:{port}"

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()
        return False


@pytest.fixture
def stub_service():
    """Factory: `with stub_service(responder) as stub: ...`."""
    return StubService

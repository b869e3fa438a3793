"""HTTP API over a loaded index bundle, plus static hosting for the web UI.

Endpoints:
    GET  /health  -> {"status": "ok"}
    POST /ask     {"question": str, "top_n"?: int} -> QueryResult JSON
    POST /eval    {"dataset_path": str, "mode": "rc"|"pipeline"} -> report JSON
    GET  /config  -> active pipeline configuration

Request failures come back as {"error": ...} JSON: 400 for bad requests,
422 for data problems, 502 for external-service failures.
"""

import logging
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .config import PipelineConfig
from .errors import DataError, ExternalServiceError
from .pipeline import IndexBundle, answer_question, run_eval

log = logging.getLogger(__name__)


def create_app(
    bundle: IndexBundle,
    config: PipelineConfig,
    frontend_dir: Optional[Path] = None,
) -> FastAPI:
    app = FastAPI(title="sciqa", docs_url=None, redoc_url=None)

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/config")
    def get_config():
        return config.to_dict()

    @app.post("/ask")
    async def ask(request: Request):
        body, error = await _json_body(request)
        if error is not None:
            return error
        question = body.get("question")
        if not isinstance(question, str) or not question.strip():
            return _error_response(400, "body must contain a non-empty 'question' string")
        top_n = body.get("top_n")
        if top_n is not None and (not isinstance(top_n, int) or top_n < 1):
            return _error_response(400, "'top_n' must be a positive integer")
        try:
            result = answer_question(bundle, config, question, top_n=top_n)
        except ValueError as exc:
            return _error_response(400, str(exc))
        except DataError as exc:
            return _error_response(422, str(exc))
        except ExternalServiceError as exc:
            return _error_response(502, str(exc))
        return result.to_dict()

    @app.post("/eval")
    async def run_eval_endpoint(request: Request):
        body, error = await _json_body(request)
        if error is not None:
            return error
        dataset_path = body.get("dataset_path")
        mode = body.get("mode", "rc")
        if not isinstance(dataset_path, str) or not dataset_path:
            return _error_response(400, "body must contain a 'dataset_path' string")
        try:
            report = run_eval(bundle, config, dataset_path, mode=mode)
        except ValueError as exc:
            return _error_response(400, str(exc))
        except DataError as exc:
            return _error_response(422, str(exc))
        except ExternalServiceError as exc:
            return _error_response(502, str(exc))
        return report.to_dict()

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="ui")
    return app


async def _json_body(request: Request):
    try:
        body = await request.json()
    except Exception:
        return None, _error_response(400, "request body is not valid JSON")
    if not isinstance(body, dict):
        return None, _error_response(400, "request body must be a JSON object")
    return body, None


def _error_response(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def serve(
    bundle: IndexBundle,
    config: PipelineConfig,
    bind: str = "127.0.0.1:8000",
    frontend_dir: Optional[Path] = None,
) -> None:
    """Run the API with uvicorn until interrupted."""
    import uvicorn

    host, _, port = bind.partition(":")
    app = create_app(bundle, config, frontend_dir=frontend_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000), log_level="info")

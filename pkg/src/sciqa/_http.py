"""JSON-over-HTTP helper shared by the external-service clients."""

import logging
import time

import requests

from .errors import ProtocolError, TransportError

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 30.0
DEFAULT_ATTEMPTS = 3
RETRY_BACKOFF = 0.1  # seconds, doubled per retry


def post_json(url: str, payload: dict, timeout: float, attempts: int) -> requests.Response:
    """POST a JSON payload, retrying transport failures with backoff.

    Connection errors and timeouts are retried up to `attempts` times and
    then surface as TransportError. HTTP status handling is left to the
    caller; each client classifies non-2xx per its own contract.
    """
    last_exc = None
    for attempt in range(max(1, attempts)):
        if attempt:
            time.sleep(RETRY_BACKOFF * (2 ** (attempt - 1)))
        try:
            return requests.post(url, json=payload, timeout=timeout)
        except requests.RequestException as exc:
            last_exc = exc
            log.warning("POST %s failed (attempt %d/%d): %s", url, attempt + 1, attempts, exc)
    raise TransportError(f"POST {url} failed after {attempts} attempts: {last_exc}") from last_exc


def parse_json_body(response: requests.Response, url: str) -> dict:
    try:
        body = response.json()
    except ValueError as exc:
        raise ProtocolError(f"{url}: response is not JSON: {exc}") from exc
    if not isinstance(body, dict):
        raise ProtocolError(f"{url}: expected a JSON object, got {type(body).__name__}")
    return body

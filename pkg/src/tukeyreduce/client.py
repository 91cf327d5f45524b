"""Thin HTTP client used by the CLI.

With no server URL the client runs the service app in-process over an ASGI
transport, so every CLI invocation exercises the same request/response path
as a deployed service without needing one.
"""

from __future__ import annotations

import warnings

import httpx


class ServiceClient:
    def __init__(self, server: str | None = None):
        if server:
            self._client = httpx.Client(base_url=server,
                                        timeout=httpx.Timeout(600.0))
        else:
            with warnings.catch_warnings():
                # the bundled test client emits a packaging deprecation
                # notice on import; it is irrelevant to callers
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .api import app
            self._client = TestClient(app, raise_server_exceptions=False)

    def post(self, path: str, payload: dict) -> httpx.Response:
        return self._client.post(path, json=payload)

    def get(self, path: str) -> httpx.Response:
        return self._client.get(path)

    def close(self):
        self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

"""Provider wiring: the deterministic fallback suite and a remote HTTP
suite driven by environment variables.

The remote protocol is one POST endpoint taking a versioned envelope
{version, task, ...inputs} and answering a per-task JSON schema. With no
URL configured the fallback suite runs, so a fresh checkout needs zero
configuration.
"""

from __future__ import annotations

import os
from typing import Sequence

import httpx
import numpy as np

from .chroma import fallback_images_from_text
from .dataset import ColumnMeta, DatasetMeta
from .errors import ProviderError
from .filterql import fallback_filter_text
from .gallery import EMBED_DIM, fallback_embed
from .intent import ProviderSuite, fallback_relevant_columns, fallback_time_columns

ENV_URL = "INFOFORGE_PROVIDER_URL"
ENV_TIMEOUT_S = "INFOFORGE_PROVIDER_TIMEOUT_S"
ENV_RETRIES = "INFOFORGE_PROVIDER_RETRIES"
PROTOCOL_VERSION = "1"
DEFAULT_TIMEOUT_S = 10.0
DEFAULT_RETRIES = 2


def fallback_suite() -> ProviderSuite:
    return ProviderSuite(
        name="fallback",
        relevance=fallback_relevant_columns,
        filter=fallback_filter_text,
        time_columns=fallback_time_columns,
        images_from_text=fallback_images_from_text,
        embedding=fallback_embed,
    )


def _meta_summary(meta: DatasetMeta) -> dict:
    return {
        "summary": meta.summary_text,
        "columns": [{"name": c.name, "kind": c.kind.value} for c in meta.columns],
    }


class _RemoteClient:
    def __init__(self, name: str, base_url: str, timeout_s: float, retries: int):
        self.name = name
        self.base_url = base_url
        self.timeout_s = timeout_s
        self.retries = retries

    def call(self, task: str, payload: dict) -> dict:
        body = {"version": PROTOCOL_VERSION, "task": task, **payload}
        last: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                response = httpx.post(self.base_url, json=body, timeout=self.timeout_s)
                response.raise_for_status()
                data = response.json()
                if not isinstance(data, dict):
                    raise ValueError("response body is not an object")
                return data
            except (httpx.HTTPError, ValueError) as exc:
                last = exc
        raise ProviderError(
            self.name,
            f"provider task {task!r} failed after {self.retries + 1} attempts: {last}",
        )

    def _expect(self, data: dict, key: str, task: str):
        if key not in data:
            raise ProviderError(self.name, f"task {task!r} response lacks {key!r}")
        return data[key]

    def relevance(self, chunk: str, meta: DatasetMeta) -> list[str]:
        data = self.call("relevance", {"chunk": chunk, "meta": _meta_summary(meta)})
        return [str(n) for n in self._expect(data, "columns", "relevance")]

    def filter(self, chunk: str, meta: DatasetMeta) -> str:
        data = self.call("filter", {"chunk": chunk, "meta": _meta_summary(meta)})
        return str(self._expect(data, "query", "filter"))

    def time_columns(self, columns: Sequence[ColumnMeta]) -> list[str]:
        payload = {"columns": [{"name": c.name, "kind": c.kind.value} for c in columns]}
        data = self.call("time-columns", payload)
        return [str(n) for n in self._expect(data, "columns", "time-columns")]

    def images_from_text(self, text: str) -> list[np.ndarray]:
        data = self.call("images", {"chunk": text})
        images = []
        for raw in self._expect(data, "images", "images"):
            arr = np.asarray(raw, dtype=np.uint8)
            if arr.ndim != 3 or arr.shape[2] not in (3, 4):
                raise ProviderError(self.name, "task 'images' returned a non-raster payload")
            images.append(arr)
        return images

    def embedding(self, text: str) -> np.ndarray:
        data = self.call("embedding", {"chunk": text})
        vector = np.asarray(self._expect(data, "vector", "embedding"), dtype=float)
        if vector.shape != (EMBED_DIM,):
            raise ProviderError(
                self.name, f"task 'embedding' returned shape {vector.shape}, want ({EMBED_DIM},)"
            )
        return vector


def remote_suite(base_url: str | None = None) -> ProviderSuite:
    base_url = base_url or os.environ.get(ENV_URL, "")
    if not base_url:
        raise ProviderError("remote", f"remote provider needs {ENV_URL} set")
    client = _RemoteClient(
        name="remote",
        base_url=base_url,
        timeout_s=float(os.environ.get(ENV_TIMEOUT_S, DEFAULT_TIMEOUT_S)),
        retries=int(os.environ.get(ENV_RETRIES, DEFAULT_RETRIES)),
    )
    return ProviderSuite(
        name="remote",
        relevance=client.relevance,
        filter=client.filter,
        time_columns=client.time_columns,
        images_from_text=client.images_from_text,
        embedding=client.embedding,
    )


def suite_named(name: str) -> ProviderSuite:
    if name == "fallback":
        return fallback_suite()
    if name == "remote":
        return remote_suite()
    raise ProviderError(name, f"unknown provider suite {name!r}")

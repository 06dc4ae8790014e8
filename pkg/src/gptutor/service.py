"""Pipeline orchestration: extract -> fit -> build -> complete, with caching.

The cache is keyed by prompt content and model, not by file position, so
edits that leave the rendered prompt unchanged legitimately reuse answers.
Cancelled or failed requests never reach the cache.
"""

from __future__ import annotations

import hashlib
import threading
import time
from collections import OrderedDict
from dataclasses import replace

from gptutor.config import ServiceConfig
from gptutor.errors import Cancelled
from gptutor.extractor import ExplainRequest, extract_context
from gptutor.gateway import CancelToken, ExplanationResult, LlmGateway
from gptutor.indexer import SymbolIndex, invalidate_path, scan_workspace
from gptutor.prompt import PromptBundle, build_prompt, fit_to_budget


def cache_key(prompt: PromptBundle) -> str:
    payload = (
        prompt.model + "\u0000" + prompt.system_message + "\u0000" + prompt.user_message
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class LruCache:
    """Thread-safe LRU of ExplanationResults; capacity 0 disables caching."""

    def __init__(self, capacity: int):
        self._capacity = capacity
        self._entries: OrderedDict[str, ExplanationResult] = OrderedDict()
        self._lock = threading.Lock()

    def get(self, key: str) -> ExplanationResult | None:
        if self._capacity == 0:
            return None
        with self._lock:
            result = self._entries.get(key)
            if result is not None:
                self._entries.move_to_end(key)
            return result

    def put(self, key: str, result: ExplanationResult) -> None:
        if self._capacity == 0:
            return
        with self._lock:
            self._entries[key] = result
            self._entries.move_to_end(key)
            while len(self._entries) > self._capacity:
                self._entries.popitem(last=False)

    def __len__(self) -> int:
        return len(self._entries)


class ExplainService:
    """Holds the index snapshot, the gateway, and the answer cache."""

    def __init__(self, config: ServiceConfig, *, gateway: LlmGateway | None = None):
        self.config = config
        self._gateway = gateway or LlmGateway(
            config.llm, transcript_path=config.transcript_path
        )
        self._index = scan_workspace(config.workspace_root, config.index_config)
        self._index_lock = threading.Lock()
        self._cache = LruCache(config.cache_capacity)

    @property
    def indexed_files(self) -> int:
        return len(self.snapshot().file_stamps)

    @property
    def skipped_files(self) -> int:
        return len(self.snapshot().skipped_paths)

    def snapshot(self) -> SymbolIndex:
        with self._index_lock:
            return self._index

    def invalidate(self, path: str, content: str | None = None) -> None:
        with self._index_lock:
            self._index = invalidate_path(self._index, path, content)

    def prompt_for(self, req: ExplainRequest) -> PromptBundle:
        """Extract and render without touching any backend."""
        bundle = extract_context(
            req, self.snapshot(), defining_file_budget=self.config.defining_file_budget
        )
        fitted = fit_to_budget(bundle, self.config.budget)
        model = req.model_override or self.config.llm.model
        return build_prompt(fitted, self.config.budget, model)

    def handle_explain(
        self, req: ExplainRequest, cancel: CancelToken | None = None
    ) -> ExplanationResult:
        started = time.monotonic()
        prompt = self.prompt_for(req)
        key = cache_key(prompt)
        hit = self._cache.get(key)
        if hit is not None:
            latency_ms = int((time.monotonic() - started) * 1000)
            return replace(hit, cached=True, latency_ms=latency_ms)
        result = self._gateway.complete(prompt, backend=req.backend, cancel=cancel)
        if cancel is not None and cancel.cancelled:
            raise Cancelled("request cancelled")
        self._cache.put(key, result)
        return result

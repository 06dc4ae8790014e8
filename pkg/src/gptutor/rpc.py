"""JSON-RPC 2.0 server over stdio with Content-Length framing.

Methods: ``initialize``, ``explain``, ``buildPrompt``, ``shutdown``.
Notifications: ``$/cancelRequest`` (aborts an in-flight request with error
-32800) and ``didChange`` (invalidates one file in the index). Requests run
concurrently on a worker pool; responses are written whole under a lock.

Error codes: standard JSON-RPC codes for protocol faults, -32002 before
initialize, -32800 for cancellation, and -32000 for domain errors with the
stable error code in ``error.data.code``.
"""

from __future__ import annotations

import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import BinaryIO

import gptutor
from gptutor.config import ServiceConfig, _apply_settings
from gptutor.errors import Cancelled, GPTutorError
from gptutor.extractor import ExplainRequest, Selection
from gptutor.gateway import BACKEND_NAMES, CancelToken
from gptutor.indexer import Position
from gptutor.service import ExplainService

logger = logging.getLogger(__name__)

PARSE_ERROR = -32700
INVALID_REQUEST = -32600
METHOD_NOT_FOUND = -32601
INVALID_PARAMS = -32602
INTERNAL_ERROR = -32603
SERVER_NOT_INITIALIZED = -32002
REQUEST_CANCELLED = -32800
DOMAIN_ERROR = -32000


def read_message(stream: BinaryIO) -> dict | None:
    """Read one framed message; None on clean EOF.

    Raises ValueError for malformed framing or JSON.
    """
    content_length: int | None = None
    while True:
        line = stream.readline()
        if line == b"":
            return None
        line = line.rstrip(b"\r\n")
        if line == b"":
            if content_length is None:
                continue  # stray blank line between messages
            break
        name, _, value = line.partition(b":")
        if name.strip().lower() == b"content-length":
            try:
                content_length = int(value.strip())
            except ValueError:
                raise ValueError(f"bad Content-Length: {value!r}") from None
    body = stream.read(content_length)
    if body is None or len(body) != content_length:
        raise ValueError("truncated message body")
    return json.loads(body.decode("utf-8"))


def encode_message(message: dict) -> bytes:
    body = json.dumps(message, sort_keys=True, separators=(",", ":")).encode("utf-8")
    header = f"Content-Length: {len(body)}\r\n\r\n".encode("ascii")
    return header + body


class _ParamError(Exception):
    pass


def _require(params: dict, key: str):
    if not isinstance(params, dict) or key not in params:
        raise _ParamError(f"missing required param: {key}")
    return params[key]


def _parse_position(raw: dict, label: str) -> Position:
    if not isinstance(raw, dict) or "line" not in raw or "character" not in raw:
        raise _ParamError(f"{label} must have integer line and character")
    try:
        return Position(int(raw["line"]), int(raw["character"]))
    except (TypeError, ValueError):
        raise _ParamError(f"{label} must have integer line and character") from None


class RpcServer:
    def __init__(self, config: ServiceConfig, *, service_factory=ExplainService):
        self._base_config = config
        self._service_factory = service_factory
        self._service: ExplainService | None = None
        self._write_lock = threading.Lock()
        self._inflight: dict[object, CancelToken] = {}
        self._inflight_lock = threading.Lock()
        self._shutdown = threading.Event()

    # -- transport ---------------------------------------------------------

    def _write(self, out: BinaryIO, message: dict) -> None:
        with self._write_lock:
            out.write(encode_message(message))
            out.flush()

    def _respond(self, out: BinaryIO, msg_id, result) -> None:
        self._write(out, {"jsonrpc": "2.0", "id": msg_id, "result": result})

    def _respond_error(self, out: BinaryIO, msg_id, code: int, message: str, data=None) -> None:
        error: dict = {"code": code, "message": message}
        if data is not None:
            error["data"] = data
        self._write(out, {"jsonrpc": "2.0", "id": msg_id, "error": error})

    # -- handlers ----------------------------------------------------------

    def _handle_initialize(self, params: dict) -> dict:
        root = _require(params, "workspaceRoot")
        config = ServiceConfig(
            workspace_root=root,
            llm=self._base_config.llm,
            budget=self._base_config.budget,
            index_config=self._base_config.index_config,
            cache_capacity=self._base_config.cache_capacity,
            defining_file_budget=self._base_config.defining_file_budget,
            default_backend=self._base_config.default_backend,
            transcript_path=self._base_config.transcript_path,
        )
        overrides = params.get("config")
        if overrides is not None:
            if not isinstance(overrides, dict):
                raise _ParamError("config must be an object")
            config = _apply_settings(config, overrides)
        self._service = self._service_factory(config)
        return {
            "serverVersion": gptutor.__version__,
            "indexedFiles": self._service.indexed_files,
            "skippedFiles": self._service.skipped_files,
        }

    def _parse_explain_params(self, params: dict) -> ExplainRequest:
        service = self._service
        assert service is not None
        file_path = _require(params, "file")
        selection_raw = _require(params, "selection")
        start = _parse_position(_require(selection_raw, "start"), "selection.start")
        end = _parse_position(_require(selection_raw, "end"), "selection.end")
        backend = params.get("backend", service.config.default_backend)
        if backend not in BACKEND_NAMES:
            raise _ParamError(f"backend must be one of {', '.join(BACKEND_NAMES)}")
        model = params.get("model")
        return ExplainRequest(
            workspace_root=str(service.config.workspace_root),
            selection=Selection(path=str(file_path), start=start, end=end),
            model_override=str(model) if model is not None else None,
            backend=backend,
        )

    def _handle_explain(self, params: dict, cancel: CancelToken) -> dict:
        assert self._service is not None
        req = self._parse_explain_params(params)
        result = self._service.handle_explain(req, cancel=cancel)
        return {
            "text": result.text,
            "model": result.model,
            "cached": result.cached,
            "latencyMs": result.latency_ms,
        }

    def _handle_build_prompt(self, params: dict) -> dict:
        assert self._service is not None
        req = self._parse_explain_params(params)
        prompt = self._service.prompt_for(req)
        return {"system": prompt.system_message, "user": prompt.user_message}

    def _dispatch(self, out: BinaryIO, message: dict) -> None:
        msg_id = message.get("id")
        method = message.get("method")
        params = message.get("params") or {}

        token = CancelToken()
        with self._inflight_lock:
            self._inflight[msg_id] = token
        try:
            if method in ("explain", "buildPrompt"):
                if self._service is None:
                    self._respond_error(
                        out, msg_id, SERVER_NOT_INITIALIZED, "server not initialized"
                    )
                    return
                if method == "explain":
                    result = self._handle_explain(params, token)
                else:
                    result = self._handle_build_prompt(params)
            elif method == "initialize":
                result = self._handle_initialize(params)
            else:
                self._respond_error(out, msg_id, METHOD_NOT_FOUND, f"unknown method: {method}")
                return
            if token.cancelled:
                raise Cancelled("request cancelled")
            self._respond(out, msg_id, result)
        except _ParamError as exc:
            self._respond_error(out, msg_id, INVALID_PARAMS, str(exc))
        except Cancelled:
            self._respond_error(out, msg_id, REQUEST_CANCELLED, "request cancelled")
        except GPTutorError as exc:
            self._respond_error(out, msg_id, DOMAIN_ERROR, str(exc), data={"code": exc.code})
        except Exception as exc:  # noqa: BLE001 - protocol boundary
            logger.exception("internal error handling %s", method)
            self._respond_error(out, msg_id, INTERNAL_ERROR, f"internal error: {exc}")
        finally:
            with self._inflight_lock:
                self._inflight.pop(msg_id, None)

    def _handle_notification(self, message: dict) -> None:
        method = message.get("method")
        params = message.get("params") or {}
        if method == "$/cancelRequest":
            target = params.get("id")
            with self._inflight_lock:
                token = self._inflight.get(target)
            if token is not None:
                token.cancel()
        elif method == "didChange":
            if self._service is not None and "file" in params:
                self._service.invalidate(str(params["file"]), params.get("content"))
        # unknown notifications are ignored per JSON-RPC

    # -- main loop ---------------------------------------------------------

    def run(self, rin: BinaryIO, rout: BinaryIO) -> int:
        """Serve until shutdown or EOF; returns the process exit status."""
        pool = ThreadPoolExecutor(max_workers=8, thread_name_prefix="gptutor-rpc")
        try:
            while not self._shutdown.is_set():
                try:
                    message = read_message(rin)
                except ValueError as exc:
                    self._respond_error(rout, None, PARSE_ERROR, f"parse error: {exc}")
                    continue
                if message is None:
                    break
                if not isinstance(message, dict) or "method" not in message:
                    self._respond_error(
                        rout, message.get("id") if isinstance(message, dict) else None,
                        INVALID_REQUEST, "not a JSON-RPC request",
                    )
                    continue
                if "id" not in message:
                    self._handle_notification(message)
                    continue
                if message["method"] == "shutdown":
                    self._respond(rout, message["id"], None)
                    self._shutdown.set()
                    break
                pool.submit(self._dispatch, rout, message)
        finally:
            pool.shutdown(wait=True)
        return 0


def serve(rin: BinaryIO, rout: BinaryIO, config: ServiceConfig) -> int:
    """Run the JSON-RPC server over the given byte streams."""
    return RpcServer(config).run(rin, rout)

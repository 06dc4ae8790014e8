"""Errors raised across the engine.

Every error carries a stable machine-readable ``code`` so the CLI and the
JSON-RPC server can map failures to structured diagnostics without string
matching.
"""

from __future__ import annotations


class GPTutorError(Exception):
    """Base class for all domain errors."""

    code = "ERROR"


class RootNotFound(GPTutorError):
    code = "ROOT_NOT_FOUND"


class FileNotFound(GPTutorError):
    code = "FILE_NOT_FOUND"


class OutsideWorkspace(GPTutorError):
    code = "OUTSIDE_WORKSPACE"


class NoToken(GPTutorError):
    """The cursor line holds no identifier to explain."""

    code = "NO_TOKEN"


class BudgetTooSmall(GPTutorError):
    """The token budget cannot fit even the question and cursor line."""

    code = "BUDGET_TOO_SMALL"


class AuthError(GPTutorError):
    code = "AUTH_ERROR"


class RateLimited(GPTutorError):
    code = "RATE_LIMITED"


class BackendUnavailable(GPTutorError):
    code = "BACKEND_UNAVAILABLE"


class MalformedResponse(GPTutorError):
    code = "MALFORMED_RESPONSE"


class StoreUnwritable(GPTutorError):
    code = "STORE_UNWRITABLE"


class Cancelled(GPTutorError):
    """The request was cancelled before a result could be returned."""

    code = "CANCELLED"

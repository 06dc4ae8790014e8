"""Code-explanation engine.

Indexes a workspace for symbol definitions, resolves the definition behind
a selection, renders a tutor prompt with that cross-file context, and asks
a chat-completion backend for the explanation. Usable as a library, a CLI
(``gptutor``), and a JSON-RPC stdio server for editor clients.
"""

from gptutor.errors import (
    AuthError,
    BackendUnavailable,
    BudgetTooSmall,
    Cancelled,
    FileNotFound,
    GPTutorError,
    MalformedResponse,
    NoToken,
    OutsideWorkspace,
    RateLimited,
    RootNotFound,
    StoreUnwritable,
)
from gptutor.extractor import ContextBundle, ExplainRequest, Selection, extract_context, locate_token
from gptutor.gateway import (
    CancelToken,
    ExplanationResult,
    LlmConfig,
    LlmGateway,
    complete,
    parse_completion_response,
    record_transcript,
)
from gptutor.indexer import (
    IndexConfig,
    Position,
    QueryContext,
    Span,
    SymbolDef,
    SymbolIndex,
    index_file,
    invalidate_path,
    lookup_definitions,
    scan_workspace,
)
from gptutor.languages import Language, detect_language
from gptutor.prompt import Budget, PromptBundle, build_prompt, estimate_tokens, fit_to_budget

__version__ = "0.1.0"

__all__ = [
    "AuthError",
    "BackendUnavailable",
    "Budget",
    "BudgetTooSmall",
    "Cancelled",
    "CancelToken",
    "ContextBundle",
    "ExplainRequest",
    "ExplanationResult",
    "FileNotFound",
    "GPTutorError",
    "IndexConfig",
    "Language",
    "LlmConfig",
    "LlmGateway",
    "MalformedResponse",
    "NoToken",
    "OutsideWorkspace",
    "Position",
    "PromptBundle",
    "QueryContext",
    "RateLimited",
    "RootNotFound",
    "Selection",
    "Span",
    "StoreUnwritable",
    "SymbolDef",
    "SymbolIndex",
    "build_prompt",
    "complete",
    "detect_language",
    "estimate_tokens",
    "extract_context",
    "fit_to_budget",
    "index_file",
    "invalidate_path",
    "locate_token",
    "lookup_definitions",
    "parse_completion_response",
    "record_transcript",
    "scan_workspace",
    "__version__",
]

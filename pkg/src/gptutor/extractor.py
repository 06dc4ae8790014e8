"""Turn a selection into everything the prompt template needs.

Pipeline per request: detect the language, read the current file, derive the
selected token (for zero-width selections), and resolve the definition
behind it through the symbol index. When the defining file is small enough
the whole file is inlined as context; otherwise only the definition block.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from gptutor.errors import FileNotFound, NoToken, OutsideWorkspace
from gptutor.indexer import (
    Position,
    QueryContext,
    Span,
    SymbolIndex,
    extract_imported_names,
    lookup_definitions,
    normalize_newlines,
)
from gptutor.languages import Language, detect_language, is_identifier

DEFAULT_DEFINING_FILE_BUDGET = 8000

_WORD_RUN = re.compile(r"[A-Za-z0-9_]+")


@dataclass(frozen=True)
class Selection:
    """A selected range in a file; zero-width means a bare cursor."""

    path: str
    start: Position
    end: Position

    @property
    def is_cursor(self) -> bool:
        return self.start == self.end


@dataclass(frozen=True)
class ExplainRequest:
    workspace_root: str
    selection: Selection
    model_override: str | None = None
    backend: str = "live"


@dataclass(frozen=True)
class ContextBundle:
    language: Language
    selected_text: str
    cursor_line_text: str
    current_code: str
    selection_line: int
    selected_function_name: str | None = None
    resolved_definition_source: str | None = None
    definition_block: str | None = None


@dataclass(frozen=True)
class LocatedToken:
    span: Span
    text: str


def _clamp(value: int, low: int, high: int) -> int:
    return max(low, min(value, high))


def locate_token(content: str, position: Position) -> LocatedToken:
    """Find the identifier at (or nearest to) a cursor position.

    Maximal word-character runs on the cursor line are candidates, except
    runs that start with a digit. The run containing the column wins;
    otherwise the closest run (ties go left). A single leading ``.`` is kept
    when the identifier is a dotted member access.
    """
    lines = normalize_newlines(content).split("\n")
    line_idx = _clamp(position.line, 0, len(lines) - 1)
    line = lines[line_idx]
    col = _clamp(position.character, 0, len(line))

    runs = [
        (m.start(), m.end())
        for m in _WORD_RUN.finditer(line)
        if not m.group()[0].isdigit()
    ]
    if not runs:
        raise NoToken(f"no identifier on line {line_idx}")

    def distance(run: tuple[int, int]) -> int:
        start, end = run
        if start <= col < end:
            return 0
        return min(abs(col - start), abs(col - (end - 1)))

    start, end = min(runs, key=lambda r: (distance(r), r[0]))
    text = line[start:end]
    if start > 0 and line[start - 1] == ".":
        return LocatedToken(
            Span(Position(line_idx, start - 1), Position(line_idx, end)), "." + text
        )
    return LocatedToken(Span(Position(line_idx, start), Position(line_idx, end)), text)


def _receiver_before(line: str, dot_col: int) -> str | None:
    """Word run ending immediately before the dot at `dot_col`, if any."""
    end = dot_col
    start = end
    while start > 0 and (line[start - 1].isalnum() or line[start - 1] == "_"):
        start -= 1
    return line[start:end] or None


def _offset_of(lines: list[str], pos: Position) -> int:
    line = _clamp(pos.line, 0, len(lines) - 1)
    col = _clamp(pos.character, 0, len(lines[line]))
    return sum(len(l) + 1 for l in lines[:line]) + col


def resolve_in_workspace(workspace_root: str | Path, file_path: str) -> tuple[Path, str]:
    """Resolve a request path against the workspace; reject escapes."""
    root = Path(workspace_root).resolve()
    candidate = Path(file_path)
    abs_path = (candidate if candidate.is_absolute() else root / candidate).resolve()
    try:
        rel = abs_path.relative_to(root).as_posix()
    except ValueError:
        raise OutsideWorkspace(f"{file_path} is outside workspace {root}") from None
    return abs_path, rel


def extract_context(
    req: ExplainRequest,
    index: SymbolIndex,
    *,
    defining_file_budget: int = DEFAULT_DEFINING_FILE_BUDGET,
    resolve_definitions: bool = True,
) -> ContextBundle:
    """Build the ContextBundle for one explain request.

    Deterministic for fixed (request, index, file contents).
    """
    abs_path, rel = resolve_in_workspace(req.workspace_root, req.selection.path)
    if not abs_path.is_file():
        raise FileNotFound(f"no such file in workspace: {rel}")
    content = normalize_newlines(abs_path.read_bytes().decode("utf-8", errors="replace"))
    language = detect_language(rel, index.config.extension_map)

    lines = content.split("\n")
    start_line = _clamp(req.selection.start.line, 0, len(lines) - 1)
    cursor_line_text = lines[start_line]

    receiver: str | None = None
    if req.selection.is_cursor:
        token = locate_token(content, req.selection.start)
        selected_text = token.text
        if selected_text.startswith("."):
            receiver = _receiver_before(cursor_line_text, token.span.start.character)
    else:
        start_off = _offset_of(lines, req.selection.start)
        end_off = _offset_of(lines, req.selection.end)
        if end_off < start_off:
            start_off, end_off = end_off, start_off
        selected_text = content[start_off:end_off]
        if selected_text == "":
            raise NoToken("selection is empty")
        if selected_text.startswith("."):
            col = _clamp(req.selection.start.character, 0, len(cursor_line_text))
            receiver = _receiver_before(cursor_line_text, col)

    lookup_name = selected_text[1:] if selected_text.startswith(".") else selected_text

    selected_function_name: str | None = None
    resolved_source: str | None = None
    definition_block: str | None = None
    if resolve_definitions and not language.is_plaintext and is_identifier(lookup_name):
        ctx = QueryContext(
            from_path=rel,
            imported_names=extract_imported_names(content, language),
            receiver=receiver,
        )
        defs = lookup_definitions(index, lookup_name, ctx)
        if defs:
            top = defs[0]
            definition_block = top.body
            if top.defining_file_size <= defining_file_budget:
                defining_path = Path(index.root) / top.path
                resolved_source = normalize_newlines(
                    defining_path.read_bytes().decode("utf-8", errors="replace")
                )
            else:
                resolved_source = top.body
            selected_function_name = lookup_name

    return ContextBundle(
        language=language,
        selected_text=selected_text,
        cursor_line_text=cursor_line_text,
        current_code=content,
        selection_line=start_line,
        selected_function_name=selected_function_name,
        resolved_definition_source=resolved_source,
        definition_block=definition_block,
    )

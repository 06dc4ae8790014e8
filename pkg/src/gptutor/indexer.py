"""Workspace symbol indexing and definition lookup.

Definitions are extracted with per-language regex-plus-scope grammars (see
docs/grammars.md for the published rules) rather than full parsers: each
grammar is a set of header-line patterns plus a block rule that extends the
match to the end of its indentation or brace scope. The index is an
immutable snapshot; updates (`invalidate_path`) return a new index, so
readers can keep using the one they were handed.
"""

from __future__ import annotations

import fnmatch
import hashlib
import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath

from gptutor.errors import RootNotFound
from gptutor.languages import (
    DEFAULT_EXTENSION_MAP,
    Language,
    detect_language,
    is_identifier,
)

KIND_FUNCTION = "function"
KIND_METHOD = "method"
KIND_CLASS = "class"
KIND_CONSTANT = "constant"


@dataclass(frozen=True, order=True)
class Position:
    """0-based line/character pair."""

    line: int
    character: int


@dataclass(frozen=True)
class Span:
    """Half-open range: ``start`` inclusive, ``end`` exclusive."""

    start: Position
    end: Position


@dataclass(frozen=True)
class SymbolDef:
    name: str
    kind: str
    path: str
    span: Span
    container: str | None
    signature: str
    body: str
    defining_file_size: int

    def sort_key(self) -> tuple[str, int, int]:
        return (self.path, self.span.start.line, self.span.start.character)

    def identity(self) -> tuple[str, str, int, int, int, int]:
        return (
            self.name,
            self.path,
            self.span.start.line,
            self.span.start.character,
            self.span.end.line,
            self.span.end.character,
        )

    def to_json(self) -> str:
        # Field order is part of the JSON-lines dump contract.
        record = {
            "name": self.name,
            "kind": self.kind,
            "path": self.path,
            "span": {
                "start": {"line": self.span.start.line, "character": self.span.start.character},
                "end": {"line": self.span.end.line, "character": self.span.end.character},
            },
            "container": self.container,
            "signature": self.signature,
            "body": self.body,
            "defining_file_size": self.defining_file_size,
        }
        return json.dumps(record, ensure_ascii=False)


@dataclass(frozen=True)
class IndexConfig:
    include: tuple[str, ...] = ("**/*.py", "**/*.js", "**/*.ts", "**/*.rs", "**/*.go")
    exclude: tuple[str, ...] = (
        "**/.*",
        "**/.*/**",
        "**/node_modules/**",
        "**/__pycache__/**",
        "**/target/**",
        "**/build/**",
    )
    max_file_size: int = 1024 * 1024
    extension_map: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_EXTENSION_MAP))


@dataclass(frozen=True)
class QueryContext:
    """Where a lookup comes from; drives the ranking heuristic."""

    from_path: str
    imported_names: frozenset[str] = frozenset()
    receiver: str | None = None


@dataclass(frozen=True)
class SymbolIndex:
    root: str
    config: IndexConfig
    by_name: dict[str, tuple[SymbolDef, ...]]
    by_path: dict[str, tuple[SymbolDef, ...]]
    file_stamps: dict[str, str]
    skipped_paths: tuple[str, ...]

    def all_defs(self) -> tuple[SymbolDef, ...]:
        out: list[SymbolDef] = []
        for path in sorted(self.by_path):
            out.extend(self.by_path[path])
        return tuple(out)

    def to_jsonl(self) -> str:
        """One SymbolDef per line, sorted by (path, span.start)."""
        return "".join(d.to_json() + "\n" for d in self.all_defs())


# ---------------------------------------------------------------------------
# Definition grammars (header patterns)
# ---------------------------------------------------------------------------

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"

_PY_DEF = re.compile(rf"^(?P<indent>[ \t]*)(?:async[ \t]+)?def[ \t]+(?P<name>{_IDENT})\s*\(")
_PY_CLASS = re.compile(rf"^(?P<indent>[ \t]*)class[ \t]+(?P<name>{_IDENT})")
_PY_CONST = re.compile(rf"^(?P<name>{_IDENT})[ \t]*=(?!=)[ \t]*(?P<rhs>\S.*)$")

# A constant's right-hand side must start like a literal; calls and bare
# names are runtime bindings, not constants.
_LITERAL_RHS = re.compile(r"""^(?:-?[ \t]*\d|["'\[{(]|True\b|False\b|None\b)""")

_JS_FUNCTION = re.compile(
    rf"^(?P<indent>[ \t]*)(?:export[ \t]+)?(?:default[ \t]+)?(?:async[ \t]+)?"
    rf"function[ \t]*\*?[ \t]*(?P<name>{_IDENT})[ \t]*\("
)
_JS_CLASS = re.compile(
    rf"^(?P<indent>[ \t]*)(?:export[ \t]+)?(?:default[ \t]+)?(?:abstract[ \t]+)?"
    rf"class[ \t]+(?P<name>{_IDENT})"
)
_JS_CONST = re.compile(
    rf"^(?P<indent>[ \t]*)(?:export[ \t]+)?const[ \t]+(?P<name>{_IDENT})[^=\n]*=(?!=)"
)

_RS_FN = re.compile(
    rf"^(?P<indent>[ \t]*)(?:pub(?:\([^)]*\))?[ \t]+)?"
    rf"(?:(?:const|async|unsafe|extern(?:[ \t]+\"[^\"]*\")?)[ \t]+)*fn[ \t]+(?P<name>{_IDENT})"
)
_RS_STRUCT = re.compile(
    rf"^(?P<indent>[ \t]*)(?:pub(?:\([^)]*\))?[ \t]+)?struct[ \t]+(?P<name>{_IDENT})"
)
_RS_IMPL = re.compile(
    rf"^(?P<indent>[ \t]*)impl(?:[ \t]*<[^>]*>)?[ \t]+"
    rf"(?:{_IDENT}(?:::{_IDENT})*(?:[ \t]*<[^>]*>)?[ \t]+for[ \t]+)?(?P<name>{_IDENT})"
)

_GO_FUNC = re.compile(rf"^func[ \t]+(?:\((?P<recv>[^)]*)\)[ \t]*)?(?P<name>{_IDENT})[ \t]*\(")
_GO_TYPE = re.compile(rf"^type[ \t]+(?P<name>{_IDENT})[ \t]+")


def _indent_width(line: str) -> int:
    return len(line) - len(line.lstrip(" \t"))


def _indent_block_end(lines: list[str], header: int, header_indent: int) -> int:
    """Last line of an indentation scope (blank lines never terminate it)."""
    last = header
    for i in range(header + 1, len(lines)):
        if not lines[i].strip():
            continue
        if _indent_width(lines[i]) <= header_indent:
            break
        last = i
    return last


def _brace_block_end(
    lines: list[str], start_line: int, start_col: int, *, stop_on_semicolon: bool = False
) -> int:
    """Extend a match to its ``{...}`` scope.

    Scans forward from the match for the first ``{`` (or ``;`` when
    `stop_on_semicolon`), then balances braces. Quotes are not special-cased;
    the grammar is purely textual.
    """
    depth = 0
    opened = False
    col = start_col
    for i in range(start_line, len(lines)):
        line = lines[i]
        for ch in line[col:]:
            if not opened:
                if ch == ";" and stop_on_semicolon:
                    return i
                if ch == "{":
                    opened = True
                    depth = 1
                continue
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    return i
        col = 0
    return start_line if not opened else len(lines) - 1


def _balance_block_end(lines: list[str], start_line: int, start_col: int) -> int:
    """Extend an assignment to the line where ``()[]{}`` return to balance."""
    net = 0
    col = start_col
    for i in range(start_line, len(lines)):
        for ch in lines[i][col:]:
            if ch in "([{":
                net += 1
            elif ch in ")]}":
                net -= 1
        if net <= 0:
            return i
        col = 0
    return len(lines) - 1


@dataclass
class _RawMatch:
    name: str
    kind: str
    line: int
    col: int
    end_line: int
    container: str | None = None


def _match_python(lines: list[str]) -> list[_RawMatch]:
    out: list[_RawMatch] = []
    for i, line in enumerate(lines):
        m = _PY_DEF.match(line)
        if m:
            indent = len(m.group("indent"))
            end = _indent_block_end(lines, i, indent)
            out.append(_RawMatch(m.group("name"), KIND_FUNCTION, i, indent, end))
            continue
        m = _PY_CLASS.match(line)
        if m:
            indent = len(m.group("indent"))
            end = _indent_block_end(lines, i, indent)
            out.append(_RawMatch(m.group("name"), KIND_CLASS, i, indent, end))
            continue
        m = _PY_CONST.match(line)
        if m and _LITERAL_RHS.match(m.group("rhs")):
            end = _balance_block_end(lines, i, 0)
            out.append(_RawMatch(m.group("name"), KIND_CONSTANT, i, 0, end))
    return out


def _match_javascript(lines: list[str]) -> list[_RawMatch]:
    out: list[_RawMatch] = []
    for i, line in enumerate(lines):
        m = _JS_FUNCTION.match(line)
        if m:
            indent = len(m.group("indent"))
            end = _brace_block_end(lines, i, indent)
            out.append(_RawMatch(m.group("name"), KIND_FUNCTION, i, indent, end))
            continue
        m = _JS_CLASS.match(line)
        if m:
            indent = len(m.group("indent"))
            end = _brace_block_end(lines, i, indent)
            out.append(_RawMatch(m.group("name"), KIND_CLASS, i, indent, end))
            continue
        m = _JS_CONST.match(line)
        if m:
            indent = len(m.group("indent"))
            end = _balance_block_end(lines, i, indent)
            out.append(_RawMatch(m.group("name"), KIND_CONSTANT, i, indent, end))
    return out


def _match_rust(lines: list[str]) -> list[_RawMatch]:
    out: list[_RawMatch] = []
    for i, line in enumerate(lines):
        m = _RS_FN.match(line)
        if m:
            indent = len(m.group("indent"))
            end = _brace_block_end(lines, i, indent, stop_on_semicolon=True)
            out.append(_RawMatch(m.group("name"), KIND_FUNCTION, i, indent, end))
            continue
        m = _RS_STRUCT.match(line)
        if m:
            indent = len(m.group("indent"))
            end = _brace_block_end(lines, i, indent, stop_on_semicolon=True)
            out.append(_RawMatch(m.group("name"), KIND_CLASS, i, indent, end))
            continue
        m = _RS_IMPL.match(line)
        if m:
            indent = len(m.group("indent"))
            end = _brace_block_end(lines, i, indent)
            out.append(_RawMatch(m.group("name"), KIND_CLASS, i, indent, end))
    return out


def _match_go(lines: list[str]) -> list[_RawMatch]:
    out: list[_RawMatch] = []
    for i, line in enumerate(lines):
        m = _GO_FUNC.match(line)
        if m:
            end = _brace_block_end(lines, i, 0)
            recv = m.group("recv")
            if recv:
                idents = re.findall(_IDENT, recv)
                container = idents[-1] if idents else None
                out.append(_RawMatch(m.group("name"), KIND_METHOD, i, 0, end, container))
            else:
                out.append(_RawMatch(m.group("name"), KIND_FUNCTION, i, 0, end))
            continue
        m = _GO_TYPE.match(line)
        if m:
            end = _brace_block_end(lines, i, 0) if "{" in line else i
            out.append(_RawMatch(m.group("name"), KIND_CLASS, i, 0, end))
    return out


_MATCHERS = {
    "python": _match_python,
    "javascript": _match_javascript,
    "typescript": _match_javascript,
    "rust": _match_rust,
    "go": _match_go,
}


def _assign_containers(matches: list[_RawMatch]) -> None:
    """Post-pass: a def nested in a class block becomes that class's member.

    The innermost definition whose span strictly contains a def's header line
    decides: a class turns functions into methods and lends its name as the
    container; a function hides nothing but also confers no container.
    """
    for d in matches:
        innermost: _RawMatch | None = None
        for c in matches:
            if c is d:
                continue
            if c.line < d.line <= c.end_line:
                if innermost is None or c.line > innermost.line:
                    innermost = c
        if innermost is not None and innermost.kind == KIND_CLASS:
            if d.container is None:
                d.container = innermost.name
            if d.kind == KIND_FUNCTION:
                d.kind = KIND_METHOD


def normalize_newlines(text: str) -> str:
    return text.replace("\r\n", "\n").replace("\r", "\n")


def index_file(path: str, content: str, language: Language) -> list[SymbolDef]:
    """Extract all grammar matches with block spans from one file.

    Plaintext yields no definitions (unsupported, not an error).
    """
    matcher = _MATCHERS.get(language.id)
    if matcher is None:
        return []
    content = normalize_newlines(content)
    lines = content.split("\n")
    matches = matcher(lines)
    _assign_containers(matches)

    size = len(content)
    defs: list[SymbolDef] = []
    for m in matches:
        body_lines = lines[m.line : m.end_line + 1]
        body = "\n".join(body_lines)[m.col :]
        span = Span(Position(m.line, m.col), Position(m.end_line, len(lines[m.end_line])))
        defs.append(
            SymbolDef(
                name=m.name,
                kind=m.kind,
                path=path,
                span=span,
                container=m.container,
                signature=body.split("\n", 1)[0],
                body=body,
                defining_file_size=size,
            )
        )
    defs.sort(key=SymbolDef.sort_key)
    return defs


# ---------------------------------------------------------------------------
# Workspace scanning
# ---------------------------------------------------------------------------


def glob_match(rel_path: str, pattern: str) -> bool:
    if fnmatch.fnmatchcase(rel_path, pattern):
        return True
    return pattern.startswith("**/") and fnmatch.fnmatchcase(rel_path, pattern[3:])


def path_included(rel_path: str, config: IndexConfig) -> bool:
    if not any(glob_match(rel_path, p) for p in config.include):
        return False
    return not any(glob_match(rel_path, p) for p in config.exclude)


def _build_index(
    root: str,
    config: IndexConfig,
    per_path: dict[str, list[SymbolDef]],
    stamps: dict[str, str],
    skipped: set[str],
) -> SymbolIndex:
    by_path: dict[str, tuple[SymbolDef, ...]] = {}
    by_name: dict[str, list[SymbolDef]] = {}
    for path in sorted(per_path):
        defs = sorted(per_path[path], key=SymbolDef.sort_key)
        by_path[path] = tuple(defs)
        for d in defs:
            by_name.setdefault(d.name, []).append(d)
    frozen_by_name = {
        name: tuple(sorted(defs, key=SymbolDef.sort_key)) for name, defs in sorted(by_name.items())
    }
    return SymbolIndex(
        root=root,
        config=config,
        by_name=frozen_by_name,
        by_path=by_path,
        file_stamps=dict(sorted(stamps.items())),
        skipped_paths=tuple(sorted(skipped)),
    )


def content_hash(content: str) -> str:
    return hashlib.sha256(content.encode("utf-8")).hexdigest()


def scan_workspace(root: str | Path, config: IndexConfig | None = None) -> SymbolIndex:
    """Scan a workspace tree and index every included file.

    Unreadable or oversized files are recorded as skipped, never fatal.
    Deterministic: files are visited in sorted relative-path order.
    """
    config = config or IndexConfig()
    root_path = Path(root)
    if not root_path.is_dir():
        raise RootNotFound(f"workspace root not found or not a directory: {root}")
    root_path = root_path.resolve()

    rel_paths: list[str] = []
    for dirpath, _dirnames, filenames in os.walk(root_path):
        for fname in filenames:
            rel = (Path(dirpath) / fname).relative_to(root_path).as_posix()
            if path_included(rel, config):
                rel_paths.append(rel)
    rel_paths.sort()

    per_path: dict[str, list[SymbolDef]] = {}
    stamps: dict[str, str] = {}
    skipped: set[str] = set()
    for rel in rel_paths:
        abs_path = root_path / rel
        try:
            raw = abs_path.read_bytes()
        except OSError:
            skipped.add(rel)
            continue
        if len(raw) > config.max_file_size:
            skipped.add(rel)
            continue
        content = normalize_newlines(raw.decode("utf-8", errors="replace"))
        language = detect_language(rel, config.extension_map)
        per_path[rel] = index_file(rel, content, language)
        stamps[rel] = content_hash(content)

    return _build_index(str(root_path), config, per_path, stamps, skipped)


def invalidate_path(index: SymbolIndex, path: str, new_content: str | None = None) -> SymbolIndex:
    """Drop a file's definitions and optionally re-index pushed content.

    Returns a new index; the input snapshot is untouched.
    """
    rel = PurePosixPath(path).as_posix()
    per_path = {p: list(defs) for p, defs in index.by_path.items() if p != rel}
    stamps = {p: h for p, h in index.file_stamps.items() if p != rel}
    skipped = set(index.skipped_paths) - {rel}

    # keep incremental updates set-equal to a fresh scan: paths the scan
    # would not pick up are dropped, never re-added
    if new_content is not None and path_included(rel, index.config):
        content = normalize_newlines(new_content)
        if len(content.encode("utf-8")) > index.config.max_file_size:
            skipped.add(rel)
        else:
            language = detect_language(rel, index.config.extension_map)
            per_path[rel] = index_file(rel, content, language)
            stamps[rel] = content_hash(content)

    return _build_index(index.root, index.config, per_path, stamps, skipped)


def lookup_definitions(index: SymbolIndex, name: str, ctx: QueryContext) -> list[SymbolDef]:
    """Rank all definitions of `name` for a query origin.

    Tiers: same file, then imported module, then same directory, then the
    rest; ties by (path, span.start). An empty result is a valid outcome.
    """
    defs = index.by_name.get(name, ())
    from_dir = PurePosixPath(ctx.from_path).parent

    def tier(d: SymbolDef) -> int:
        if d.path == ctx.from_path:
            return 0
        if PurePosixPath(d.path).stem in ctx.imported_names:
            return 1
        if PurePosixPath(d.path).parent == from_dir:
            return 2
        return 3

    return sorted(defs, key=lambda d: (tier(d), *d.sort_key()))


# ---------------------------------------------------------------------------
# Import-statement harvesting (feeds QueryContext.imported_names)
# ---------------------------------------------------------------------------

_PY_IMPORT_LINE = re.compile(r"^\s*import\s+(.+)$")
_PY_FROM_LINE = re.compile(r"^\s*from\s+([.\w]+)\s+import\s+(.+)$")
_RS_USE_LINE = re.compile(r"^\s*(?:pub\s+)?use\s+(.+?);?\s*$")
_GO_IMPORT_LINE = re.compile(r'^\s*import\s+(?:([A-Za-z_]\w*)\s+)?"([^"]+)"')
_GO_BLOCK_ENTRY = re.compile(r'^\s*(?:([A-Za-z_]\w*)\s+)?"([^"]+)"\s*$')
_JS_IMPORT_LINE = re.compile(r"^\s*(?:export\s+)?import\b(.*)$")
_STRING_LITERAL = re.compile(r"""['"]([^'"]+)['"]""")

_JS_IMPORT_KEYWORDS = {"import", "from", "as", "type", "default", "require", "const", "let", "var"}
_RS_USE_KEYWORDS = {"use", "pub", "as", "crate", "self", "super"}


def _module_basename(spec: str) -> str | None:
    stem = PurePosixPath(spec).stem
    return stem if is_identifier(stem) else None


def extract_imported_names(content: str, language: Language) -> frozenset[str]:
    """Identifiers appearing in import-like statements (single-line forms)."""
    names: set[str] = set()
    lines = normalize_newlines(content).split("\n")

    if language.id == "python":
        for line in lines:
            m = _PY_FROM_LINE.match(line)
            if m:
                names.update(seg for seg in m.group(1).split(".") if seg)
                for part in m.group(2).split(","):
                    names.update(re.findall(_IDENT, part))
                continue
            m = _PY_IMPORT_LINE.match(line)
            if m:
                for part in m.group(1).split(","):
                    names.update(re.findall(_IDENT, part))
        names.discard("as")
        names.discard("import")
    elif language.id in ("javascript", "typescript"):
        for line in lines:
            if _JS_IMPORT_LINE.match(line) or "require(" in line:
                names.update(re.findall(_IDENT, line))
                for spec in _STRING_LITERAL.findall(line):
                    base = _module_basename(spec)
                    if base:
                        names.add(base)
        names -= _JS_IMPORT_KEYWORDS
    elif language.id == "rust":
        for line in lines:
            m = _RS_USE_LINE.match(line)
            if m:
                names.update(re.findall(_IDENT, m.group(1)))
        names -= _RS_USE_KEYWORDS
    elif language.id == "go":
        in_block = False
        for line in lines:
            if re.match(r"^\s*import\s*\(", line):
                in_block = True
                continue
            if in_block:
                if line.strip() == ")":
                    in_block = False
                    continue
                m = _GO_BLOCK_ENTRY.match(line)
                if m:
                    if m.group(1):
                        names.add(m.group(1))
                    base = _module_basename(m.group(2))
                    if base:
                        names.add(base)
                continue
            m = _GO_IMPORT_LINE.match(line)
            if m:
                if m.group(1):
                    names.add(m.group(1))
                base = _module_basename(m.group(2))
                if base:
                    names.add(base)

    return frozenset(n for n in names if is_identifier(n))

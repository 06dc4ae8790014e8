"""Independent reimplementations used as test oracles.

Everything here follows the published rules in docs/grammars.md and
docs/protocol.md but shares no code with the package: brute-force
line-by-line scans, manual character walks, and a template-inversion
parser. Keep this module free of gptutor imports (except error-free data
comparison helpers in the tests themselves).
"""

from __future__ import annotations

import fnmatch
import os
import re
from pathlib import Path

ORACLE_EXTENSIONS = {
    ".py": "python",
    ".js": "javascript",
    ".ts": "typescript",
    ".rs": "rust",
    ".go": "go",
}

WORD_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_")
DIGITS = set("0123456789")


# ---------------------------------------------------------------------------
# Block-end scans
# ---------------------------------------------------------------------------


def _indent(line: str) -> int:
    n = 0
    for ch in line:
        if ch in " \t":
            n += 1
        else:
            break
    return n


def _indent_end(lines: list[str], header: int) -> int:
    level = _indent(lines[header])
    last = header
    i = header + 1
    while i < len(lines):
        stripped = lines[i].strip()
        if stripped:
            if _indent(lines[i]) <= level:
                return last
            last = i
        i += 1
    return last


def _brace_end(lines: list[str], header: int, col: int, semicolon_stops: bool) -> int:
    depth = 0
    seen_open = False
    i = header
    while i < len(lines):
        text = lines[i][col:] if i == header else lines[i]
        for ch in text:
            if not seen_open:
                if semicolon_stops and ch == ";":
                    return i
                if ch == "{":
                    seen_open = True
                    depth = 1
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    return i
        i += 1
    return header if not seen_open else len(lines) - 1


def _bracket_balance_end(lines: list[str], header: int, col: int) -> int:
    net = 0
    i = header
    while i < len(lines):
        text = lines[i][col:] if i == header else lines[i]
        for ch in text:
            if ch in "([{":
                net += 1
            elif ch in ")]}":
                net -= 1
        if net <= 0:
            return i
        i += 1
    return len(lines) - 1


# ---------------------------------------------------------------------------
# Per-language header recognition (regexes spelled independently)
# ---------------------------------------------------------------------------

PY_DEF_RX = re.compile(r"^(\s*)(?:async\s+)?def\s+([A-Za-z_][\w]*)\s*\(")
PY_CLASS_RX = re.compile(r"^(\s*)class\s+([A-Za-z_][\w]*)")
PY_ASSIGN_RX = re.compile(r"^([A-Za-z_][\w]*)\s*=(?!=)\s*(\S.*)$")
LITERAL_START_RX = re.compile(r"""^(?:-\s*\d|\d|["'([{]|True\b|False\b|None\b)""")

JS_FN_RX = re.compile(
    r"^(\s*)(?:export\s+)?(?:default\s+)?(?:async\s+)?function\s*\*?\s*([A-Za-z_][\w]*)\s*\("
)
JS_CLASS_RX = re.compile(r"^(\s*)(?:export\s+)?(?:default\s+)?(?:abstract\s+)?class\s+([A-Za-z_][\w]*)")
JS_CONST_RX = re.compile(r"^(\s*)(?:export\s+)?const\s+([A-Za-z_][\w]*)[^=\n]*=(?!=)")

RS_FN_RX = re.compile(
    r"^(\s*)(?:pub(?:\([^)]*\))?\s+)?(?:(?:const|async|unsafe|extern(?:\s+\"[^\"]*\")?)\s+)*fn\s+([A-Za-z_][\w]*)"
)
RS_STRUCT_RX = re.compile(r"^(\s*)(?:pub(?:\([^)]*\))?\s+)?struct\s+([A-Za-z_][\w]*)")
RS_IMPL_RX = re.compile(
    r"^(\s*)impl(?:\s*<[^>]*>)?\s+(?:[A-Za-z_][\w]*(?:::[A-Za-z_][\w]*)*(?:\s*<[^>]*>)?\s+for\s+)?([A-Za-z_][\w]*)"
)

GO_FUNC_RX = re.compile(r"^func\s+(?:\(([^)]*)\)\s*)?([A-Za-z_][\w]*)\s*\(")
GO_TYPE_RX = re.compile(r"^type\s+([A-Za-z_][\w]*)\s+")

IDENT_RX = re.compile(r"[A-Za-z_][\w]*")


def _py_headers(lines):
    found = []
    for i, line in enumerate(lines):
        m = PY_DEF_RX.match(line)
        if m:
            found.append((i, len(m.group(1)), "function", m.group(2), _indent_end(lines, i), None))
            continue
        m = PY_CLASS_RX.match(line)
        if m:
            found.append((i, len(m.group(1)), "class", m.group(2), _indent_end(lines, i), None))
            continue
        m = PY_ASSIGN_RX.match(line)
        if m and LITERAL_START_RX.match(m.group(2)):
            found.append((i, 0, "constant", m.group(1), _bracket_balance_end(lines, i, 0), None))
    return found


def _js_headers(lines):
    found = []
    for i, line in enumerate(lines):
        m = JS_FN_RX.match(line)
        if m:
            found.append((i, len(m.group(1)), "function", m.group(2), _brace_end(lines, i, len(m.group(1)), False), None))
            continue
        m = JS_CLASS_RX.match(line)
        if m:
            found.append((i, len(m.group(1)), "class", m.group(2), _brace_end(lines, i, len(m.group(1)), False), None))
            continue
        m = JS_CONST_RX.match(line)
        if m:
            found.append((i, len(m.group(1)), "constant", m.group(2), _bracket_balance_end(lines, i, len(m.group(1))), None))
    return found


def _rs_headers(lines):
    found = []
    for i, line in enumerate(lines):
        m = RS_FN_RX.match(line)
        if m:
            found.append((i, len(m.group(1)), "function", m.group(2), _brace_end(lines, i, len(m.group(1)), True), None))
            continue
        m = RS_STRUCT_RX.match(line)
        if m:
            found.append((i, len(m.group(1)), "class", m.group(2), _brace_end(lines, i, len(m.group(1)), True), None))
            continue
        m = RS_IMPL_RX.match(line)
        if m:
            found.append((i, len(m.group(1)), "class", m.group(2), _brace_end(lines, i, len(m.group(1)), False), None))
    return found


def _go_headers(lines):
    found = []
    for i, line in enumerate(lines):
        m = GO_FUNC_RX.match(line)
        if m:
            end = _brace_end(lines, i, 0, False)
            if m.group(1):
                idents = IDENT_RX.findall(m.group(1))
                recv = idents[-1] if idents else None
                found.append((i, 0, "method", m.group(2), end, recv))
            else:
                found.append((i, 0, "function", m.group(2), end, None))
            continue
        m = GO_TYPE_RX.match(line)
        if m:
            end = _brace_end(lines, i, 0, False) if "{" in line else i
            found.append((i, 0, "class", m.group(1), end, None))
    return found


_HEADER_FNS = {
    "python": _py_headers,
    "javascript": _js_headers,
    "typescript": _js_headers,
    "rust": _rs_headers,
    "go": _go_headers,
}


def oracle_index_file(rel_path: str, content: str, lang_id: str) -> list[dict]:
    """Brute-force definition extraction for one file."""
    fn = _HEADER_FNS.get(lang_id)
    if fn is None:
        return []
    content = content.replace("\r\n", "\n").replace("\r", "\n")
    lines = content.split("\n")
    headers = fn(lines)

    records = []
    for line_no, col, kind, name, end_line, recv in headers:
        container = recv
        innermost = None
        for other in headers:
            o_line, _o_col, o_kind, o_name, o_end, _ = other
            if o_line < line_no <= o_end:
                if innermost is None or o_line > innermost[0]:
                    innermost = other
        if innermost is not None and innermost[2] == "class":
            if container is None:
                container = innermost[3]
            if kind == "function":
                kind = "method"
        body = "\n".join(lines[line_no : end_line + 1])[col:]
        records.append(
            {
                "name": name,
                "kind": kind,
                "path": rel_path,
                "start": (line_no, col),
                "end": (end_line, len(lines[end_line])),
                "container": container,
                "body": body,
            }
        )
    records.sort(key=lambda r: (r["path"], r["start"]))
    return records


def _pattern_hits(rel: str, pattern: str) -> bool:
    if fnmatch.fnmatchcase(rel, pattern):
        return True
    if pattern.startswith("**/") and fnmatch.fnmatchcase(rel, pattern[3:]):
        return True
    return False


def oracle_scan(
    root: Path,
    include: tuple[str, ...] = ("**/*.py", "**/*.js", "**/*.ts", "**/*.rs", "**/*.go"),
    exclude: tuple[str, ...] = (
        "**/.*",
        "**/.*/**",
        "**/node_modules/**",
        "**/__pycache__/**",
        "**/target/**",
        "**/build/**",
    ),
    max_file_size: int = 1024 * 1024,
) -> list[dict]:
    """Walk + line-scan the whole tree with the independent grammar."""
    root = Path(root).resolve()
    records: list[dict] = []
    for dirpath, _, filenames in os.walk(root):
        for fname in filenames:
            full = Path(dirpath) / fname
            rel = full.relative_to(root).as_posix()
            if not any(_pattern_hits(rel, p) for p in include):
                continue
            if any(_pattern_hits(rel, p) for p in exclude):
                continue
            data = full.read_bytes()
            if len(data) > max_file_size:
                continue
            lang = ORACLE_EXTENSIONS.get(Path(rel).suffix.lower(), "plaintext")
            text = data.decode("utf-8", errors="replace")
            records.extend(oracle_index_file(rel, text, lang))
    records.sort(key=lambda r: (r["path"], r["start"]))
    return records


def identity_set(records: list[dict]) -> set[tuple]:
    return {
        (r["name"], r["path"], r["start"][0], r["start"][1], r["end"][0], r["end"][1])
        for r in records
    }


# ---------------------------------------------------------------------------
# Token location oracle: manual character-class walk
# ---------------------------------------------------------------------------


def oracle_locate_token(content: str, line_no: int, col: int):
    """Returns (line, start, end, text) or None when the line has no token."""
    lines = content.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    line_no = max(0, min(line_no, len(lines) - 1))
    line = lines[line_no]
    col = max(0, min(col, len(line)))

    runs = []
    i = 0
    while i < len(line):
        if line[i] in WORD_CHARS:
            j = i
            while j < len(line) and line[j] in WORD_CHARS:
                j += 1
            if line[i] not in DIGITS:
                runs.append((i, j))
            i = j
        else:
            i += 1
    if not runs:
        return None

    best = None
    best_dist = None
    for start, end in runs:
        if start <= col < end:
            dist = 0
        else:
            dist = min(abs(col - start), abs(col - (end - 1)))
        if best_dist is None or dist < best_dist:
            best, best_dist = (start, end), dist
    start, end = best
    text = line[start:end]
    if start > 0 and line[start - 1] == ".":
        return (line_no, start - 1, end, "." + text)
    return (line_no, start, end, text)


# ---------------------------------------------------------------------------
# Template inversion: parse a rendered user message back into its slots
# ---------------------------------------------------------------------------

_WITH_DEF_RX = re.compile(
    r"\AThe following is the source code of the library of (?P<fn>[^\n]*): \n"
    r"(?P<src>.*?)\n"
    r"The following is the (?P<lang>[a-z]+) code: \n"
    r"(?P<code>.*)\n"
    r"Question: why use (?P<sel>[^\n]*?) at (?P<cur>[^\n]*) in the (?P=lang) code above\?\Z",
    re.DOTALL,
)
_NO_DEF_RX = re.compile(
    r"\AThe following is the (?P<lang>[a-z]+) code: \n"
    r"(?P<code>.*)\n"
    r"Question: why use (?P<sel>[^\n]*?) at (?P<cur>[^\n]*) in the (?P=lang) code above\?\Z",
    re.DOTALL,
)


def parse_user_message(user: str) -> dict | None:
    """Recover template slots from a rendered user message."""
    m = _WITH_DEF_RX.match(user)
    if m:
        return {
            "selected_function_name": m.group("fn"),
            "definition_source": m.group("src"),
            "language": m.group("lang"),
            "current_code": m.group("code"),
            "selected_text": m.group("sel"),
            "cursor_line_text": m.group("cur"),
        }
    m = _NO_DEF_RX.match(user)
    if m:
        return {
            "selected_function_name": None,
            "definition_source": None,
            "language": m.group("lang"),
            "current_code": m.group("code"),
            "selected_text": m.group("sel"),
            "cursor_line_text": m.group("cur"),
        }
    return None

"""Language identification.

Files are assigned a language id purely from their extension; anything
unmapped falls back to ``plaintext``. The mapping is a total function, so
detection never fails and never looks at file contents.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import PurePosixPath

PLAINTEXT_ID = "plaintext"

#: Default extension -> language id table. Overridable via IndexConfig.
DEFAULT_EXTENSION_MAP: dict[str, str] = {
    ".py": "python",
    ".js": "javascript",
    ".ts": "typescript",
    ".rs": "rust",
    ".go": "go",
}

KNOWN_LANGUAGE_IDS = frozenset(DEFAULT_EXTENSION_MAP.values()) | {PLAINTEXT_ID}

#: Identifier shape shared by all supported definition grammars.
IDENTIFIER_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class Language:
    """A lowercase language id, e.g. ``python`` or ``plaintext``."""

    id: str

    @property
    def is_plaintext(self) -> bool:
        return self.id == PLAINTEXT_ID


PLAINTEXT = Language(PLAINTEXT_ID)


def detect_language(path: str, extension_map: dict[str, str] | None = None) -> Language:
    """Map a file path to its language by extension; unknown -> plaintext."""
    table = DEFAULT_EXTENSION_MAP if extension_map is None else extension_map
    ext = PurePosixPath(str(path)).suffix.lower()
    return Language(table.get(ext, PLAINTEXT_ID))


def is_identifier(text: str) -> bool:
    return bool(IDENTIFIER_RE.fullmatch(text))

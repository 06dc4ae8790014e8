"""Render a ContextBundle into the tutor prompt, within a token budget.

The wire form is canonical and byte-deterministic: each fixed sentence sits
on one line ending with ``: `` and a newline, code slots are inserted
verbatim, and the question sentence closes the message. The golden copy for
the bundled fixture lives in fixtures/golden/attendee_prompt.txt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from gptutor.errors import BudgetTooSmall
from gptutor.extractor import ContextBundle

SYSTEM_TEMPLATE = "You are a helpful coding tutor master in {language}."
LIBRARY_SENTENCE = "The following is the source code of the library of {name}: \n"
CODE_SENTENCE = "The following is the {language} code: \n"
QUESTION_SENTENCE = (
    "Question: why use {selected} at {cursor_line} in the {language} code above?"
)

#: Line inserted where budget trimming cut code away.
CUT_MARKER = "..."


@dataclass(frozen=True)
class Budget:
    max_tokens: int = 3000
    defining_share: float = 0.4

    def __post_init__(self) -> None:
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")
        if not 0 < self.defining_share < 1:
            raise ValueError("defining_share must be in (0, 1)")

    @property
    def max_chars(self) -> int:
        # ceil(n / 4) <= max_tokens  <=>  n <= 4 * max_tokens
        return 4 * self.max_tokens


@dataclass(frozen=True)
class PromptBundle:
    system_message: str
    user_message: str
    model: str
    estimated_tokens: int


def estimate_tokens(text: str) -> int:
    """Cheap length-proportional token estimate: ceil(chars / 4)."""
    return math.ceil(len(text) / 4)


def render_system_message(bundle: ContextBundle) -> str:
    return SYSTEM_TEMPLATE.format(language=bundle.language.id)


def render_user_message(bundle: ContextBundle) -> str:
    lang = bundle.language.id
    parts: list[str] = []
    if bundle.resolved_definition_source is not None:
        parts.append(LIBRARY_SENTENCE.format(name=bundle.selected_function_name))
        parts.append(bundle.resolved_definition_source)
        parts.append("\n")
    parts.append(CODE_SENTENCE.format(language=lang))
    parts.append(bundle.current_code)
    parts.append("\n")
    parts.append(
        QUESTION_SENTENCE.format(
            selected=bundle.selected_text,
            cursor_line=bundle.cursor_line_text,
            language=lang,
        )
    )
    return "".join(parts)


def _rendered_length(bundle: ContextBundle) -> int:
    return len(render_system_message(bundle)) + len(render_user_message(bundle))


def _window_lines(lines: list[str], center: int, char_cap: int) -> str | None:
    """Largest whole-line window around `center` fitting in `char_cap` chars.

    Cut edges are marked with a literal ``...`` line. Returns None when even
    the center line alone cannot fit.
    """
    n = len(lines)
    center = max(0, min(center, n - 1))
    marker_cost = len(CUT_MARKER) + 1

    def total(lo: int, hi: int) -> int:
        # window is lines[lo:hi], joined by newlines
        chars = sum(len(l) for l in lines[lo:hi]) + (hi - lo - 1)
        if lo > 0:
            chars += marker_cost
        if hi < n:
            chars += marker_cost
        return chars

    lo, hi = center, center + 1
    if total(lo, hi) > char_cap:
        return None
    grown = True
    while grown:
        grown = False
        if lo > 0 and total(lo - 1, hi) <= char_cap:
            lo -= 1
            grown = True
        if hi < n and total(lo, hi + 1) <= char_cap:
            hi += 1
            grown = True
    out = "\n".join(lines[lo:hi])
    if lo > 0:
        out = CUT_MARKER + "\n" + out
    if hi < n:
        out = out + "\n" + CUT_MARKER
    return out


def _head_lines(block: str, char_cap: int) -> str:
    """First lines of a block within `char_cap`; the first line always stays."""
    lines = block.split("\n")
    kept = [lines[0]]
    used = len(lines[0])
    marker_cost = len(CUT_MARKER) + 1
    for line in lines[1:]:
        if used + 1 + len(line) + marker_cost > char_cap:
            break
        kept.append(line)
        used += 1 + len(line)
    if len(kept) == len(lines):
        return block
    return "\n".join(kept) + "\n" + CUT_MARKER


def fit_to_budget(bundle: ContextBundle, budget: Budget) -> ContextBundle:
    """Trim a bundle until its rendered prompt fits the budget.

    Order: drop the defining file down to the definition block, then window
    the current file around the selection, and only then shorten the block
    itself (its first line is never removed). Under-budget bundles pass
    through unchanged.
    """
    if _rendered_length(bundle) <= budget.max_chars:
        return bundle

    if (
        bundle.resolved_definition_source is not None
        and bundle.definition_block is not None
        and bundle.resolved_definition_source != bundle.definition_block
    ):
        bundle = replace(bundle, resolved_definition_source=bundle.definition_block)
        if _rendered_length(bundle) <= budget.max_chars:
            return bundle

    overhead = _rendered_length(replace(bundle, current_code="", resolved_definition_source=""))
    if bundle.resolved_definition_source is None:
        overhead = _rendered_length(replace(bundle, current_code=""))
    available = budget.max_chars - overhead
    if available < 0:
        raise BudgetTooSmall(
            f"budget of {budget.max_tokens} tokens cannot fit the question and cursor line"
        )

    code_lines = bundle.current_code.split("\n")

    if bundle.resolved_definition_source is None:
        windowed = _window_lines(code_lines, bundle.selection_line, available)
        if windowed is None:
            raise BudgetTooSmall("cursor line does not fit the budget")
        return replace(bundle, current_code=windowed)

    # Keep the full definition block if the code window can absorb the cut.
    definition = bundle.resolved_definition_source
    windowed = _window_lines(code_lines, bundle.selection_line, available - len(definition))
    if windowed is None:
        def_cap = int(available * budget.defining_share)
        definition = _head_lines(bundle.definition_block or definition, def_cap)
        windowed = _window_lines(code_lines, bundle.selection_line, available - len(definition))
        if windowed is None:
            raise BudgetTooSmall("cursor line does not fit the budget")
    return replace(bundle, resolved_definition_source=definition, current_code=windowed)


def build_prompt(bundle: ContextBundle, budget: Budget, model: str) -> PromptBundle:
    """Render the two chat messages; trims to budget first (idempotent)."""
    fitted = fit_to_budget(bundle, budget)
    system = render_system_message(fitted)
    user = render_user_message(fitted)
    return PromptBundle(
        system_message=system,
        user_message=user,
        model=model,
        estimated_tokens=estimate_tokens(system + user),
    )

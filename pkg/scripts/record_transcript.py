#!/usr/bin/env python3
"""Record a live backend answer into a transcript store for later replay.

Requires a real API key in the environment. Example:

    python3 scripts/record_transcript.py \
        --workspace fixtures/attendee_workspace \
        --file main.py --line 4 --col 18 \
        --store my_transcripts.jsonl
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from gptutor.config import load_service_config  # noqa: E402
from gptutor.extractor import ExplainRequest, Selection, extract_context  # noqa: E402
from gptutor.gateway import LlmGateway, record_transcript  # noqa: E402
from gptutor.indexer import Position, scan_workspace  # noqa: E402
from gptutor.prompt import build_prompt, fit_to_budget  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workspace", required=True)
    parser.add_argument("--file", required=True)
    parser.add_argument("--line", required=True, type=int, help="1-based")
    parser.add_argument("--col", required=True, type=int, help="1-based")
    parser.add_argument("--store", required=True, help="transcript JSONL path")
    parser.add_argument("--model", default=None)
    args = parser.parse_args()

    config = load_service_config(args.workspace)
    index = scan_workspace(config.workspace_root, config.index_config)
    pos = Position(args.line - 1, args.col - 1)
    req = ExplainRequest(
        workspace_root=str(config.workspace_root),
        selection=Selection(args.file, pos, pos),
    )
    bundle = extract_context(req, index, defining_file_budget=config.defining_file_budget)
    model = args.model or config.llm.model
    prompt = build_prompt(fit_to_budget(bundle, config.budget), config.budget, model)

    gateway = LlmGateway(config.llm)
    result = gateway.complete(prompt, backend="live")
    record_transcript(args.store, prompt, result)
    print(f"recorded {len(result.text)} chars under prompt hash into {args.store}")
    print(result.text)
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Regenerate the frozen fixtures: golden prompt, replay transcript, and the
golden JSON-RPC session log for the attendee workspace.

Run from the repository root after any deliberate change to the prompt wire
format or the server protocol, then review the diff before committing.
"""

from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from gptutor.extractor import ExplainRequest, Selection  # noqa: E402
from gptutor.gateway import prompt_sha256  # noqa: E402
from gptutor.indexer import Position, scan_workspace  # noqa: E402
from gptutor.prompt import Budget, build_prompt  # noqa: E402
from gptutor.rpc import encode_message, read_message  # noqa: E402
from gptutor.extractor import extract_context  # noqa: E402

WORKSPACE = REPO / "fixtures" / "attendee_workspace"
GOLDEN_DIR = REPO / "fixtures" / "golden"
TRANSCRIPT_DIR = REPO / "fixtures" / "transcripts"

# Answer recorded from a live gpt-3.5-turbo run over this exact prompt
# (2023-03-05); replayed by the replay backend in offline tests.
RECORDED_ANSWER = (
    "The code above is adding a new attendee to the MongoDB database. The "
    "add_attendee method takes in the email and name of the attendee, and "
    "also generates a unique ID (using `uuid4()`) and an optional voucher "
    "code (if available). In the example above, the email is "
    '"john@gmail.com" and the name is "John Doe", so a new attendee '
    "document will be created in the database with these fields. This "
    "method call is essentially populating the database with attendee "
    "information."
)

SELECTION = Selection("main.py", Position(3, 17), Position(3, 17))


def fixture_prompt():
    index = scan_workspace(WORKSPACE)
    req = ExplainRequest(workspace_root=str(WORKSPACE), selection=SELECTION)
    bundle = extract_context(req, index)
    return build_prompt(bundle, Budget(), "gpt-3.5-turbo")


def write_golden_prompt() -> None:
    prompt = fixture_prompt()
    out = GOLDEN_DIR / "attendee_prompt.txt"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(
        f"{prompt.system_message}\n---\n{prompt.user_message}\n", encoding="utf-8"
    )
    print(f"wrote {out}")


def write_transcript() -> None:
    prompt = fixture_prompt()
    entry = {
        "prompt_sha256": prompt_sha256(prompt),
        "model": "gpt-3.5-turbo",
        "text": RECORDED_ANSWER,
        "recorded_at": "2023-03-05T00:00:00+00:00",
    }
    out = TRANSCRIPT_DIR / "attendee.jsonl"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(entry, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"wrote {out}")


def session_requests() -> list[dict]:
    lines = (GOLDEN_DIR / "attendee_session_requests.jsonl").read_text().splitlines()
    return [json.loads(line) for line in lines if line.strip()]


def mask_latency(message: dict) -> dict:
    result = message.get("result")
    if isinstance(result, dict) and "latencyMs" in result:
        result = dict(result, latencyMs=0)
        message = dict(message, result=result)
    return message


def run_session() -> list[dict]:
    proc = subprocess.Popen(
        [sys.executable, "-m", "gptutor", "serve",
         "--workspace", "fixtures/attendee_workspace", "--backend", "mock"],
        cwd=REPO,
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
    )
    responses = []
    try:
        for request in session_requests():
            proc.stdin.write(encode_message(request))
            proc.stdin.flush()
            responses.append(read_message(proc.stdout))
        proc.stdin.close()
        proc.wait(timeout=10)
    finally:
        if proc.poll() is None:
            proc.kill()
    return responses


def write_session_log() -> None:
    responses = [mask_latency(r) for r in run_session()]
    lines = [json.dumps(r, sort_keys=True, separators=(",", ":")) for r in responses]
    out = GOLDEN_DIR / "attendee_session.jsonl"
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {out}")


if __name__ == "__main__":
    write_golden_prompt()
    write_transcript()
    write_session_log()

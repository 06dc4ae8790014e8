from __future__ import annotations

from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def repo_root() -> Path:
    return REPO


@pytest.fixture(scope="session")
def fixture_workspace() -> Path:
    return REPO / "fixtures" / "attendee_workspace"


@pytest.fixture(scope="session")
def golden_prompt_path() -> Path:
    return REPO / "fixtures" / "golden" / "attendee_prompt.txt"


@pytest.fixture(scope="session")
def transcript_path() -> Path:
    return REPO / "fixtures" / "transcripts" / "attendee.jsonl"


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion.
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        status = "PASS" if report.passed else "FAIL"
        print(f"\n[ACCEPTANCE] {name}: {status}", flush=True)

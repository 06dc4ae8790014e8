"""Backend behavior: parsing, mock/replay determinism, retries, secrecy."""

from __future__ import annotations

import hashlib
import json
import random
import threading

import pytest
from hypothesis import given, strategies as st

from gptutor.errors import (
    AuthError,
    BackendUnavailable,
    Cancelled,
    MalformedResponse,
    RateLimited,
)
from gptutor.gateway import (
    CancelToken,
    ExplanationResult,
    LlmConfig,
    LlmGateway,
    TransportFailure,
    parse_completion_response,
    prompt_sha256,
    record_transcript,
)
from gptutor.prompt import PromptBundle


def make_prompt(system="You are a helpful coding tutor master in python.", user="why?"):
    return PromptBundle(
        system_message=system, user_message=user, model="gpt-3.5-turbo", estimated_tokens=1
    )


def ok_body(content: str) -> bytes:
    return json.dumps(
        {"choices": [{"message": {"role": "assistant", "content": content}}]}
    ).encode()


class ScriptedTransport:
    """Returns (or raises) the scripted outcomes in order; repeats the last."""

    def __init__(self, outcomes):
        self.outcomes = list(outcomes)
        self.calls = 0

    def __call__(self, url, headers, payload, timeout):
        self.calls += 1
        outcome = self.outcomes[min(self.calls - 1, len(self.outcomes) - 1)]
        if isinstance(outcome, Exception):
            raise outcome
        return outcome


def live_gateway(transport, **config_kwargs) -> tuple[LlmGateway, list[float]]:
    sleeps: list[float] = []
    gateway = LlmGateway(
        LlmConfig(**config_kwargs),
        transport=transport,
        sleeper=sleeps.append,
        rng=random.Random(0),
    )
    return gateway, sleeps


# ---------------------------------------------------------------------------
# parse_completion_response
# ---------------------------------------------------------------------------


def test_parse_minimal_body():
    body = b'{"choices":[{"message":{"role":"assistant","content":"hi"}}]}'
    assert parse_completion_response(body) == "hi"


def test_parse_empty_choices():
    with pytest.raises(MalformedResponse):
        parse_completion_response(b'{"choices":[]}')


def test_parse_missing_content():
    with pytest.raises(MalformedResponse):
        parse_completion_response(b'{"choices":[{"message":{"role":"assistant"}}]}')


def test_parse_not_json():
    with pytest.raises(MalformedResponse):
        parse_completion_response(b"<html>oops</html>")


@given(st.text(min_size=1, max_size=200))
def test_parse_round_trips_serialized_content(content):
    assert parse_completion_response(ok_body(content)) == content


# ---------------------------------------------------------------------------
# mock backend
# ---------------------------------------------------------------------------


def test_mock_text_matches_independent_hash():
    prompt = make_prompt()
    gateway = LlmGateway(LlmConfig())
    result = gateway.complete(prompt, backend="mock")
    digest = hashlib.sha256(
        (prompt.system_message + "\x00" + prompt.user_message).encode("utf-8")
    ).hexdigest()[:12]
    assert result.text == f"MOCK-EXPLANATION {digest} python"
    assert result.backend == "mock"
    assert result.cached is False


def test_mock_is_a_pure_function_of_the_messages():
    gateway = LlmGateway(LlmConfig())
    a = gateway.complete(make_prompt(user="u1"), backend="mock").text
    b = gateway.complete(make_prompt(user="u1"), backend="mock").text
    c = gateway.complete(make_prompt(user="u2"), backend="mock").text
    assert a == b
    assert a != c


def test_mock_reports_the_prompt_language():
    prompt = make_prompt(system="You are a helpful coding tutor master in rust.")
    result = LlmGateway(LlmConfig()).complete(prompt, backend="mock")
    assert result.text.endswith(" rust")


# ---------------------------------------------------------------------------
# record / replay
# ---------------------------------------------------------------------------


def test_record_then_replay_round_trips(tmp_path):
    store = tmp_path / "transcripts.jsonl"
    prompt = make_prompt(user="explain this")
    original = ExplanationResult(
        text="because it inserts a row", model="gpt-3.5-turbo",
        cached=False, latency_ms=3, backend="live",
    )
    record_transcript(store, prompt, original)
    gateway = LlmGateway(LlmConfig(), transcript_path=store)
    replayed = gateway.complete(prompt, backend="replay")
    assert replayed.text == original.text
    assert replayed.backend == "replay"


def test_replay_unknown_prompt_misses(tmp_path):
    store = tmp_path / "transcripts.jsonl"
    store.write_text("")
    gateway = LlmGateway(LlmConfig(), transcript_path=store)
    with pytest.raises(BackendUnavailable, match="no transcript"):
        gateway.complete(make_prompt(user="never recorded"), backend="replay")


def test_replay_without_store_is_unavailable():
    gateway = LlmGateway(LlmConfig())
    with pytest.raises(BackendUnavailable, match="store"):
        gateway.complete(make_prompt(), backend="replay")


def test_unwritable_store_raises(tmp_path):
    from gptutor.errors import StoreUnwritable

    blocker = tmp_path / "blocker"
    blocker.write_text("a regular file, not a directory")
    store = blocker / "transcripts.jsonl"
    result = ExplanationResult("t", "m", False, 0, "live")
    with pytest.raises(StoreUnwritable):
        record_transcript(store, make_prompt(), result)


def test_fifty_random_pairs_map_bijectively(tmp_path):
    store = tmp_path / "many.jsonl"
    rng = random.Random(13)
    prompts = [make_prompt(user=f"question {rng.random()} #{i}") for i in range(50)]
    texts = [f"answer-{i}-{rng.random()}" for i in range(50)]
    for prompt, text in zip(prompts, texts):
        record_transcript(
            store,
            prompt,
            ExplanationResult(text=text, model="m", cached=False, latency_ms=0, backend="live"),
        )
    gateway = LlmGateway(LlmConfig(), transcript_path=store)
    replayed = [gateway.complete(p, backend="replay").text for p in prompts]
    assert replayed == texts
    assert len(set(prompt_sha256(p) for p in prompts)) == 50
    assert len(set(replayed)) == 50


def test_fixture_transcript_replays_recorded_answer(repo_root, transcript_path):
    golden = (repo_root / "fixtures" / "golden" / "attendee_prompt.txt").read_text()
    system, user = golden.split("\n---\n", 1)
    prompt = PromptBundle(
        system_message=system,
        user_message=user[:-1],  # golden file ends with one trailing newline
        model="gpt-3.5-turbo",
        estimated_tokens=0,
    )
    gateway = LlmGateway(LlmConfig(), transcript_path=transcript_path)
    result = gateway.complete(prompt, backend="replay")
    assert result.text.startswith(
        "The code above is adding a new attendee to the MongoDB database."
    )


# ---------------------------------------------------------------------------
# live backend: auth, retries, backoff
# ---------------------------------------------------------------------------


def test_missing_key_fails_before_any_network_call(monkeypatch):
    monkeypatch.delenv("OPENAI_API_KEY", raising=False)
    transport = ScriptedTransport([(200, ok_body("never"))])
    gateway, _ = live_gateway(transport)
    with pytest.raises(AuthError, match="OPENAI_API_KEY"):
        gateway.complete(make_prompt(), backend="live")
    assert transport.calls == 0


def test_custom_key_source_named_in_error(monkeypatch):
    monkeypatch.delenv("MY_KEY_VAR", raising=False)
    gateway, _ = live_gateway(ScriptedTransport([]), api_key_source="MY_KEY_VAR")
    with pytest.raises(AuthError, match="MY_KEY_VAR"):
        gateway.complete(make_prompt(), backend="live")


def test_success_sends_two_messages(monkeypatch):
    monkeypatch.setenv("OPENAI_API_KEY", "sk-test")
    seen = {}

    def transport(url, headers, payload, timeout):
        seen.update(url=url, headers=headers, payload=payload, timeout=timeout)
        return 200, ok_body("fine")

    gateway, _ = live_gateway(transport)
    result = gateway.complete(make_prompt(), backend="live")
    assert result.text == "fine"
    assert seen["url"].endswith("/chat/completions")
    assert seen["headers"]["Authorization"] == "Bearer sk-test"
    messages = seen["payload"]["messages"]
    assert [m["role"] for m in messages] == ["system", "user"]
    assert seen["payload"]["model"] == "gpt-3.5-turbo"
    assert seen["payload"]["temperature"] == 0.0


def test_transient_failures_retry_within_bound(monkeypatch):
    monkeypatch.setenv("OPENAI_API_KEY", "sk-test")
    transport = ScriptedTransport([TransportFailure("timeout")])
    gateway, sleeps = live_gateway(transport, max_retries=2)
    with pytest.raises(BackendUnavailable):
        gateway.complete(make_prompt(), backend="live")
    assert transport.calls == 3  # 1 + max_retries
    assert len(sleeps) == 2
    assert 0 <= sleeps[0] <= 1.0 and 0 <= sleeps[1] <= 2.0


def test_rate_limit_retries_then_raises(monkeypatch):
    monkeypatch.setenv("OPENAI_API_KEY", "sk-test")
    transport = ScriptedTransport([(429, b"slow down")])
    gateway, _ = live_gateway(transport, max_retries=2)
    with pytest.raises(RateLimited):
        gateway.complete(make_prompt(), backend="live")
    assert transport.calls == 3


def test_recovery_after_one_failure(monkeypatch):
    monkeypatch.setenv("OPENAI_API_KEY", "sk-test")
    transport = ScriptedTransport([(500, b"boom"), (200, ok_body("recovered"))])
    gateway, sleeps = live_gateway(transport, max_retries=2)
    assert gateway.complete(make_prompt(), backend="live").text == "recovered"
    assert transport.calls == 2
    assert len(sleeps) == 1


def test_auth_failure_never_retries(monkeypatch):
    monkeypatch.setenv("OPENAI_API_KEY", "sk-test")
    transport = ScriptedTransport([(401, b"denied")])
    gateway, sleeps = live_gateway(transport, max_retries=5)
    with pytest.raises(AuthError):
        gateway.complete(make_prompt(), backend="live")
    assert transport.calls == 1
    assert sleeps == []


def test_client_error_never_retries(monkeypatch):
    monkeypatch.setenv("OPENAI_API_KEY", "sk-test")
    transport = ScriptedTransport([(400, b"bad request")])
    gateway, _ = live_gateway(transport, max_retries=5)
    with pytest.raises(BackendUnavailable):
        gateway.complete(make_prompt(), backend="live")
    assert transport.calls == 1


def test_zero_retries_means_single_attempt(monkeypatch):
    monkeypatch.setenv("OPENAI_API_KEY", "sk-test")
    transport = ScriptedTransport([TransportFailure("nope")])
    gateway, _ = live_gateway(transport, max_retries=0)
    with pytest.raises(BackendUnavailable):
        gateway.complete(make_prompt(), backend="live")
    assert transport.calls == 1


# ---------------------------------------------------------------------------
# concurrency and cancellation
# ---------------------------------------------------------------------------


def test_in_flight_requests_bounded_by_limit(monkeypatch):
    monkeypatch.setenv("OPENAI_API_KEY", "sk-test")
    lock = threading.Lock()
    state = {"current": 0, "peak": 0}

    def transport(url, headers, payload, timeout):
        with lock:
            state["current"] += 1
            state["peak"] = max(state["peak"], state["current"])
        threading.Event().wait(0.02)
        with lock:
            state["current"] -= 1
        return 200, ok_body("ok")

    gateway, _ = live_gateway(transport, max_concurrent=2, max_retries=0)
    threads = [
        threading.Thread(target=gateway.complete, args=(make_prompt(user=f"u{i}"), "live"))
        for i in range(8)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert 1 <= state["peak"] <= 2


def test_cancellation_aborts_in_flight_live_call(monkeypatch):
    monkeypatch.setenv("OPENAI_API_KEY", "sk-test")
    entered = threading.Event()
    release = threading.Event()

    def transport(url, headers, payload, timeout):
        entered.set()
        release.wait(5)
        return 200, ok_body("too late")

    gateway, _ = live_gateway(transport, max_retries=0)
    token = CancelToken()
    outcome = {}

    def run():
        try:
            gateway.complete(make_prompt(), backend="live", cancel=token)
            outcome["result"] = "completed"
        except Cancelled:
            outcome["result"] = "cancelled"

    worker = threading.Thread(target=run)
    worker.start()
    assert entered.wait(5)
    token.cancel()
    release.set()
    worker.join(5)
    assert outcome["result"] == "cancelled"


def test_pre_cancelled_request_never_sends():
    gateway = LlmGateway(LlmConfig())
    token = CancelToken()
    token.cancel()
    with pytest.raises(Cancelled):
        gateway.complete(make_prompt(), backend="mock", cancel=token)


# ---------------------------------------------------------------------------
# secret hygiene
# ---------------------------------------------------------------------------


SECRET = "sk-SENTINEL-do-not-leak-123456"


def test_key_never_appears_in_errors_logs_or_transcripts(monkeypatch, tmp_path, caplog):
    monkeypatch.setenv("OPENAI_API_KEY", SECRET)
    store = tmp_path / "t.jsonl"

    # transport failure whose message embeds the key (worst case)
    transport = ScriptedTransport([TransportFailure(f"connect error for Bearer {SECRET}")])
    gateway, _ = live_gateway(transport, max_retries=1)
    gateway.transcripts = None
    with caplog.at_level("DEBUG"):
        with pytest.raises(BackendUnavailable) as excinfo:
            gateway.complete(make_prompt(), backend="live")
    assert SECRET not in str(excinfo.value)
    assert SECRET not in caplog.text

    # auth error path
    transport = ScriptedTransport([(401, b"denied")])
    gateway, _ = live_gateway(transport)
    with pytest.raises(AuthError) as excinfo:
        gateway.complete(make_prompt(), backend="live")
    assert SECRET not in str(excinfo.value)

    # transcripts hold only prompt hash, model, text, timestamp
    ok_gateway, _ = live_gateway(ScriptedTransport([(200, ok_body("answer"))]))
    result = ok_gateway.complete(make_prompt(), backend="live")
    record_transcript(store, make_prompt(), result)
    assert SECRET not in store.read_text()


def test_unknown_backend_rejected():
    gateway = LlmGateway(LlmConfig())
    with pytest.raises(ValueError):
        gateway.complete(make_prompt(), backend="teapot")


def test_config_validation():
    with pytest.raises(ValueError):
        LlmConfig(timeout=0)
    with pytest.raises(ValueError):
        LlmConfig(max_retries=-1)
    with pytest.raises(ValueError):
        LlmConfig(max_concurrent=0)

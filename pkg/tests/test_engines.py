import json

import pytest

from idiomizer.engines import (
    DeterministicEngine, EngineRequest, EngineUnavailable, FixtureStore, LLMEngine, MalformedResponse,
    parse_reply, reply_text,
)
from idiomizer.knowledge import IdiomKind
from idiomizer.outcomes import Accepted, Declined, check_accepted
from idiomizer.prompts import prompt_for
from idiomizer.transforms import TransformContext

I = IdiomKind
CTX = TransformContext(frozenset(), "    ")


def test_parse_reply():
    assert parse_reply("Yes\n```python\nb < a < 1\n```") == Accepted("b < a < 1")
    assert isinstance(parse_reply("No"), Declined)
    with pytest.raises(MalformedResponse):
        parse_reply("maybe?")
    with pytest.raises(MalformedResponse):
        parse_reply("Yes, but no code")


def test_reply_round_trip():
    for outcome in (Accepted("x = [a for a in b]"), Declined("not applicable")):
        assert parse_reply(reply_text(outcome)) == outcome


def test_request_hash_is_stable():
    prompt = prompt_for(I.CHAIN_COMPARISON).render()
    a = EngineRequest(I.CHAIN_COMPARISON, prompt, "v1 < v2 and v2 < v3")
    b = EngineRequest(I.CHAIN_COMPARISON, prompt, "v1 < v2 and v2 < v3")
    assert a.sha256 == b.sha256 and len(a.sha256) == 64
    assert a.sha256 != EngineRequest(I.TRUTH_TEST, prompt, a.abstract_code).sha256


def test_fixture_store_round_trip(tmp_path):
    path = tmp_path / "fx.jsonl"
    store = FixtureStore(path)
    request = LLMEngine(store).request(I.TRUTH_TEST, "len(v1) == 0")
    store.add(request, "Yes\n```python\nnot v1\n```")
    reloaded = FixtureStore(path)
    assert request in reloaded and len(reloaded) == 1
    assert json.loads(path.read_text().splitlines()[0])


def test_replay_hits_and_misses(tmp_path, monkeypatch):
    monkeypatch.delenv("IDIOMIZER_LLM_ENDPOINT", raising=False)
    store = FixtureStore(tmp_path / "fx.jsonl")
    engine = LLMEngine(store)
    store.add(engine.request(I.TRUTH_TEST, "len(v1) == 0"), "Yes\n```python\nnot v1\n```")
    assert engine.run(I.TRUTH_TEST, "len(v1) == 0", CTX) == Accepted("not v1")
    with pytest.raises(EngineUnavailable):
        engine.run(I.TRUTH_TEST, "v1 == 0", CTX)


def test_accepted_without_marker_is_demoted():
    outcome = check_accepted(Accepted("a = 1\nb = 2"), I.ASSIGN_MULTI_TARGETS)
    assert isinstance(outcome, Declined)


def test_deterministic_engine():
    assert DeterministicEngine().run(I.TRUTH_TEST, "len(v1) == 0", CTX) == Accepted("not len(v1)")


def test_chain_prompt_carries_instruction():
    text = prompt_for(I.CHAIN_COMPARISON).render()
    assert "reverse compare operands" in text.lower()
    assert all(prompt_for(k).render() for k in I)

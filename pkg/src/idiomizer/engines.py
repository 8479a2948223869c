"""Idiomatization engines: built-in rules, a remote chat model, and fixture replay."""
from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Protocol, Union

from .knowledge import IdiomKind
from .outcomes import Accepted, Declined, Outcome, check_accepted
from .prompts import prompt_for, user_message
from .transforms import TransformContext, transform

log = logging.getLogger(__name__)

ENDPOINT_ENV = "IDIOMIZER_LLM_ENDPOINT"
KEY_ENV = "IDIOMIZER_LLM_KEY"
MODEL_ENV = "IDIOMIZER_LLM_MODEL"


class EngineUnavailable(RuntimeError):
    pass


class MalformedResponse(ValueError):
    pass


@dataclass(frozen=True)
class EngineRequest:
    idiom: IdiomKind
    prompt: str
    abstract_code: str
    temperature: float = 0.0

    @property
    def sha256(self) -> str:
        payload = json.dumps([self.idiom.value, self.prompt, self.abstract_code], ensure_ascii=False)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class EngineResponse:
    raw: str
    outcome: Outcome


_FENCE = re.compile(r"```[ \t]*(?:python|py)?[ \t]*\r?\n(.*?)```", re.S | re.I)


def parse_reply(raw: str) -> Outcome:
    """Read a Yes/No verdict line and, after Yes, a fenced code block."""
    lines = [line for line in raw.strip().splitlines() if line.strip()]
    if not lines:
        raise MalformedResponse("empty reply")
    verdict = re.sub(r"[^a-z]", " ", lines[0].lower()).split()
    head = verdict[0] if verdict else ""
    if head == "yes":
        m = _FENCE.search(raw)
        if m is None:
            raise MalformedResponse("verdict Yes without a fenced code block")
        return Accepted(m.group(1).rstrip("\n"))
    if head == "no":
        reason = " ".join(lines[1:]).strip() or "model declined"
        return Declined(reason)
    raise MalformedResponse(f"no Yes/No verdict in {lines[0][:40]!r}")


class FixtureStore:
    """Recorded model replies keyed by request hash, stored as JSON lines."""

    def __init__(self, path: Optional[Union[str, Path]] = None) -> None:
        self.path = Path(path) if path is not None else None
        self._records: dict[str, dict] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            for number, line in enumerate(self.path.read_text(encoding="utf-8").splitlines(), start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    self._records[record["request_sha256"]] = record
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise ValueError(f"{self.path}:{number}: bad fixture record ({exc})") from exc

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, request: EngineRequest) -> bool:
        return request.sha256 in self._records

    def get(self, request: EngineRequest) -> Optional[str]:
        record = self._records.get(request.sha256)
        return None if record is None else record["response"]

    def add(self, request: EngineRequest, response: str) -> None:
        record = {
            "request_sha256": request.sha256,
            "idiom": request.idiom.value,
            "prompt": request.prompt,
            "abstract_code": request.abstract_code,
            "response": response,
        }
        with self._lock:
            if request.sha256 in self._records:
                return
            self._records[request.sha256] = record
            if self.path is not None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


@dataclass
class Endpoint:
    url: str
    key: Optional[str] = None
    model: str = "gpt-3.5-turbo"
    timeout: float = 60.0

    @classmethod
    def from_env(cls) -> Optional["Endpoint"]:
        url = os.environ.get(ENDPOINT_ENV)
        if not url:
            return None
        return cls(url, os.environ.get(KEY_ENV), os.environ.get(MODEL_ENV, "gpt-3.5-turbo"))


_IN_FLIGHT = threading.BoundedSemaphore(4)


def _post(request: EngineRequest, endpoint: Endpoint) -> str:
    import httpx

    headers = {"Content-Type": "application/json"}
    if endpoint.key:
        headers["Authorization"] = f"Bearer {endpoint.key}"
    body = {
        "model": endpoint.model,
        "temperature": 0,
        "messages": [{"role": "user", "content": user_message(request.prompt, request.abstract_code)}],
    }
    with _IN_FLIGHT:
        reply = httpx.post(endpoint.url, json=body, headers=headers, timeout=endpoint.timeout)
    reply.raise_for_status()
    return reply.json()["choices"][0]["message"]["content"]


def llm_complete(
    request: EngineRequest,
    fixtures: FixtureStore,
    endpoint: Optional[Endpoint] = None,
    record: bool = False,
) -> EngineResponse:
    raw = fixtures.get(request)
    if raw is None:
        if endpoint is None:
            raise EngineUnavailable(f"no fixture for request {request.sha256[:12]} and no endpoint configured")
        raw = _post(request, endpoint)
        if record:
            fixtures.add(request, raw)
    try:
        outcome = parse_reply(raw)
    except MalformedResponse as exc:
        log.warning("malformed model reply for %s: %s", request.sha256[:12], exc)
        outcome = Declined(f"malformed response: {exc}")
    return EngineResponse(raw, outcome)


class Engine(Protocol):
    name: str

    def run(self, idiom: IdiomKind, abstract_code: str, ctx: TransformContext) -> Outcome: ...


class DeterministicEngine:
    name = "deterministic"

    def run(self, idiom: IdiomKind, abstract_code: str, ctx: TransformContext) -> Outcome:
        return check_accepted(transform(idiom, abstract_code, ctx), idiom)


@dataclass
class LLMEngine:
    fixtures: FixtureStore = field(default_factory=FixtureStore)
    endpoint: Optional[Endpoint] = None
    record: bool = False
    name: str = "llm"

    def request(self, idiom: IdiomKind, abstract_code: str) -> EngineRequest:
        return EngineRequest(idiom, prompt_for(idiom).render(), abstract_code)

    def run(self, idiom: IdiomKind, abstract_code: str, ctx: TransformContext) -> Outcome:
        response = llm_complete(self.request(idiom, abstract_code), self.fixtures, self.endpoint, self.record)
        return check_accepted(response.outcome, idiom)


def replay_engine(fixtures: FixtureStore) -> LLMEngine:
    return LLMEngine(fixtures=fixtures, endpoint=None, record=False, name="replay")


def reply_text(outcome: Outcome) -> str:
    """The model reply that would produce ``outcome``; used to author fixtures."""
    if isinstance(outcome, Accepted):
        return f"Yes\n```python\n{outcome.abstract_idiomatic_code}\n```"
    return f"No\n{outcome.reason}"

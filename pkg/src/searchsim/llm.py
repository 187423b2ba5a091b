"""Chat-completion backends: a live HTTP client and a deterministic scripted stand-in.

The scripted backend is a pure function of (messages, seed): it first tries a
reply table (keys matched as substrings of the rendered prompt), then falls
back to a hash-driven synthesizer shaped by the request tag.
"""
from __future__ import annotations

import hashlib
import logging
import os
import re
import time
from dataclasses import dataclass, field
from pathlib import Path

import requests

from .index import ENGLISH_STOPWORDS

logger = logging.getLogger(__name__)

ROLES = ("system", "user", "assistant")

# Request tags: routing hints for scripted backends, never sent over the wire.
TAG_QUERY_GENERATION = "query_generation"
TAG_FOLLOWUP_QUERY = "followup_query"
TAG_RELEVANCE_JUDGMENT = "relevance_judgment"
TAG_SUMMARIZATION = "summarization"


class BackendError(RuntimeError):
    """Transport failure after retries, or a malformed completion body."""


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[ChatMessage, ...]
    temperature: float = 0.0
    seed: int = 0
    max_tokens: int | None = None
    tag: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "messages", tuple(self.messages))
        if not self.messages:
            raise ValueError("a request needs at least one message")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be in [0, 2]")

    def prompt_text(self) -> str:
        return "\n".join(m.content for m in self.messages)


@dataclass
class ChatResponse:
    text: str
    meta: dict = field(default_factory=dict)


@dataclass
class BackendConfig:
    endpoint: str
    model: str
    api_key_env: str = "SEARCHSIM_API_KEY"
    timeout: float = 60.0
    retries: int = 2
    max_tokens: int | None = None  # applied when a request leaves its own unset

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if self.retries < 0:
            raise ValueError("retries must be >= 0")


def default_params(task: str) -> tuple[float, int]:
    """(temperature, seed) per task: creative query generation at 1.0, fully
    context-driven judgments and summaries at 0, fixed seed 0 throughout."""
    table = {
        TAG_QUERY_GENERATION: (1.0, 0),
        TAG_RELEVANCE_JUDGMENT: (0.0, 0),
        TAG_SUMMARIZATION: (0.0, 0),
    }
    if task not in table:
        raise ValueError(f"unknown task {task!r}")
    return table[task]


class HttpBackend:
    """Client for an OpenAI-style chat-completions endpoint."""

    def __init__(self, config: BackendConfig):
        self.config = config

    def complete(self, request: ChatRequest) -> ChatResponse:
        payload: dict = {
            "model": self.config.model,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
            "temperature": request.temperature,
            "seed": request.seed,
            "n": 1,
        }
        max_tokens = request.max_tokens if request.max_tokens is not None \
            else self.config.max_tokens
        if max_tokens is not None:
            payload["max_tokens"] = max_tokens
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.config.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"

        last_error: str = ""
        attempts = self.config.retries + 1
        started = time.monotonic()
        for attempt in range(attempts):
            if attempt:
                time.sleep(min(0.2 * 2 ** (attempt - 1), 2.0))
            try:
                resp = requests.post(self.config.endpoint, json=payload, headers=headers,
                                     timeout=self.config.timeout)
            except requests.RequestException as exc:
                last_error = str(exc)
                logger.warning("chat request attempt %d/%d failed: %s", attempt + 1, attempts, exc)
                continue
            if resp.status_code >= 500:
                last_error = f"HTTP {resp.status_code}"
                logger.warning("chat request attempt %d/%d got %s", attempt + 1, attempts, last_error)
                continue
            if resp.status_code >= 400:
                raise BackendError(f"endpoint rejected request: HTTP {resp.status_code} "
                                   f"{resp.text[:200]}")
            try:
                data = resp.json()
                text = data["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise BackendError(f"malformed completion body: {exc}") from exc
            meta = {"model": data.get("model", self.config.model),
                    "usage": data.get("usage", {}),
                    "latency_s": time.monotonic() - started}
            return ChatResponse(text="" if text is None else str(text), meta=meta)
        raise BackendError(f"transport failure after {attempts} attempts: {last_error}")


def probe_endpoint(config: BackendConfig) -> bool:
    """Cheap reachability check: can we open a connection at all?"""
    try:
        requests.head(config.endpoint, timeout=config.timeout)
    except requests.RequestException:
        return False
    return True


# --- scripted backend ----------------------------------------------------------

_WORD_RE = re.compile(r"[a-z]{4,}")


class ScriptedBackend:
    """Deterministic stand-in for a live endpoint.

    Reply-table keys are matched as substrings of the rendered prompt (longest
    key first); without a match, a reply is synthesized from a SHA-256 digest
    of (seed, tag, prompt), so identical requests always produce identical
    text, in any process.
    """

    def __init__(self, replies: dict[str, str] | None = None):
        self.replies = dict(replies or {})
        self._key_order = sorted(self.replies, key=lambda k: (-len(k), k))

    def complete(self, request: ChatRequest) -> ChatResponse:
        prompt = request.prompt_text()
        for key in self._key_order:
            if key and key in prompt:
                return ChatResponse(self.replies[key],
                                    {"backend": "scripted", "matched_key": key})
        return ChatResponse(self._synthesize(request, prompt), {"backend": "scripted"})

    @staticmethod
    def _digest(request: ChatRequest, prompt: str) -> bytes:
        material = f"{request.seed}|{request.tag or ''}|{prompt}"
        return hashlib.sha256(material.encode("utf-8")).digest()

    @staticmethod
    def _pick(pool: list[str], digest: bytes, slot: int) -> str:
        value = int.from_bytes(digest[(2 * slot) % 30:(2 * slot) % 30 + 2], "big")
        return pool[value % len(pool)]

    def _term_pool(self, prompt: str) -> list[str]:
        terms = sorted({t for t in _WORD_RE.findall(prompt.lower())
                        if t not in ENGLISH_STOPWORDS})
        return terms or ["records"]

    def _synthesize(self, request: ChatRequest, prompt: str) -> str:
        digest = self._digest(request, prompt)
        pool = self._term_pool(prompt)
        tag = request.tag
        if tag == TAG_RELEVANCE_JUDGMENT:
            return "Yes" if digest[0] % 2 == 0 else "No"
        if tag == TAG_QUERY_GENERATION:
            lines = []
            seen: set[str] = set()
            i = 0
            while len(lines) < 12 and i < 64:
                d = hashlib.sha256(digest + bytes([i]))
                query = self._make_query(pool, d.digest())
                i += 1
                if query in seen:
                    continue
                seen.add(query)
                lines.append(f"{len(lines) + 1}. {query}")
            return "\n".join(lines)
        if tag == TAG_FOLLOWUP_QUERY:
            return self._make_query(pool, digest)
        if tag == TAG_SUMMARIZATION:
            picks = []
            for slot in range(6):
                term = self._pick(pool, digest, slot)
                if term not in picks:
                    picks.append(term)
            return ("The collected material repeatedly covers "
                    + ", ".join(picks[:-1]) + " and " + picks[-1] + ".")
        return f"ok {digest[:4].hex()}"

    def _make_query(self, pool: list[str], digest: bytes) -> str:
        n = 2 + digest[1] % 2
        terms = []
        for slot in range(n):
            term = self._pick(pool, digest, slot)
            if term not in terms:
                terms.append(term)
        return " ".join(terms)


def load_reply_table(path: str | Path) -> dict[str, str]:
    """Read a plain-text reply table: one ``key<TAB>value`` pair per line.

    Blank lines and ``#`` comments are ignored; ``\\n`` escapes in the value
    are decoded so replies can span lines.
    """
    replies: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if "\t" not in line:
            raise ValueError(f"reply table line {lineno} has no tab separator")
        key, value = line.split("\t", 1)
        replies[key] = value.replace("\\n", "\n")
    return replies

"""Search-session loop and campaign driver.

One session walks the classic searcher loop: issue a query, inspect snippets
top-down, open promising documents, judge them, fold the judgment into the
user's knowledge state, and move to the next query until the budget runs out.
Every step is logged with its cost so the logs alone support evaluation.
"""
from __future__ import annotations

import hashlib
import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .agents import (
    FEEDBACK_KINDS,
    LLM_KINDS,
    KnowledgeState,
    Persona,
    PromptTemplates,
    QueryGenerationError,
    UserKind,
    decide_relevance_llm,
    decide_relevance_random,
    generate_initial_queries,
    generate_query_naive,
    generate_followup_query,
    queries_for_rnd_star,
    update_knowledge_state,
)
from .corpus import QrelSet, Topic
from .index import InvertedIndex, search
from .llm import BackendError

# Interaction kinds
QUERY_ISSUED = "QueryIssued"
SNIPPET_VIEWED = "SnippetViewed"
DOCUMENT_VIEWED = "DocumentViewed"
JUDGMENT_MADE = "JudgmentMade"
SESSION_ENDED = "SessionEnded"
ANOMALY = "Anomaly"
INTERACTION_KINDS = (QUERY_ISSUED, SNIPPET_VIEWED, DOCUMENT_VIEWED,
                     JUDGMENT_MADE, SESSION_ENDED, ANOMALY)

# SessionEnded reasons
END_MAX_QUERIES = "max_queries_reached"
END_QUERIES_EXHAUSTED = "queries_exhausted"
END_BACKEND_FAILURE = "backend_failure"
END_QUERY_GENERATION_FAILURE = "query_generation_failure"

# Snippet stop rules
FIXED_DEPTH = "fixed_depth"
CONSECUTIVE_IRRELEVANT = "consecutive_irrelevant"


class CampaignError(ValueError):
    """Invalid campaign setup, reported before any session runs."""


@dataclass(frozen=True)
class Interaction:
    seq: int
    kind: str
    cost: float
    payload: dict

    def __post_init__(self):
        if self.kind not in INTERACTION_KINDS:
            raise ValueError(f"unknown interaction kind {self.kind!r}")
        if self.cost < 0:
            raise ValueError("cost must be >= 0")


@dataclass(frozen=True)
class CostModel:
    """Per-action costs in seconds; defaults are configurable stand-ins."""

    query_cost: float = 10.0
    snippet_cost: float = 3.0
    document_cost: float = 20.0
    judgment_cost: float = 5.0

    def __post_init__(self):
        for name in ("query_cost", "snippet_cost", "document_cost", "judgment_cost"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class SnippetStopRule:
    """fixed_depth: view at most ``value`` snippets per query.

    consecutive_irrelevant: stop scanning a query's results after ``value``
    consecutive results that produced no relevant judgment (not opened, or
    opened and judged irrelevant); a relevant judgment resets the count.
    """

    kind: str = FIXED_DEPTH
    value: int = 10

    def __post_init__(self):
        if self.kind not in (FIXED_DEPTH, CONSECUTIVE_IRRELEVANT):
            raise ValueError(f"unknown stop rule {self.kind!r}")
        if self.value < 1:
            raise ValueError("stop rule value must be >= 1")


@dataclass(frozen=True)
class SessionPolicy:
    """Defaults: 10 queries, one 10-result page per query, scan to the bottom."""

    max_queries: int = 10
    page_size: int = 10
    max_pages_per_query: int = 1
    stop_rule: SnippetStopRule | None = None  # None: fixed depth = reachable results

    def __post_init__(self):
        if self.max_queries < 1 or self.page_size < 1 or self.max_pages_per_query < 1:
            raise ValueError("policy counts must be >= 1")
        if self.stop_rule is None:
            object.__setattr__(self, "stop_rule", SnippetStopRule(
                FIXED_DEPTH, self.page_size * self.max_pages_per_query))
        if (self.stop_rule.kind == FIXED_DEPTH
                and self.stop_rule.value > self.page_size * self.max_pages_per_query):
            raise ValueError("fixed depth exceeds the reachable result count")


@dataclass
class SessionLog:
    topic_id: str
    user_kind: UserKind
    seed: int
    interactions: list[Interaction] = field(default_factory=list)
    queries_issued: list[str] = field(default_factory=list)
    initial_queries: list[str] = field(default_factory=list)
    config_hash: str | None = None

    @property
    def end_reason(self) -> str | None:
        for it in reversed(self.interactions):
            if it.kind == SESSION_ENDED:
                return it.payload.get("reason")
        return None

    @property
    def anomaly_count(self) -> int:
        return sum(1 for it in self.interactions if it.kind == ANOMALY)

    def total_cost(self) -> float:
        return sum(it.cost for it in self.interactions)


def run_session(topic: Topic, kind: UserKind, index: InvertedIndex, qrels: QrelSet, *,
                policy: SessionPolicy | None = None,
                cost_model: CostModel | None = None,
                backend=None,
                rng_seed: int = 0,
                templates: PromptTemplates | None = None,
                persona: Persona | None = None,
                queries_per_session: int = 10,
                preset_queries: list[str] | None = None,
                p_random: float = 0.5,
                snippet_max_chars: int = 160,
                k1: float = 1.2,
                b: float = 0.75,
                max_summary_words: int = 200) -> SessionLog:
    """Run one simulated session and return its interaction log.

    The snippet-level open/skip decision uses the same relevance mechanism as
    the document judgment, applied to the snippet text. Documents already
    judged in this session are skipped without cost when they reappear in a
    later result list. Backend failures end the session with a marked,
    partial log.
    """
    policy = policy or SessionPolicy()
    cost = cost_model or CostModel()
    kind = UserKind(kind)
    if kind in LLM_KINDS and backend is None:
        raise ValueError(f"{kind.value} requires a chat backend")
    if kind is UserKind.RND_STAR and preset_queries is None:
        raise ValueError("RND_STAR requires preset_queries (FTTC's query list)")

    rng = random.Random(rng_seed)
    log = SessionLog(topic_id=topic.topic_id, user_kind=kind, seed=rng_seed)
    state = KnowledgeState()
    judged_docs: set[str] = set()

    def _log(kind_: str, cost_: float, **payload) -> None:
        log.interactions.append(Interaction(len(log.interactions), kind_, cost_, payload))

    def _anomaly(message: str) -> None:
        _log(ANOMALY, 0.0, message=message)

    def _decide(text: str) -> bool:
        if kind in LLM_KINDS:
            return decide_relevance_llm(backend, topic, kind, state, text,
                                        templates=templates, persona=persona,
                                        on_anomaly=_anomaly)
        return decide_relevance_random(rng, p_random)

    def _end(reason: str) -> SessionLog:
        _log(SESSION_ENDED, 0.0, reason=reason)
        return log

    try:
        if kind is UserKind.RND:
            pre: list[str] = []
        elif kind is UserKind.RND_STAR:
            # an empty preset (degraded FTTC run) exhausts immediately
            pre = list(preset_queries)
        else:
            pre = generate_initial_queries(backend, topic, kind,
                                           n_queries=queries_per_session,
                                           templates=templates, persona=persona,
                                           on_anomaly=_anomaly)
    except BackendError as exc:
        _anomaly(f"backend failure before the first query: {exc}")
        return _end(END_BACKEND_FAILURE)
    except QueryGenerationError as exc:
        _anomaly(str(exc))
        return _end(END_QUERY_GENERATION_FAILURE)
    log.initial_queries = list(pre)

    def _next_query(position: int) -> str | None:
        if kind is UserKind.RND:
            return generate_query_naive(topic, rng, on_anomaly=_anomaly)
        if kind in FEEDBACK_KINDS and state.judged:
            return generate_followup_query(backend, topic, kind, state,
                                           log.queries_issued,
                                           templates=templates, persona=persona,
                                           on_anomaly=_anomaly)
        if position < len(pre):
            return pre[position]
        return None

    def _scan(query: str) -> None:
        viewed = 0
        consecutive = 0
        for page in range(1, policy.max_pages_per_query + 1):
            serp = search(index, query, page, policy.page_size,
                          k1=k1, b=b, snippet_max_chars=snippet_max_chars)
            if not serp.results:
                return
            for (rank, doc_id, _score), snippet in zip(serp.results, serp.snippets):
                if doc_id in judged_docs:
                    continue  # re-encountered in a later SERP: skip without cost
                if policy.stop_rule.kind == FIXED_DEPTH and viewed >= policy.stop_rule.value:
                    return
                if (policy.stop_rule.kind == CONSECUTIVE_IRRELEVANT
                        and consecutive >= policy.stop_rule.value):
                    return
                _log(SNIPPET_VIEWED, cost.snippet_cost, doc_id=doc_id, rank=rank)
                viewed += 1
                judged_relevant = False
                if _decide(snippet):
                    document = index.document(doc_id)
                    _log(DOCUMENT_VIEWED, cost.document_cost, doc_id=doc_id)
                    relevant = _decide(document.full_text())
                    grade = qrels.grade(topic.topic_id, doc_id)
                    _log(JUDGMENT_MADE, cost.judgment_cost, doc_id=doc_id,
                         relevant=relevant, grade=grade)
                    judged_docs.add(doc_id)
                    if kind in LLM_KINDS:
                        update_knowledge_state(backend, state, document, relevant,
                                               templates=templates, persona=persona,
                                               max_words=max_summary_words,
                                               on_anomaly=_anomaly)
                    judged_relevant = relevant
                consecutive = 0 if judged_relevant else consecutive + 1
            if len(serp.results) < policy.page_size:
                return

    reason = END_MAX_QUERIES
    try:
        for position in range(policy.max_queries):
            query = _next_query(position)
            if query is None:
                reason = END_QUERIES_EXHAUSTED
                break
            log.queries_issued.append(query)
            _log(QUERY_ISSUED, cost.query_cost, query=query)
            _scan(query)
    except BackendError as exc:
        _anomaly(f"backend failure: {exc}")
        reason = END_BACKEND_FAILURE
    except QueryGenerationError as exc:
        _anomaly(str(exc))
        reason = END_QUERY_GENERATION_FAILURE
    return _end(reason)


# --- campaigns ------------------------------------------------------------------

def derive_session_seed(campaign_seed: int, topic_id: str, kind: UserKind) -> int:
    """Stable per-session seed; adding topics or kinds never shifts the others."""
    material = f"{campaign_seed}|{topic_id}|{UserKind(kind).value}".encode("utf-8")
    return int.from_bytes(hashlib.sha256(material).digest()[:8], "big")


def validate_campaign_kinds(kinds: list[UserKind]) -> list[UserKind]:
    """Deduplicate, check RND_STAR's dependency, and order FTTC before RND_STAR."""
    ordered: list[UserKind] = []
    for k in kinds:
        k = UserKind(k)
        if k not in ordered:
            ordered.append(k)
    if not ordered:
        raise CampaignError("at least one user kind is required")
    if UserKind.RND_STAR in ordered:
        if UserKind.FTTC not in ordered:
            raise CampaignError("RND_STAR reuses FTTC's queries; add FTTC to the campaign")
        fttc, star = ordered.index(UserKind.FTTC), ordered.index(UserKind.RND_STAR)
        if star < fttc:
            ordered.insert(star, ordered.pop(fttc))
    return ordered


def run_campaign(topics: list[Topic], kinds: list[UserKind], index: InvertedIndex,
                 qrels: QrelSet, *,
                 policy: SessionPolicy | None = None,
                 cost_model: CostModel | None = None,
                 backend=None,
                 campaign_seed: int = 0,
                 workers: int = 1,
                 **session_kwargs) -> list[SessionLog]:
    """Run every (topic, kind) session; topics outer, kinds inner.

    Per-session seeds derive from (campaign_seed, topic_id, kind). RND_STAR
    sessions run after their topic's FTTC session so they can replay its
    query list; the returned order is deterministic regardless of workers.
    """
    kinds = validate_campaign_kinds(list(kinds))
    if not topics:
        raise CampaignError("at least one topic is required")

    def _run(topic: Topic, kind: UserKind, preset: list[str] | None) -> SessionLog:
        return run_session(topic, kind, index, qrels, policy=policy,
                           cost_model=cost_model, backend=backend,
                           rng_seed=derive_session_seed(campaign_seed, topic.topic_id, kind),
                           preset_queries=preset, **session_kwargs)

    results: dict[tuple[str, UserKind], SessionLog] = {}
    first_wave = [(t, k) for t in topics for k in kinds if k is not UserKind.RND_STAR]
    if workers > 1 and len(first_wave) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_run, t, k, None): (t.topic_id, k) for t, k in first_wave}
            for future, key in futures.items():
                results[key] = future.result()
    else:
        for t, k in first_wave:
            results[(t.topic_id, k)] = _run(t, k, None)

    if UserKind.RND_STAR in kinds:
        second_wave = [(t, UserKind.RND_STAR) for t in topics]
        presets: dict[str, list[str]] = {}
        for t in topics:
            generated = results[(t.topic_id, UserKind.FTTC)].initial_queries
            # a degraded FTTC run leaves nothing to replay; RND_STAR then
            # exhausts immediately instead of failing the campaign
            presets[t.topic_id] = queries_for_rnd_star(generated) if generated else []
        if workers > 1 and len(second_wave) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = {pool.submit(_run, t, k, presets[t.topic_id]): (t.topic_id, k)
                           for t, k in second_wave}
                for future, key in futures.items():
                    results[key] = future.result()
        else:
            for t, k in second_wave:
                results[(t.topic_id, k)] = _run(t, k, presets[t.topic_id])

    return [results[(t.topic_id, k)] for t in topics for k in kinds]


# --- log serialization ------------------------------------------------------------

def _dumps(record: dict) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def session_log_to_jsonl(log: SessionLog) -> bytes:
    header = {
        "record": "session",
        "topic_id": log.topic_id,
        "user_kind": log.user_kind.value,
        "seed": log.seed,
        "initial_queries": log.initial_queries,
        "config_hash": log.config_hash,
    }
    lines = [_dumps(header)]
    lines += [_dumps({"record": "interaction", "seq": it.seq, "kind": it.kind,
                      "cost": it.cost, "payload": it.payload})
              for it in log.interactions]
    return ("\n".join(lines) + "\n").encode("utf-8")


class LogFormatError(ValueError):
    pass


def session_log_from_jsonl(data: bytes) -> SessionLog:
    lines = [line for line in data.decode("utf-8").splitlines() if line.strip()]
    if not lines:
        raise LogFormatError("empty session log")
    try:
        header = json.loads(lines[0])
        if header.get("record") != "session":
            raise ValueError("first record is not a session header")
        log = SessionLog(topic_id=header["topic_id"],
                         user_kind=UserKind(header["user_kind"]),
                         seed=header["seed"],
                         initial_queries=list(header.get("initial_queries") or []),
                         config_hash=header.get("config_hash"))
        for line in lines[1:]:
            record = json.loads(line)
            if record.get("record") != "interaction":
                raise ValueError("expected an interaction record")
            log.interactions.append(Interaction(record["seq"], record["kind"],
                                                record["cost"], record["payload"]))
    except (ValueError, KeyError, TypeError) as exc:
        raise LogFormatError(f"bad session log: {exc}") from exc
    log.queries_issued = [it.payload["query"] for it in log.interactions
                          if it.kind == QUERY_ISSUED]
    return log


def session_log_filename(log: SessionLog) -> str:
    safe_topic = "".join(c if c.isalnum() else "_" for c in log.topic_id)
    return f"{safe_topic}__{log.user_kind.value}.jsonl"


def write_session_log(log: SessionLog, directory: str | Path) -> Path:
    path = Path(directory) / session_log_filename(log)
    path.write_bytes(session_log_to_jsonl(log))
    return path


def read_session_log(path: str | Path) -> SessionLog:
    return session_log_from_jsonl(Path(path).read_bytes())


def write_campaign_manifest(directory: str | Path, logs: list[SessionLog], *,
                            campaign_seed: int, config_hash: str | None) -> Path:
    manifest = {
        "record": "campaign",
        "campaign_seed": campaign_seed,
        "config_hash": config_hash,
        "sessions": [
            {
                "topic_id": log.topic_id,
                "user_kind": log.user_kind.value,
                "seed": log.seed,
                "file": session_log_filename(log),
                "interactions": len(log.interactions),
                "anomalies": log.anomaly_count,
                "end_reason": log.end_reason,
            }
            for log in logs
        ],
    }
    path = Path(directory) / "manifest.json"
    path.write_text(json.dumps(manifest, sort_keys=True, ensure_ascii=False, indent=2) + "\n",
                    encoding="utf-8")
    return path


def read_campaign_manifest(directory: str | Path) -> dict:
    return json.loads((Path(directory) / "manifest.json").read_text(encoding="utf-8"))

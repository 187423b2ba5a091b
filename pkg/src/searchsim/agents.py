"""The eight simulated user configurations.

Two random baselines (RND, RND_STAR) decide relevance by a Bernoulli draw;
the six LLM-backed users differ in how much topic context their prompts carry
and in which knowledge-state summaries they receive:

    kind       topic fields            summaries in prompt
    RND        (no prompts)            -
    RND_STAR   (no prompts)            -
    TTT        title                   -
    FTTC       title, desc, narrative  -
    PRF        title, desc, narrative  relevant side only
    NRF        title, desc, narrative  irrelevant side only
    CRF        title, desc, narrative  both sides
    CRF_PRIME  title                   both sides

Feedback users (PRF/NRF/CRF/CRF_PRIME) behave exactly like FTTC until their
first judgment; from then on summaries of the seen documents enter every
prompt and follow-up queries replace the pre-generated ones.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Callable

from .corpus import Document, Topic
from .index import ENGLISH_STOPWORDS, tokenize
from .llm import (
    TAG_FOLLOWUP_QUERY,
    TAG_QUERY_GENERATION,
    TAG_RELEVANCE_JUDGMENT,
    TAG_SUMMARIZATION,
    ChatMessage,
    ChatRequest,
    default_params,
)

logger = logging.getLogger(__name__)

AnomalySink = Callable[[str], None]


class UserKind(str, Enum):
    RND = "RND"
    RND_STAR = "RND_STAR"
    TTT = "TTT"
    FTTC = "FTTC"
    PRF = "PRF"
    NRF = "NRF"
    CRF = "CRF"
    CRF_PRIME = "CRF_PRIME"


RANDOM_KINDS = frozenset({UserKind.RND, UserKind.RND_STAR})
FEEDBACK_KINDS = frozenset({UserKind.PRF, UserKind.NRF, UserKind.CRF, UserKind.CRF_PRIME})
LLM_KINDS = frozenset({UserKind.TTT, UserKind.FTTC}) | FEEDBACK_KINDS


@dataclass(frozen=True)
class TopicContext:
    include_title: bool = True
    include_description: bool = True
    include_narrative: bool = True


_TITLE_ONLY = TopicContext(True, False, False)
_FULL = TopicContext(True, True, True)

TOPIC_CONTEXT: dict[UserKind, TopicContext] = {
    UserKind.RND: _FULL,  # used for naive-query vocabulary, not prompts
    UserKind.RND_STAR: _FULL,
    UserKind.TTT: _TITLE_ONLY,
    UserKind.FTTC: _FULL,
    UserKind.PRF: _FULL,
    UserKind.NRF: _FULL,
    UserKind.CRF: _FULL,
    UserKind.CRF_PRIME: _TITLE_ONLY,
}

# kind -> (relevant summary in prompt, irrelevant summary in prompt)
SUMMARY_SIDES: dict[UserKind, tuple[bool, bool]] = {
    UserKind.RND: (False, False),
    UserKind.RND_STAR: (False, False),
    UserKind.TTT: (False, False),
    UserKind.FTTC: (False, False),
    UserKind.PRF: (True, False),
    UserKind.NRF: (False, True),
    UserKind.CRF: (True, True),
    UserKind.CRF_PRIME: (True, True),
}

DEFAULT_PERSONA_PREAMBLE = (
    "You research news archives to collect material for in-depth reporting, "
    "and you can quickly tell whether an article serves the story you are working on."
)


@dataclass(frozen=True)
class Persona:
    role_name: str = "journalist"
    instruction_preamble: str = DEFAULT_PERSONA_PREAMBLE

    def __post_init__(self):
        if not self.role_name.strip() or not self.instruction_preamble.strip():
            raise ValueError("persona fields must be non-empty")


class QueryGenerationError(RuntimeError):
    """The backend's reply could not be parsed into queries, even on retry."""


class PromptTemplates:
    """Plain-text prompt templates with named placeholders.

    Optional blocks (topic fields, summaries) arrive pre-rendered with their
    labels, or as empty strings when excluded, so a single template serves
    every user kind.
    """

    REQUIRED = ("system", "initial_queries", "judge", "followup_query", "summarize")

    def __init__(self, mapping: dict[str, str]):
        missing = [name for name in self.REQUIRED if name not in mapping]
        if missing:
            raise ValueError(f"missing templates: {', '.join(missing)}")
        self.mapping = dict(mapping)

    @classmethod
    def load_dir(cls, path: str | Path) -> "PromptTemplates":
        path = Path(path)
        mapping = {f.stem: f.read_text(encoding="utf-8") for f in sorted(path.glob("*.txt"))}
        return cls(mapping)

    @classmethod
    def default(cls) -> "PromptTemplates":
        root = resources.files(__package__) / "templates"
        mapping = {
            name: (root / f"{name}.txt").read_text(encoding="utf-8")
            for name in cls.REQUIRED
        }
        return cls(mapping)

    def render(self, name: str, **values: str) -> str:
        try:
            return self.mapping[name].format(**values)
        except KeyError as exc:
            raise KeyError(f"template {name!r} needs a value for {exc}") from exc


_DEFAULT_TEMPLATES: PromptTemplates | None = None


def default_templates() -> PromptTemplates:
    global _DEFAULT_TEMPLATES
    if _DEFAULT_TEMPLATES is None:
        _DEFAULT_TEMPLATES = PromptTemplates.default()
    return _DEFAULT_TEMPLATES


@dataclass
class KnowledgeState:
    """What the user has judged so far, plus running summaries per side."""

    relevant_docs_seen: list[str] = field(default_factory=list)
    irrelevant_docs_seen: list[str] = field(default_factory=list)
    relevant_summary: str | None = None
    irrelevant_summary: str | None = None
    judged: dict[str, bool] = field(default_factory=dict)  # doc_id -> judged relevant
    _texts: dict[str, str] = field(default_factory=dict, repr=False)

    def record(self, doc_id: str, text: str, relevant: bool) -> None:
        if doc_id in self.judged:
            raise ValueError(f"document {doc_id!r} was already judged")
        self.judged[doc_id] = relevant
        (self.relevant_docs_seen if relevant else self.irrelevant_docs_seen).append(doc_id)
        self._texts[doc_id] = text

    def texts_for(self, relevant: bool) -> list[str]:
        ids = self.relevant_docs_seen if relevant else self.irrelevant_docs_seen
        return [self._texts[d] for d in ids]


# --- prompt assembly ----------------------------------------------------------

def _topic_fields(topic: Topic, ctx: TopicContext) -> dict[str, str]:
    return {
        "title": f"Title: {topic.title}\n" if ctx.include_title else "",
        "description": (
            f"Description: {topic.description}\n"
            if ctx.include_description and topic.description else ""
        ),
        "narrative": (
            f"Narrative: {topic.narrative}\n"
            if ctx.include_narrative and topic.narrative else ""
        ),
    }


def _summary_fields(state: KnowledgeState | None, kind: UserKind) -> dict[str, str]:
    want_rel, want_irr = SUMMARY_SIDES[kind]
    rel = irr = ""
    if state is not None:
        if want_rel and state.relevant_summary:
            rel = ("Summary of the results you previously judged relevant:\n"
                   f"{state.relevant_summary}\n")
        if want_irr and state.irrelevant_summary:
            irr = ("Summary of the results you previously judged irrelevant:\n"
                   f"{state.irrelevant_summary}\n")
    return {"relevant_summary": rel, "irrelevant_summary": irr}


def _messages(persona: Persona, templates: PromptTemplates, name: str,
              values: dict[str, str]) -> tuple[ChatMessage, ChatMessage]:
    system = templates.render("system", role_name=persona.role_name,
                              instruction_preamble=persona.instruction_preamble)
    return (ChatMessage("system", system.strip()),
            ChatMessage("user", templates.render(name, **values)))


def build_initial_queries_prompt(topic: Topic, kind: UserKind, n_queries: int, *,
                                 templates: PromptTemplates | None = None,
                                 persona: Persona | None = None) -> tuple[ChatMessage, ...]:
    templates = templates or default_templates()
    persona = persona or Persona()
    values = _topic_fields(topic, TOPIC_CONTEXT[kind])
    values["n_queries"] = str(n_queries)
    return _messages(persona, templates, "initial_queries", values)


def build_judge_prompt(topic: Topic, kind: UserKind, state: KnowledgeState | None,
                       document_text: str, *,
                       templates: PromptTemplates | None = None,
                       persona: Persona | None = None) -> tuple[ChatMessage, ...]:
    templates = templates or default_templates()
    persona = persona or Persona()
    values = _topic_fields(topic, TOPIC_CONTEXT[kind])
    values.update(_summary_fields(state, kind))
    values["document"] = document_text
    return _messages(persona, templates, "judge", values)


def build_followup_prompt(topic: Topic, kind: UserKind, state: KnowledgeState,
                          past_queries: list[str], *,
                          templates: PromptTemplates | None = None,
                          persona: Persona | None = None) -> tuple[ChatMessage, ...]:
    templates = templates or default_templates()
    persona = persona or Persona()
    values = _topic_fields(topic, TOPIC_CONTEXT[kind])
    values.update(_summary_fields(state, kind))
    values["past_queries"] = "\n".join(f"{i}. {q}" for i, q in enumerate(past_queries, 1))
    return _messages(persona, templates, "followup_query", values)


def build_summarize_prompt(texts: list[str], relevant: bool, *, max_words: int = 200,
                           templates: PromptTemplates | None = None,
                           persona: Persona | None = None) -> tuple[ChatMessage, ...]:
    templates = templates or default_templates()
    persona = persona or Persona()
    blocks = "\n\n".join(f"Article {i}:\n{t}" for i, t in enumerate(texts, 1))
    values = {
        "polarity": "relevant" if relevant else "irrelevant",
        "max_words": str(max_words),
        "documents": blocks,
    }
    return _messages(persona, templates, "summarize", values)


# --- reply parsing --------------------------------------------------------------

_LINE_PREFIX_RE = re.compile(r"^\s*(?:\d+\s*[\.\):-]\s*|[-*•]\s*)?")


def _clean_query_line(line: str) -> str:
    return _LINE_PREFIX_RE.sub("", line).strip().strip('"“”').strip()


def parse_query_list(text: str) -> list[str]:
    """Numbered or bulleted lines to a deduplicated list of query strings."""
    queries: list[str] = []
    for raw in text.splitlines():
        q = _clean_query_line(raw)
        if q and q not in queries:
            queries.append(q)
    return queries


_YES_TOKENS = frozenset({"yes", "y", "relevant", "useful"})
_NO_TOKENS = frozenset({"no", "n", "irrelevant", "not"})


def parse_yes_no(text: str) -> bool | None:
    """Case-insensitive yes/no extraction; None when neither can be read."""
    tokens = re.findall(r"[a-z]+", text.lower())
    if not tokens:
        return None
    if tokens[0] in _YES_TOKENS:
        return True
    if tokens[0] in _NO_TOKENS:
        return False
    token_set = set(tokens)
    if "irrelevant" in token_set or ("not" in token_set and "relevant" in token_set):
        return False
    if "yes" in token_set and "no" not in token_set:
        return True
    if "no" in token_set and "yes" not in token_set:
        return False
    if "relevant" in token_set:
        return True
    return None


# --- operations -----------------------------------------------------------------

def generate_initial_queries(backend, topic: Topic, kind: UserKind, *,
                             n_queries: int = 10,
                             templates: PromptTemplates | None = None,
                             persona: Persona | None = None,
                             on_anomaly: AnomalySink | None = None) -> list[str]:
    """One up-front LLM call producing the session's query list.

    Feedback users start from the same kind of list as FTTC; only the amount
    of topic context in the prompt differs (per TOPIC_CONTEXT).
    """
    if kind not in LLM_KINDS:
        raise ValueError(f"{kind.value} does not generate queries with the LLM")
    temperature, seed = default_params(TAG_QUERY_GENERATION)
    messages = build_initial_queries_prompt(topic, kind, n_queries,
                                            templates=templates, persona=persona)
    request = ChatRequest(messages, temperature=temperature, seed=seed,
                          tag=TAG_QUERY_GENERATION)
    reply = backend.complete(request)
    queries = parse_query_list(reply.text)[:n_queries]
    if len(queries) < n_queries:
        stricter = messages[-1].content + (
            f"\nReturn exactly {n_queries} numbered queries and nothing else."
        )
        retry = ChatRequest(messages[:-1] + (ChatMessage("user", stricter),),
                            temperature=temperature, seed=seed, tag=TAG_QUERY_GENERATION)
        queries = parse_query_list(backend.complete(retry).text)[:n_queries]
    if not queries:
        raise QueryGenerationError(
            f"no queries could be parsed from the backend reply for topic {topic.topic_id}")
    if len(queries) < n_queries and on_anomaly:
        on_anomaly(f"initial query list has {len(queries)} of {n_queries} requested queries")
    return queries


def generate_query_naive(topic: Topic, rng, *, n_terms: int = 3,
                         stopwords: frozenset[str] = ENGLISH_STOPWORDS,
                         on_anomaly: AnomalySink | None = None) -> str:
    """Sample distinct terms uniformly from the topic's vocabulary.

    The vocabulary is the alphabetically sorted set of non-stopword tokens in
    the topic's title, description, and narrative. Draw order: repeated
    uniform index picks over the remaining sorted vocabulary (without
    replacement), so a fixed rng seed reproduces the query exactly. When the
    vocabulary has fewer than n_terms entries the sampling falls back to
    drawing with replacement and reports a warning.
    """
    vocabulary = sorted(set(tokenize(topic.all_text(), stopwords=stopwords)))
    if not vocabulary:
        vocabulary = sorted(set(tokenize(topic.all_text())))
    if not vocabulary:
        raise ValueError(f"topic {topic.topic_id} has no usable vocabulary")
    if len(vocabulary) >= n_terms:
        remaining = list(vocabulary)
        picks = [remaining.pop(rng.randrange(len(remaining))) for _ in range(n_terms)]
    else:
        message = (f"topic {topic.topic_id} vocabulary has {len(vocabulary)} < "
                   f"{n_terms} terms; sampling with replacement")
        logger.warning(message)
        if on_anomaly:
            on_anomaly(message)
        picks = [vocabulary[rng.randrange(len(vocabulary))] for _ in range(n_terms)]
    return " ".join(picks)


def decide_relevance_random(rng, p: float = 0.5) -> bool:
    """Bernoulli(p) relevance decision, shared by RND and RND_STAR."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    return rng.random() < p


def decide_relevance_llm(backend, topic: Topic, kind: UserKind,
                         state: KnowledgeState | None, document_text: str, *,
                         templates: PromptTemplates | None = None,
                         persona: Persona | None = None,
                         on_anomaly: AnomalySink | None = None) -> bool:
    """Binary LLM judgment of a text at temperature 0.

    An unreadable reply is retried once, then treated as not relevant with a
    reported anomaly.
    """
    if kind in RANDOM_KINDS:
        raise ValueError(f"{kind.value} decides relevance randomly, not via the LLM")
    temperature, seed = default_params(TAG_RELEVANCE_JUDGMENT)
    messages = build_judge_prompt(topic, kind, state, document_text,
                                  templates=templates, persona=persona)
    request = ChatRequest(messages, temperature=temperature, seed=seed,
                          tag=TAG_RELEVANCE_JUDGMENT)
    for attempt in range(2):
        verdict = parse_yes_no(backend.complete(request).text)
        if verdict is not None:
            return verdict
    if on_anomaly:
        on_anomaly("judgment reply matched neither yes nor no twice; treating as not relevant")
    return False


def update_knowledge_state(backend, state: KnowledgeState, document: Document,
                           relevant: bool, *,
                           templates: PromptTemplates | None = None,
                           persona: Persona | None = None,
                           max_words: int = 200,
                           on_anomaly: AnomalySink | None = None) -> KnowledgeState:
    """Absorb a fresh judgment and regenerate that side's summary.

    The summary is rebuilt from scratch over all documents judged on the same
    side so far. If the summarization call fails, the previous summary is
    kept and the failure reported; the judgment itself is never rolled back.
    """
    state.record(document.doc_id, document.full_text(), relevant)
    texts = state.texts_for(relevant)
    temperature, seed = default_params(TAG_SUMMARIZATION)
    messages = build_summarize_prompt(texts, relevant, max_words=max_words,
                                      templates=templates, persona=persona)
    request = ChatRequest(messages, temperature=temperature, seed=seed,
                          tag=TAG_SUMMARIZATION)
    try:
        summary = backend.complete(request).text.strip()
    except Exception as exc:  # backend failure must not lose the judgment
        message = f"summarization failed, keeping previous summary: {exc}"
        logger.warning(message)
        if on_anomaly:
            on_anomaly(message)
        return state
    if relevant:
        state.relevant_summary = summary
    else:
        state.irrelevant_summary = summary
    return state


def generate_followup_query(backend, topic: Topic, kind: UserKind,
                            state: KnowledgeState, past_queries: list[str], *,
                            templates: PromptTemplates | None = None,
                            persona: Persona | None = None,
                            on_anomaly: AnomalySink | None = None) -> str:
    """One new query informed by the kind's summaries, at temperature 1.0.

    A reply duplicating a past query is retried once and then accepted with a
    reported anomaly.
    """
    if kind not in FEEDBACK_KINDS:
        raise ValueError(f"{kind.value} never reformulates queries")
    if not state.judged:
        raise ValueError("no judgments yet; the pre-generated queries still apply")
    temperature, seed = default_params(TAG_QUERY_GENERATION)
    messages = build_followup_prompt(topic, kind, state, past_queries,
                                     templates=templates, persona=persona)
    request = ChatRequest(messages, temperature=temperature, seed=seed,
                          tag=TAG_FOLLOWUP_QUERY)
    query = ""
    for attempt in range(2):
        lines = parse_query_list(backend.complete(request).text)
        query = lines[0] if lines else ""
        if query and query not in past_queries:
            return query
        if attempt == 0:
            stricter = messages[-1].content + "\nDo not repeat any earlier query."
            request = ChatRequest(messages[:-1] + (ChatMessage("user", stricter),),
                                  temperature=temperature, seed=seed,
                                  tag=TAG_FOLLOWUP_QUERY)
    if not query:
        raise QueryGenerationError(
            f"no follow-up query could be parsed for topic {topic.topic_id}")
    if on_anomaly:
        on_anomaly(f"follow-up query duplicates a past query: {query!r}")
    return query


def queries_for_rnd_star(fttc_queries: list[str]) -> list[str]:
    """RND_STAR reuses FTTC's generated query list for the same topic, in order."""
    if not fttc_queries:
        raise ValueError("RND_STAR needs the FTTC query list for this topic")
    return list(fttc_queries)

"""In-memory inverted index with BM25 ranking, result paging, and snippets."""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Document

# Alphanumeric runs, lowercased; underscores and punctuation split tokens.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

ENGLISH_STOPWORDS = frozenset(
    """a about after all also an and any are as at be because been before but by can
    could did do does for from had has have he her his how i if in into is it its
    just may more most new no not of on one only or other our out over she should
    so some such than that the their them then there these they this to up was we
    were what when which while who will with would you your""".split()
)

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75


class IndexBuildError(ValueError):
    pass


class IndexFormatError(ValueError):
    pass


def _s_stem(token: str) -> str:
    # Basic plural folding (s-stemmer); not a full morphological stemmer.
    if len(token) > 4 and token.endswith("ies"):
        return token[:-3] + "y"
    if len(token) > 3 and token.endswith("es") and not token.endswith(("ses", "oes")):
        return token[:-1]
    if len(token) > 3 and token.endswith("s") and not token.endswith(("ss", "us", "is")):
        return token[:-1]
    return token


def tokenize(text: str, stopwords: frozenset[str] | None = None, stem: bool = False) -> list[str]:
    """Lowercase and split on any non-alphanumeric character; drop empty tokens.

    An optional stopword list is applied before stemming.
    """
    tokens = _TOKEN_RE.findall(text.lower())
    if stopwords:
        tokens = [t for t in tokens if t not in stopwords]
    if stem:
        tokens = [_s_stem(t) for t in tokens]
    return tokens


@dataclass
class InvertedIndex:
    postings: dict[str, list[tuple[int, int]]]  # term -> [(doc_ordinal, tf)], ordinals ascending
    doc_lengths: list[int]
    doc_ids: list[str]
    n_docs: int
    avg_doc_len: float
    documents: list[Document]
    stopwords: frozenset[str] | None = None
    stem: bool = False
    _by_id: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._by_id:
            self._by_id = {doc_id: i for i, doc_id in enumerate(self.doc_ids)}

    def df(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    @property
    def vocabulary_size(self) -> int:
        return len(self.postings)

    def document(self, doc_id: str) -> Document:
        return self.documents[self._by_id[doc_id]]

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._by_id


@dataclass
class Serp:
    """One result page: ranked (rank, doc_id, score) rows with aligned snippets."""

    query: str
    page: int
    results: list[tuple[int, str, float]]
    snippets: list[str]

    def __len__(self) -> int:
        return len(self.results)


def build_index(documents: list[Document], *, stopwords: frozenset[str] | None = None,
                stem: bool = False) -> InvertedIndex:
    """Build an inverted index; title tokens are folded into the body stream."""
    postings: dict[str, list[tuple[int, int]]] = {}
    doc_lengths: list[int] = []
    doc_ids: list[str] = []
    seen: set[str] = set()
    for ordinal, doc in enumerate(documents):
        if doc.doc_id in seen:
            raise IndexBuildError(f"duplicate doc_id {doc.doc_id!r}")
        seen.add(doc.doc_id)
        doc_ids.append(doc.doc_id)
        tokens = tokenize(doc.title or "", stopwords, stem) + tokenize(doc.body, stopwords, stem)
        doc_lengths.append(len(tokens))
        counts: dict[str, int] = {}
        for t in tokens:
            counts[t] = counts.get(t, 0) + 1
        for term in sorted(counts):
            postings.setdefault(term, []).append((ordinal, counts[term]))
    n_docs = len(doc_lengths)
    avg = sum(doc_lengths) / n_docs if n_docs else 0.0
    return InvertedIndex(postings=postings, doc_lengths=doc_lengths, doc_ids=doc_ids,
                         n_docs=n_docs, avg_doc_len=avg, documents=list(documents),
                         stopwords=stopwords, stem=stem)


def bm25_score(tf: int, df: int, doc_len: int, avg_doc_len: float, n_docs: int,
               k1: float = DEFAULT_K1, b: float = DEFAULT_B) -> float:
    """One term's BM25 contribution with the +1-smoothed idf:

        idf = ln((n_docs - df + 0.5) / (df + 0.5) + 1)
        score = idf * tf*(k1+1) / (tf + k1*(1 - b + b*doc_len/avg_doc_len))

    Non-negative for all valid inputs.
    """
    if tf < 0 or doc_len < 0:
        raise ValueError("tf and doc_len must be non-negative")
    if df < 1 or n_docs < df:
        raise ValueError("df must satisfy 1 <= df <= n_docs")
    if tf == 0:
        return 0.0
    if avg_doc_len == 0 and doc_len > 0:
        raise ValueError("avg_doc_len is 0 but doc_len > 0")
    ratio = doc_len / avg_doc_len if avg_doc_len > 0 else 0.0
    idf = math.log((n_docs - df + 0.5) / (df + 0.5) + 1.0)
    return idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * ratio))


def search(index: InvertedIndex, query: str, page: int = 1, page_size: int = 10, *,
           k1: float = DEFAULT_K1, b: float = DEFAULT_B,
           snippet_max_chars: int = 160) -> Serp:
    """Score the query against the index and return one page of results.

    Each document's score sums bm25_score over the query's tokens (duplicates
    in the query count again). Ties break by doc_id ascending so results are
    reproducible. A query with no indexed terms yields an empty page.
    """
    if page < 1 or page_size < 1:
        raise ValueError("page and page_size must be >= 1")
    scores: dict[int, float] = {}
    for term in tokenize(query, index.stopwords, index.stem):
        plist = index.postings.get(term)
        if not plist:
            continue
        df = len(plist)
        for ordinal, tf in plist:
            contribution = bm25_score(tf, df, index.doc_lengths[ordinal],
                                      index.avg_doc_len, index.n_docs, k1, b)
            scores[ordinal] = scores.get(ordinal, 0.0) + contribution
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], index.doc_ids[kv[0]]))
    start = (page - 1) * page_size
    rows = ranked[start:start + page_size]
    results = [(start + i + 1, index.doc_ids[ordinal], score)
               for i, (ordinal, score) in enumerate(rows)]
    snippets = [make_snippet(index.documents[ordinal], query, snippet_max_chars)
                for ordinal, _ in rows]
    return Serp(query=query, page=page, results=results, snippets=snippets)


def make_snippet(document: Document, query: str, max_chars: int = 160) -> str:
    """Query-biased extract: the first body window containing a query term,
    expanded to word boundaries; falls back to the leading characters.

    The result is at most max_chars plus one ellipsis character.
    """
    if max_chars < 16:
        raise ValueError("max_chars must be >= 16")
    body = document.body
    if len(body) <= max_chars:
        return body.strip()
    qterms = set(tokenize(query))
    match_start = match_end = -1
    if qterms:
        for m in _TOKEN_RE.finditer(body):
            if m.group(0).lower() in qterms:
                match_start, match_end = m.start(), m.end()
                break
    if match_start < 0:
        match_start = match_end = 0
    a = max(0, match_start - max_chars // 3)
    if a > 0:
        space = body.find(" ", a, match_start)
        if space >= 0:
            a = space + 1
    end = min(len(body), a + max_chars)
    if end < len(body):
        space = body.rfind(" ", max(a + 1, match_end), end)
        if space > match_end:
            end = space
    snippet = body[a:end].strip()
    if end < len(body):
        snippet += "…"
    return snippet


# --- on-disk form -------------------------------------------------------------

_FORMAT_NAME = "searchsim.index"
_FORMAT_VERSION = 1


def index_to_bytes(index: InvertedIndex) -> bytes:
    payload = {
        "format": _FORMAT_NAME,
        "version": _FORMAT_VERSION,
        "stopwords": sorted(index.stopwords) if index.stopwords else None,
        "stem": index.stem,
        "doc_ids": index.doc_ids,
        "doc_lengths": index.doc_lengths,
        "n_docs": index.n_docs,
        "avg_doc_len": index.avg_doc_len,
        "postings": {t: [[o, tf] for o, tf in plist] for t, plist in index.postings.items()},
        "documents": [
            {"doc_id": d.doc_id, "title": d.title, "body": d.body, "source": d.source}
            for d in index.documents
        ],
    }
    return json.dumps(payload, sort_keys=True, ensure_ascii=False,
                      separators=(",", ":")).encode("utf-8")


def index_from_bytes(data: bytes) -> InvertedIndex:
    try:
        payload = json.loads(data.decode("utf-8"))
    except ValueError as exc:
        raise IndexFormatError(f"not an index file: {exc}") from exc
    if payload.get("format") != _FORMAT_NAME:
        raise IndexFormatError("unrecognized index format")
    if payload.get("version") != _FORMAT_VERSION:
        raise IndexFormatError(f"unsupported index version {payload.get('version')}")
    documents = [Document(doc_id=d["doc_id"], title=d["title"], body=d["body"],
                          source=d["source"]) for d in payload["documents"]]
    stopwords = payload["stopwords"]
    return InvertedIndex(
        postings={t: [(o, tf) for o, tf in plist] for t, plist in payload["postings"].items()},
        doc_lengths=list(payload["doc_lengths"]),
        doc_ids=list(payload["doc_ids"]),
        n_docs=payload["n_docs"],
        avg_doc_len=payload["avg_doc_len"],
        documents=documents,
        stopwords=frozenset(stopwords) if stopwords else None,
        stem=bool(payload["stem"]),
    )


def save_index(index: InvertedIndex, path: str | Path) -> None:
    Path(path).write_bytes(index_to_bytes(index))


def load_index(path: str | Path) -> InvertedIndex:
    return index_from_bytes(Path(path).read_bytes())

"""Parsers for TREC-style test collections: documents, topics, and qrels.

All parsers read raw bytes (UTF-8 decoded with lossy replacement) and run in
lenient mode by default: malformed units are skipped and counted instead of
aborting. Pass ``strict=True`` to abort on the first malformed unit.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Mapping

# Document.source values
TRECTEXT = "trectext"
JSONL = "jsonl"
SYNTHETIC = "synthetic"
SOURCES = (TRECTEXT, JSONL, SYNTHETIC)

# Default key mapping for line-delimited corpora: ours -> record key.
DEFAULT_FIELD_MAP: Mapping[str, str] = {"id": "id", "title": "title", "body": "body"}


class ParseError(ValueError):
    """Malformed input. Carries the byte offset or line number when known."""

    def __init__(self, message: str, *, offset: int | None = None, line: int | None = None):
        where = []
        if offset is not None:
            where.append(f"byte offset {offset}")
        if line is not None:
            where.append(f"line {line}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)
        self.offset = offset
        self.line = line


@dataclass
class ParseReport:
    """Counters filled in by the parsers when running in lenient mode."""

    skipped: int = 0
    warnings: int = 0
    messages: list[str] = field(default_factory=list)

    _MAX_MESSAGES = 20

    def note(self, message: str) -> None:
        if len(self.messages) < self._MAX_MESSAGES:
            self.messages.append(message)


@dataclass(frozen=True)
class Document:
    doc_id: str
    body: str
    title: str | None = None
    source: str = SYNTHETIC

    def __post_init__(self):
        if not self.doc_id or not self.doc_id.strip():
            raise ValueError("doc_id must be non-empty")
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")

    def full_text(self) -> str:
        """Title and body joined, as presented to a reader."""
        return f"{self.title}\n{self.body}" if self.title else self.body


@dataclass(frozen=True)
class Topic:
    topic_id: str
    title: str
    description: str | None = None
    narrative: str | None = None

    def __post_init__(self):
        if not self.title or not self.title.strip():
            raise ValueError(f"topic {self.topic_id!r} has an empty title")

    def all_text(self) -> str:
        parts = [self.title, self.description or "", self.narrative or ""]
        return " ".join(p for p in parts if p)


@dataclass
class QrelSet:
    """Graded relevance judgments keyed by (topic_id, doc_id).

    A missing key means the pair was never judged, which is distinct
    from an explicit grade of 0.
    """

    grades: dict[tuple[str, str], int] = field(default_factory=dict)

    def grade(self, topic_id: str, doc_id: str) -> int | None:
        return self.grades.get((topic_id, doc_id))

    def for_topic(self, topic_id: str) -> dict[str, int]:
        return {d: g for (t, d), g in self.grades.items() if t == topic_id}

    def __len__(self) -> int:
        return len(self.grades)


def _norm_ws(text: str) -> str:
    """Collapse whitespace runs to single spaces and strip the ends (idempotent)."""
    return " ".join(text.split())


def _decode(data: bytes) -> str:
    return data.decode("utf-8", errors="replace")


# --- TRECTEXT corpora -------------------------------------------------------

_DOC_RE = re.compile(rb"<DOC>(.*?)</DOC>", re.S | re.I)
_DOCNO_RE = re.compile(rb"<DOCNO>(.*?)</DOCNO>", re.S | re.I)
_TAG_STRIP_RE = re.compile(r"<[^>]+>")

# HEADLINE/TITLE feed Document.title; the rest feed the body. The title tags
# are kept out of the body so downstream title folding does not double-count.
_TITLE_TAGS = ("HEADLINE", "TITLE")
_BODY_TAGS = ("TEXT", "LEADPARA", "SUMMARY", "ABSTRACT")
_TITLE_TAG_RE = re.compile(
    rb"<(HEADLINE|TITLE)>(.*?)</\1>", re.S | re.I
)
_BODY_TAG_RE = re.compile(
    rb"<(TEXT|LEADPARA|SUMMARY|ABSTRACT)>(.*?)</\1>", re.S | re.I
)


def _clean_sgml_chunk(raw: bytes) -> str:
    text = _TAG_STRIP_RE.sub(" ", _decode(raw))
    return text.strip()


def parse_trectext(data: bytes, *, strict: bool = False,
                   report: ParseReport | None = None) -> list[Document]:
    """Parse an SGML-style corpus of ``<DOC>`` blocks into Documents.

    The body is the concatenation of the text-bearing tags in document
    order; HEADLINE/TITLE content becomes the separate title field.
    """
    report = report if report is not None else ParseReport()
    docs: list[Document] = []
    for block in _DOC_RE.finditer(data):
        offset = block.start()
        inner = block.group(1)
        m = _DOCNO_RE.search(inner)
        doc_id = _decode(m.group(1)).strip() if m else ""
        if not doc_id:
            if strict:
                raise ParseError("DOC block without a DOCNO", offset=offset)
            report.skipped += 1
            report.note(f"skipped DOC block without DOCNO at byte offset {offset}")
            continue
        title_parts = [_clean_sgml_chunk(t.group(2)) for t in _TITLE_TAG_RE.finditer(inner)]
        body_parts = [_clean_sgml_chunk(t.group(2)) for t in _BODY_TAG_RE.finditer(inner)]
        title = _norm_ws(" ".join(p for p in title_parts if p)) or None
        body = "\n\n".join(p for p in body_parts if p)
        docs.append(Document(doc_id=doc_id, title=title, body=body, source=TRECTEXT))
    return docs


# --- line-delimited corpora -------------------------------------------------

def parse_jsonl_corpus(data: bytes, field_map: Mapping[str, str] | None = None, *,
                       strict: bool = False,
                       report: ParseReport | None = None) -> list[Document]:
    """Parse a corpus of one JSON record per line.

    ``field_map`` names the record keys for our fields: ``{"id": ..., "title":
    ..., "body": ...}``. A record without the title key yields title=None; a
    record without the body key yields an empty body in lenient mode.
    """
    fmap = dict(DEFAULT_FIELD_MAP)
    fmap.update(field_map or {})
    report = report if report is not None else ParseReport()
    docs: list[Document] = []
    for lineno, raw in enumerate(_decode(data).splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
            if not isinstance(record, dict):
                raise ValueError("record is not an object")
            doc_id = str(record[fmap["id"]]).strip()
            if not doc_id:
                raise ValueError("empty id")
        except (ValueError, KeyError) as exc:
            if strict:
                raise ParseError(f"unparseable record: {exc}", line=lineno) from exc
            report.skipped += 1
            report.note(f"skipped line {lineno}: {exc}")
            continue
        body = record.get(fmap["body"])
        if body is None:
            if strict:
                raise ParseError("record without a body", line=lineno)
            body = ""
        title = record.get(fmap["title"])
        docs.append(Document(doc_id=doc_id, title=None if title is None else str(title),
                             body=str(body), source=JSONL))
    return docs


# --- topic files -------------------------------------------------------------

_TOP_RE = re.compile(r"<top>(.*?)</top>", re.S | re.I)
_SECTION_RE = re.compile(r"<(num|title|desc|narr)>", re.I)
_SECTION_CLOSE_RE = re.compile(r"</(num|title|desc|narr)>", re.I)
_LABELS = {
    "num": ("number:",),
    "title": ("topic:",),
    "desc": ("description:",),
    "narr": ("narrative:",),
}


def _strip_label(name: str, text: str) -> str:
    for label in _LABELS.get(name, ()):
        if text.lower().startswith(label):
            return text[len(label):]
    return text


def parse_topics(data: bytes, *, strict: bool = False,
                 report: ParseReport | None = None) -> list[Topic]:
    """Parse ``<top>`` blocks with num/title/desc/narr sections.

    Sections may be left unclosed (the de-facto convention); each runs to the
    next section tag. Leading labels such as "Number:" are stripped
    case-insensitively and whitespace is normalized.
    """
    report = report if report is not None else ParseReport()
    topics: list[Topic] = []
    for block in _TOP_RE.finditer(_decode(data)):
        inner = block.group(1)
        marks = list(_SECTION_RE.finditer(inner))
        sections: dict[str, str] = {}
        for i, m in enumerate(marks):
            end = marks[i + 1].start() if i + 1 < len(marks) else len(inner)
            name = m.group(1).lower()
            raw = _SECTION_CLOSE_RE.sub(" ", inner[m.end():end])
            sections[name] = _norm_ws(_strip_label(name, raw.strip()))
        topic_id = sections.get("num", "")
        title = sections.get("title", "")
        if not title:
            if strict:
                raise ParseError(f"topic {topic_id or '<unnumbered>'} has no title")
            report.skipped += 1
            report.note(f"skipped topic {topic_id or '<unnumbered>'}: no title")
            continue
        topics.append(Topic(topic_id=topic_id, title=title,
                            description=sections.get("desc") or None,
                            narrative=sections.get("narr") or None))
    return topics


# --- qrels -------------------------------------------------------------------

def parse_qrels(data: bytes, *, strict: bool = False,
                report: ParseReport | None = None) -> QrelSet:
    """Parse 4-column qrels lines: ``topic_id iteration doc_id grade``.

    Duplicate (topic_id, doc_id) keys are overwritten last-wins with a
    counted warning.
    """
    report = report if report is not None else ParseReport()
    qrels = QrelSet()
    for lineno, raw in enumerate(_decode(data).splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        try:
            if len(parts) != 4:
                raise ValueError(f"expected 4 columns, got {len(parts)}")
            topic_id, _iteration, doc_id, grade_text = parts
            grade = int(grade_text)
            if grade < 0:
                raise ValueError(f"negative grade {grade}")
        except ValueError as exc:
            if strict:
                raise ParseError(f"bad qrels line: {exc}", line=lineno) from exc
            report.skipped += 1
            report.note(f"skipped qrels line {lineno}: {exc}")
            continue
        key = (topic_id, doc_id)
        if key in qrels.grades:
            report.warnings += 1
            report.note(f"duplicate qrels key {key} at line {lineno}; last value wins")
        qrels.grades[key] = grade
    return qrels


# --- canonical document serialization ----------------------------------------

def dumps_canonical(documents: list[Document]) -> bytes:
    """Serialize documents to the canonical line-delimited form."""
    lines = [
        json.dumps(
            {"doc_id": d.doc_id, "title": d.title, "body": d.body, "source": d.source},
            sort_keys=True, ensure_ascii=False, separators=(",", ":"),
        )
        for d in documents
    ]
    return ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8")


def loads_canonical(data: bytes) -> list[Document]:
    docs = []
    for lineno, line in enumerate(_decode(data).splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            docs.append(Document(doc_id=record["doc_id"], title=record["title"],
                                 body=record["body"], source=record["source"]))
        except (ValueError, KeyError) as exc:
            raise ParseError(f"bad canonical record: {exc}", line=lineno) from exc
    return docs

"""Paths to the bundled synthetic test collection (3 topics, 60 documents,
graded qrels with deliberately unjudged on-topic documents)."""
from __future__ import annotations

from importlib import resources
from pathlib import Path

CORPUS = "corpus.trectext"
TOPICS = "topics.txt"
QRELS = "qrels.txt"
CAMPAIGN = "campaign.json"
REPLIES = "replies.tsv"


def fixture_path(name: str = "") -> Path:
    root = resources.files(__package__) / "fixture_data"
    return Path(str(root / name if name else root))


def load_fixture_collection():
    """Parsed (documents, topics, qrels) for the bundled collection."""
    from .corpus import parse_qrels, parse_topics, parse_trectext

    documents = parse_trectext(fixture_path(CORPUS).read_bytes())
    topics = parse_topics(fixture_path(TOPICS).read_bytes())
    qrels = parse_qrels(fixture_path(QRELS).read_bytes())
    return documents, topics, qrels

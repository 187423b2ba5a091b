"""Session evaluation: effort/effect information-gain curves and session DCG.

Information gain charges every logged interaction's cost to the effort axis
and credits the document's recorded relevance grade whenever the user judged
it relevant and the assessors had graded it above zero; session DCG discounts
each query's DCG by the query's position in the session.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import QrelSet
from .session import (
    JUDGMENT_MADE,
    QUERY_ISSUED,
    SNIPPET_VIEWED,
    SessionLog,
)

SCOPE_JUDGED = "judged"
SCOPE_INSPECTED = "inspected"


class MalformedLogError(ValueError):
    pass


@dataclass
class GainCurve:
    """Cumulative (effort seconds, effect gain) after each interaction."""

    points: list[tuple[float, float]]
    unjudged_relevant_count: int

    @property
    def final_effort(self) -> float:
        return self.points[-1][0] if self.points else 0.0

    @property
    def final_effect(self) -> float:
        return self.points[-1][1] if self.points else 0.0


@dataclass
class SdcgCurve:
    """Cumulative session DCG after each query position (1-based)."""

    points: list[tuple[int, float]]
    b: float
    bq: float

    @property
    def final_value(self) -> float:
        return self.points[-1][1] if self.points else 0.0


def _gain_of(grade: int | None, binarize: bool) -> float:
    if grade is None or grade <= 0:
        return 0.0
    return 1.0 if binarize else float(grade)


def information_gain_curve(log: SessionLog, *, binarize: bool = False) -> GainCurve:
    """Walk the log in order, accumulating cost as effort and grades as effect.

    A judgment only contributes when the user called the document relevant
    and its recorded assessor grade is present and positive. Relevant
    judgments of unjudged documents contribute nothing and are counted
    separately.
    """
    points: list[tuple[float, float]] = []
    effort = 0.0
    effect = 0.0
    unjudged_relevant = 0
    for it in log.interactions:
        effort += it.cost
        if it.kind == JUDGMENT_MADE:
            if "grade" not in it.payload:
                raise MalformedLogError(
                    f"judgment at seq {it.seq} has no recorded grade field")
            if it.payload.get("relevant"):
                grade = it.payload["grade"]
                if grade is None:
                    unjudged_relevant += 1
                else:
                    effect += _gain_of(grade, binarize)
        points.append((effort, effect))
    return GainCurve(points=points, unjudged_relevant_count=unjudged_relevant)


def _dcg(gains: Sequence[float], b: float) -> float:
    total = 0.0
    for i, gain in enumerate(gains, start=1):
        divisor = 1.0 if i < b else math.log(i, b)
        total += gain / divisor
    return total


def sdcg_curve(log: SessionLog, b: float = 2.0, bq: float = 4.0, *,
               scope: str = SCOPE_JUDGED, qrels: QrelSet | None = None,
               binarize: bool = False) -> SdcgCurve:
    """Per-query DCG discounted by 1/(1 + log_bq q), accumulated over queries.

    Within a query, rank i's divisor is 1 for i < b and log_b(i) otherwise.
    ``scope="judged"`` ranks the documents the user opened and judged under
    each query, using the grades recorded in the log; ``scope="inspected"``
    ranks every snippet the user viewed, taking grades from ``qrels`` (or the
    recorded judgment when present). Unjudged documents gain 0 either way.
    """
    if b < 2 or bq < 2:
        raise ValueError("b and bq must be >= 2")
    if scope not in (SCOPE_JUDGED, SCOPE_INSPECTED):
        raise ValueError(f"unknown scope {scope!r}")

    per_query: list[list[float]] = []
    recorded: dict[str, int | None] = {}
    if scope == SCOPE_INSPECTED:
        for it in log.interactions:
            if it.kind == JUDGMENT_MADE:
                recorded[it.payload["doc_id"]] = it.payload.get("grade")

    for it in log.interactions:
        if it.kind == QUERY_ISSUED:
            per_query.append([])
            continue
        if scope == SCOPE_JUDGED and it.kind == JUDGMENT_MADE:
            if not per_query:
                raise MalformedLogError(f"judgment at seq {it.seq} precedes any query")
            if "grade" not in it.payload:
                raise MalformedLogError(
                    f"judgment at seq {it.seq} has no recorded grade field")
            per_query[-1].append(_gain_of(it.payload["grade"], binarize))
        elif scope == SCOPE_INSPECTED and it.kind == SNIPPET_VIEWED:
            if not per_query:
                raise MalformedLogError(f"snippet view at seq {it.seq} precedes any query")
            doc_id = it.payload["doc_id"]
            if doc_id in recorded:
                grade = recorded[doc_id]
            elif qrels is not None:
                grade = qrels.grade(log.topic_id, doc_id)
            else:
                grade = None
            per_query[-1].append(_gain_of(grade, binarize))

    points: list[tuple[int, float]] = []
    cumulative = 0.0
    for q, gains in enumerate(per_query, start=1):
        discount = 1.0 / (1.0 + math.log(q, bq))
        cumulative += discount * _dcg(gains, b)
        points.append((q, cumulative))
    return SdcgCurve(points=points, b=b, bq=bq)


# --- aggregation -----------------------------------------------------------------

Points = Sequence[tuple[float, float]]


def _as_points(curve) -> Points:
    return curve.points if hasattr(curve, "points") else curve


def step_value(points: Points, x: float) -> float:
    """Last value at or before x (0 before the first point)."""
    value = 0.0
    for px, py in points:
        if px > x:
            break
        value = py
    return value


def aggregate_curves(curves: Sequence, x_grid: Sequence[float] | None = None
                     ) -> list[tuple[float, float, int]]:
    """Mean curve over sessions: step-interpolate each curve onto the grid
    (last value carried forward, 0 before the first point) and average.

    Without an explicit grid, the sorted union of all curves' x values is
    used. Returns (x, mean_y, n) rows.
    """
    if not curves:
        raise ValueError("at least one curve is required")
    point_lists = [_as_points(c) for c in curves]
    if x_grid is None:
        grid = sorted({x for points in point_lists for x, _ in points})
    else:
        grid = list(x_grid)
    n = len(point_lists)
    return [(x, sum(step_value(p, x) for p in point_lists) / n, n) for x in grid]


# --- CSV output ------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: str | Path, rows: Iterable[Sequence], header: Sequence[str]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])

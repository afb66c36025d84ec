"""News-article corpus handling: ingestion, filtering, statistics, splits.

Articles arrive as UTF-8 line-delimited JSON, one object per line with keys
``source``, ``summary``, ``body`` and optional ``url``, ``published_at``
(ISO-8601 date). Summary and body text is whitespace-normalized on ingest,
and all length thresholds below are counted in Unicode code points of the
normalized text, so accented characters count as one character.

The near-copy filter measures the longest common substring (contiguous,
character-level, case-sensitive) between summary and body. The production
matcher is a suffix automaton, linear in the combined text length.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import date
from typing import Iterable, Iterator

import numpy as np

__all__ = [
    "Article",
    "FilterConfig",
    "FilterReport",
    "IngestError",
    "SourceStats",
    "REJECT_REASONS",
    "corpus_stats",
    "filter_article",
    "format_stats_table",
    "ingest",
    "longest_common_substring_len",
    "normalize_whitespace",
    "overlap_ratio",
    "split_validation",
    "to_json_line",
]

_WS_RUN = re.compile(r"\s+")

ARTICLE_KEYS = {"source", "url", "published_at", "summary", "body"}
REQUIRED_KEYS = {"source", "summary", "body"}

REASON_SUMMARY_TOO_SHORT = "summary_too_short"
REASON_BODY_TOO_SHORT = "body_too_short"
REASON_BODY_TO_SUMMARY_RATIO = "body_to_summary_ratio"
REASON_OVERLAP_TOO_HIGH = "overlap_too_high"

#: Rejection reasons in the order the rules are checked.
REJECT_REASONS = (
    REASON_SUMMARY_TOO_SHORT,
    REASON_BODY_TOO_SHORT,
    REASON_BODY_TO_SUMMARY_RATIO,
    REASON_OVERLAP_TOO_HIGH,
)


def normalize_whitespace(text: str) -> str:
    """Collapse whitespace runs to single spaces and trim the ends."""
    return _WS_RUN.sub(" ", text).strip()


@dataclass
class Article:
    """One news document: a summary/body pair plus provenance fields."""

    source: str
    summary: str
    body: str
    url: str | None = None
    published_at: date | None = None


@dataclass
class IngestError:
    """A malformed input line, kept for diagnostics."""

    line_no: int
    message: str


def _article_from_record(record: object) -> Article:
    if not isinstance(record, dict):
        raise ValueError("line is not a JSON object")
    unknown = set(record) - ARTICLE_KEYS
    if unknown:
        raise ValueError(f"unknown keys: {sorted(unknown)}")
    missing = REQUIRED_KEYS - set(record)
    if missing:
        raise ValueError(f"missing keys: {sorted(missing)}")
    for key in ("source", "summary", "body"):
        if not isinstance(record[key], str):
            raise ValueError(f"key {key!r} must be a string")
    summary = normalize_whitespace(record["summary"])
    body = normalize_whitespace(record["body"])
    if not summary:
        raise ValueError("empty summary")
    if not body:
        raise ValueError("empty body")
    url = record.get("url")
    if url is not None and not isinstance(url, str):
        raise ValueError("key 'url' must be a string")
    published_raw = record.get("published_at")
    published: date | None = None
    if published_raw is not None:
        if not isinstance(published_raw, str):
            raise ValueError("key 'published_at' must be an ISO date string")
        try:
            published = date.fromisoformat(published_raw)
        except ValueError as err:
            raise ValueError(f"bad published_at: {err}") from None
    return Article(
        source=record["source"],
        summary=summary,
        body=body,
        url=url,
        published_at=published,
    )


def ingest(path, errors: list[IngestError] | None = None) -> Iterator[Article]:
    """Yield articles from a line-delimited JSON file, in file order.

    Malformed lines do not stop the stream: each one is skipped and, when
    ``errors`` is a list, recorded there with its line number. Blank lines
    are ignored. An unreadable file raises the underlying OSError.
    """
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as err:
                if errors is not None:
                    errors.append(IngestError(line_no, f"invalid JSON: {err}"))
                continue
            try:
                yield _article_from_record(record)
            except ValueError as err:
                if errors is not None:
                    errors.append(IngestError(line_no, str(err)))


def to_json_line(article: Article) -> str:
    """Serialize an article back to its one-line JSON form."""
    record: dict[str, str] = {"source": article.source}
    if article.url is not None:
        record["url"] = article.url
    if article.published_at is not None:
        record["published_at"] = article.published_at.isoformat()
    record["summary"] = article.summary
    record["body"] = article.body
    return json.dumps(record, ensure_ascii=False)


class _SuffixAutomaton:
    """Suffix automaton of a fixed string; answers longest-match scans."""

    __slots__ = ("_next", "_link", "_len")

    def __init__(self, text: str):
        self._next: list[dict[str, int]] = [{}]
        self._link = [-1]
        self._len = [0]
        last = 0
        for ch in text:
            cur = len(self._len)
            self._next.append({})
            self._link.append(-1)
            self._len.append(self._len[last] + 1)
            p = last
            while p != -1 and ch not in self._next[p]:
                self._next[p][ch] = cur
                p = self._link[p]
            if p == -1:
                self._link[cur] = 0
            else:
                q = self._next[p][ch]
                if self._len[p] + 1 == self._len[q]:
                    self._link[cur] = q
                else:
                    clone = len(self._len)
                    self._next.append(dict(self._next[q]))
                    self._link.append(self._link[q])
                    self._len.append(self._len[p] + 1)
                    while p != -1 and self._next[p].get(ch) == q:
                        self._next[p][ch] = clone
                        p = self._link[p]
                    self._link[q] = clone
                    self._link[cur] = clone
            last = cur

    def longest_match_len(self, text: str) -> int:
        """Length of the longest substring of ``text`` the automaton accepts."""
        best = 0
        state = 0
        length = 0
        for ch in text:
            while state and ch not in self._next[state]:
                state = self._link[state]
                length = self._len[state]
            if ch in self._next[state]:
                state = self._next[state][ch]
                length += 1
                if length > best:
                    best = length
            else:
                state = 0
                length = 0
        return best


def longest_common_substring_len(a: str, b: str) -> int:
    """Length of the longest contiguous character run shared by ``a`` and ``b``."""
    if not a or not b:
        return 0
    # build the automaton over the shorter string, stream the longer one
    if len(a) > len(b):
        a, b = b, a
    return _SuffixAutomaton(a).longest_match_len(b)


def overlap_ratio(summary: str, body: str) -> float:
    """Longest common substring length divided by the summary length."""
    if not summary:
        raise ValueError("overlap_ratio undefined for an empty summary")
    return longest_common_substring_len(summary, body) / len(summary)


@dataclass
class FilterConfig:
    """Thresholds for the keep/reject rules, checked in a fixed order.

    Length thresholds are exclusive: a summary is kept only when strictly
    longer than ``min_summary_chars``, same for the body. The overlap
    threshold is exclusive on the keep side: pairs at or above
    ``max_overlap_ratio`` are rejected.
    """

    min_summary_chars: int = 10
    min_body_chars: int = 100
    min_body_to_summary_ratio: float = 2.0
    max_overlap_ratio: float = 0.2

    def __post_init__(self):
        if self.min_summary_chars < 0 or self.min_body_chars < 0:
            raise ValueError("length thresholds must be nonnegative")
        if self.min_body_to_summary_ratio < 0:
            raise ValueError("min_body_to_summary_ratio must be nonnegative")
        if not 0 <= self.max_overlap_ratio <= 1:
            raise ValueError("max_overlap_ratio must lie in [0, 1]")


def filter_article(article: Article, config: FilterConfig) -> str | None:
    """Apply the keep/reject rules; return None to keep, else the reason.

    Rules run in REJECT_REASONS order and the first failure wins, so
    reason counts are deterministic.
    """
    s_len = len(article.summary)
    b_len = len(article.body)
    if s_len <= config.min_summary_chars:
        return REASON_SUMMARY_TOO_SHORT
    if b_len <= config.min_body_chars:
        return REASON_BODY_TOO_SHORT
    if b_len < config.min_body_to_summary_ratio * s_len:
        return REASON_BODY_TO_SUMMARY_RATIO
    if overlap_ratio(article.summary, article.body) >= config.max_overlap_ratio:
        return REASON_OVERLAP_TOO_HIGH
    return None


@dataclass
class SourceStats:
    """Per-source aggregates over kept articles."""

    count: int = 0
    earliest: date | None = None
    latest: date | None = None


@dataclass
class FilterReport:
    """Outcome counts of a filtering pass plus per-source statistics."""

    kept: int = 0
    rejected_by_reason: dict[str, int] = field(
        default_factory=lambda: {reason: 0 for reason in REJECT_REASONS}
    )
    per_source: dict[str, SourceStats] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return self.kept + sum(self.rejected_by_reason.values())

    def as_dict(self) -> dict:
        return {
            "total": self.total,
            "kept": self.kept,
            "rejected_by_reason": dict(self.rejected_by_reason),
            "per_source": {
                source: {
                    "count": stats.count,
                    "earliest": stats.earliest.isoformat() if stats.earliest else None,
                    "latest": stats.latest.isoformat() if stats.latest else None,
                }
                for source, stats in sorted(self.per_source.items())
            },
        }


def corpus_stats(pairs: Iterable[tuple[Article, str | None]]) -> FilterReport:
    """Reduce (article, decision) pairs into a FilterReport.

    The decision is the value returned by :func:`filter_article`. Counters
    are commutative, so the pair stream may arrive in any order.
    """
    report = FilterReport()
    for article, decision in pairs:
        if decision is not None:
            report.rejected_by_reason[decision] = (
                report.rejected_by_reason.get(decision, 0) + 1
            )
            continue
        report.kept += 1
        stats = report.per_source.setdefault(article.source, SourceStats())
        stats.count += 1
        if article.published_at is not None:
            if stats.earliest is None or article.published_at < stats.earliest:
                stats.earliest = article.published_at
            if stats.latest is None or article.published_at > stats.latest:
                stats.latest = article.published_at
    return report


def format_stats_table(report: FilterReport) -> str:
    """Render per-source counts and date ranges as an aligned text table."""
    rows = [("Website", "Article count", "From", "To")]
    for source, stats in sorted(report.per_source.items()):
        rows.append(
            (
                source,
                str(stats.count),
                stats.earliest.isoformat() if stats.earliest else "-",
                stats.latest.isoformat() if stats.latest else "-",
            )
        )
    rows.append(("TOTAL", str(report.kept), "", ""))
    widths = [max(len(row[col]) for row in rows) for col in range(4)]
    lines = []
    for name, count, lo, hi in rows:
        lines.append(
            f"{name:<{widths[0]}}  {count:>{widths[1]}}  {lo:<{widths[2]}}  {hi:<{widths[3]}}".rstrip()
        )
    rejected = Counter(report.rejected_by_reason)
    if sum(rejected.values()):
        lines.append("")
        lines.append("Rejected:")
        for reason in REJECT_REASONS:
            if rejected.get(reason):
                lines.append(f"  {reason}: {rejected[reason]}")
    return "\n".join(lines)


def split_validation(
    articles, n_validation: int, seed: int
) -> tuple[list[Article], list[Article]]:
    """Set aside ``n_validation`` random articles, deterministically.

    The split is a function of the seed and the input order. The training
    set keeps the input order; the validation set follows the sampling
    order. Both are disjoint and together cover the input exactly.
    """
    articles = list(articles)
    if n_validation < 0:
        raise ValueError("n_validation must be nonnegative")
    if n_validation > len(articles):
        raise ValueError(
            f"n_validation={n_validation} exceeds corpus size {len(articles)}"
        )
    rng = np.random.default_rng(seed)
    chosen = rng.permutation(len(articles))[:n_validation]
    chosen_set = set(int(i) for i in chosen)
    validation = [articles[int(i)] for i in chosen]
    train = [a for i, a in enumerate(articles) if i not in chosen_set]
    return train, validation

import json
import string
from datetime import date

import numpy as np
import pytest

from santrauka.corpus import (
    Article,
    FilterConfig,
    REJECT_REASONS,
    corpus_stats,
    filter_article,
    format_stats_table,
    ingest,
    longest_common_substring_len,
    normalize_whitespace,
    overlap_ratio,
    split_validation,
    to_json_line,
)


def lcs_substring_dp(a: str, b: str) -> int:
    """Quadratic-table oracle: longest run of identical characters."""
    best = 0
    prev = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        cur = [0] * (len(b) + 1)
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                cur[j] = prev[j - 1] + 1
                if cur[j] > best:
                    best = cur[j]
        prev = cur
    return best


def make_article(summary, body, source="src", published=None):
    return Article(source=source, summary=summary, body=body, published_at=published)


class TestLongestCommonSubstring:
    def test_identical_strings(self):
        assert longest_common_substring_len("abcdef", "abcdef") == 6

    def test_disjoint_alphabets(self):
        assert longest_common_substring_len("abc", "xyz") == 0

    def test_partial_overlap(self):
        # oracle: the dp table finds "cdef"
        assert lcs_substring_dp("abcdef", "zzcdefzz") == 4
        assert longest_common_substring_len("abcdef", "zzcdefzz") == 4

    def test_empty_inputs(self):
        assert longest_common_substring_len("", "abc") == 0
        assert longest_common_substring_len("abc", "") == 0
        assert longest_common_substring_len("", "") == 0

    def test_matches_dp_oracle_on_random_pairs(self):
        rng = np.random.default_rng(42)
        alphabet = "abcd"
        for _ in range(400):
            a = "".join(rng.choice(list(alphabet), size=rng.integers(0, 30)))
            b = "".join(rng.choice(list(alphabet), size=rng.integers(0, 30)))
            assert longest_common_substring_len(a, b) == lcs_substring_dp(a, b)

    def test_symmetry_and_bound(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            a = "".join(rng.choice(list("abc"), size=rng.integers(1, 20)))
            b = "".join(rng.choice(list("abc"), size=rng.integers(1, 20)))
            forward = longest_common_substring_len(a, b)
            assert forward == longest_common_substring_len(b, a)
            assert forward <= min(len(a), len(b))

    def test_full_length_iff_substring(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            a = "".join(rng.choice(list("ab"), size=rng.integers(1, 8)))
            b = "".join(rng.choice(list("ab"), size=rng.integers(1, 16)))
            assert (longest_common_substring_len(a, b) == len(a)) == (a in b)

    def test_unicode_counts_code_points(self):
        assert longest_common_substring_len("ąčęėį", "xxąčęėįxx") == 5


class TestOverlapRatio:
    def test_derived_fixture(self):
        assert overlap_ratio("abcdef", "zzcdefzz") == pytest.approx(4 / 6)

    def test_full_overlap(self):
        assert overlap_ratio("abcdef", "abcdef") == 1.0

    def test_single_char_overlap(self):
        # oracle check: no two-character substring of the summary occurs in the body
        assert lcs_substring_dp("abcdef", "zbzdzfz") == 1
        assert overlap_ratio("abcdef", "zbzdzfz") == pytest.approx(1 / 6)

    def test_empty_summary_is_an_error(self):
        with pytest.raises(ValueError):
            overlap_ratio("", "body")

    def test_always_within_unit_interval(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            s = "".join(rng.choice(list("abc"), size=rng.integers(1, 12)))
            b = "".join(rng.choice(list("abc"), size=rng.integers(0, 40)))
            assert 0.0 <= overlap_ratio(s, b) <= 1.0


def _distinct_body(length: int) -> str:
    # letters disjoint from the summaries used in these tests
    return ("nopqrstuvw" * (length // 10 + 1))[:length]


class TestFilterArticle:
    CONFIG = FilterConfig()

    def test_summary_at_threshold_rejected(self):
        article = make_article("a" * 10, _distinct_body(300))
        assert filter_article(article, self.CONFIG) == "summary_too_short"

    def test_summary_above_threshold_passes_rule(self):
        article = make_article("abcdefghijk", _distinct_body(300))
        assert filter_article(article, self.CONFIG) is None

    def test_body_at_threshold_rejected(self):
        article = make_article("abcdefghijk", _distinct_body(100))
        assert filter_article(article, self.CONFIG) == "body_too_short"

    def test_ratio_rule(self):
        summary = "abcdefghij" * 10  # 100 chars
        article = make_article(summary, _distinct_body(150))
        assert filter_article(article, self.CONFIG) == "body_to_summary_ratio"

    def test_body_exactly_twice_summary_is_kept(self):
        summary = "abcdefghij" * 10
        article = make_article(summary, _distinct_body(200))
        assert filter_article(article, self.CONFIG) is None

    def test_overlap_rule(self):
        summary = "abcdefghij" * 10
        body = _distinct_body(150) + summary[:30] + _distinct_body(150)
        article = make_article(summary, body)
        assert overlap_ratio(summary, body) >= 0.2
        assert filter_article(article, self.CONFIG) == "overlap_too_high"

    def test_overlap_exactly_at_threshold_rejected(self):
        summary = "abcdefghijklmno"  # 15 chars, 3 shared -> exactly 0.2
        body = _distinct_body(100) + "abc" + _distinct_body(100)
        article = make_article(summary, body)
        assert overlap_ratio(summary, body) == pytest.approx(0.2)
        assert filter_article(article, self.CONFIG) == "overlap_too_high"

    def test_keep_with_margin(self):
        article = make_article("abcdefghij" * 10, _distinct_body(300))
        assert filter_article(article, self.CONFIG) is None

    def test_first_failing_rule_wins(self):
        # fails both the summary and body rules; summary is checked first
        article = make_article("ab", "xy")
        assert filter_article(article, self.CONFIG) == "summary_too_short"

    def test_pure_function(self):
        article = make_article("abcdefghijk", _distinct_body(250))
        first = filter_article(article, self.CONFIG)
        assert filter_article(article, self.CONFIG) == first


class TestIngest(object):
    def write_lines(self, tmp_path, lines):
        path = tmp_path / "articles.jsonl"
        path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
        return path

    def test_direct_field_mapping(self, tmp_path):
        path = self.write_lines(
            tmp_path, ['{"source":"x","summary":"s","body":"b"}']
        )
        articles = list(ingest(path))
        assert articles == [Article(source="x", summary="s", body="b")]

    def test_missing_body_is_a_record_error(self, tmp_path):
        path = self.write_lines(
            tmp_path,
            [
                '{"source":"x","summary":"s"}',
                '{"source":"y","summary":"s2","body":"b2"}',
            ],
        )
        errors = []
        articles = list(ingest(path, errors))
        assert [a.source for a in articles] == ["y"]
        assert len(errors) == 1 and errors[0].line_no == 1

    def test_empty_file(self, tmp_path):
        path = self.write_lines(tmp_path, [])
        errors = []
        assert list(ingest(path, errors)) == []
        assert errors == []

    def test_invalid_json_and_unknown_keys(self, tmp_path):
        path = self.write_lines(
            tmp_path,
            [
                "not json",
                '{"source":"x","summary":"s","body":"b","extra":1}',
                '["array"]',
            ],
        )
        errors = []
        assert list(ingest(path, errors)) == []
        assert [e.line_no for e in errors] == [1, 2, 3]

    def test_date_parsing(self, tmp_path):
        path = self.write_lines(
            tmp_path,
            [
                '{"source":"x","summary":"s","body":"b","published_at":"2020-09-23"}',
                '{"source":"x","summary":"s","body":"b","published_at":"23/09/2020"}',
            ],
        )
        errors = []
        articles = list(ingest(path, errors))
        assert articles[0].published_at == date(2020, 9, 23)
        assert len(articles) == 1 and len(errors) == 1

    def test_whitespace_normalization(self, tmp_path):
        path = self.write_lines(
            tmp_path, ['{"source":"x","summary":"  a \\t b\\n","body":" c  d "}']
        )
        article = next(ingest(path))
        assert article.summary == "a b"
        assert article.body == "c d"

    def test_whitespace_only_summary_is_an_error(self, tmp_path):
        path = self.write_lines(tmp_path, ['{"source":"x","summary":" ","body":"b"}'])
        errors = []
        assert list(ingest(path, errors)) == []
        assert len(errors) == 1

    def test_unreadable_file_is_fatal(self, tmp_path):
        with pytest.raises(OSError):
            list(ingest(tmp_path / "missing.jsonl"))

    def test_json_round_trip(self, tmp_path):
        article = Article(
            source="x", summary="s", body="b", url="http://e", published_at=date(2020, 1, 2)
        )
        line = to_json_line(article)
        path = self.write_lines(tmp_path, [line])
        assert next(ingest(path)) == article


class TestCorpusStats:
    def test_empty_stream(self):
        report = corpus_stats([])
        assert report.kept == 0
        assert report.total == 0
        assert sum(report.rejected_by_reason.values()) == 0

    def test_direct_counting(self):
        a = make_article("s" * 20, _distinct_body(200), source="a")
        pairs = [(a, None), (a, None), (a, None), (a, "summary_too_short")]
        report = corpus_stats(pairs)
        assert report.kept == 3
        assert report.per_source["a"].count == 3
        assert report.rejected_by_reason["summary_too_short"] == 1
        assert report.total == 4

    def test_date_range(self):
        early = make_article("s" * 20, _distinct_body(200), published=date(2007, 7, 9))
        late = make_article("s" * 20, _distinct_body(200), published=date(2020, 9, 23))
        report = corpus_stats([(late, None), (early, None)])
        stats = report.per_source["src"]
        assert stats.earliest == date(2007, 7, 9)
        assert stats.latest == date(2020, 9, 23)
        assert stats.earliest <= stats.latest

    def test_counts_sum_to_stream_size(self):
        rng = np.random.default_rng(5)
        article = make_article("s" * 20, _distinct_body(200))
        outcomes = [None, *REJECT_REASONS]
        pairs = [(article, outcomes[rng.integers(0, len(outcomes))]) for _ in range(500)]
        report = corpus_stats(pairs)
        assert report.total == 500

    def test_table_rendering(self):
        article = make_article("s" * 20, _distinct_body(200), source="15min.lt",
                               published=date(2007, 7, 9))
        report = corpus_stats([(article, None), (article, "body_too_short")])
        table = format_stats_table(report)
        assert "15min.lt" in table
        assert "2007-07-09" in table
        assert "body_too_short" in table


class TestSplitValidation:
    ARTICLES = [make_article(f"summary-{i:02d}-{'s' * 12}", _distinct_body(200))
                for i in range(10)]

    def test_deterministic_under_seed(self):
        first = split_validation(self.ARTICLES, 2, seed=7)
        second = split_validation(self.ARTICLES, 2, seed=7)
        assert first == second

    def test_all_validation(self):
        train, validation = split_validation(self.ARTICLES, len(self.ARTICLES), seed=1)
        assert train == []
        assert sorted(a.summary for a in validation) == sorted(
            a.summary for a in self.ARTICLES
        )

    def test_zero_validation_preserves_order(self):
        train, validation = split_validation(self.ARTICLES, 0, seed=1)
        assert validation == []
        assert train == self.ARTICLES

    def test_disjoint_union(self):
        train, validation = split_validation(self.ARTICLES, 4, seed=9)
        assert len(validation) == 4
        train_keys = {a.summary for a in train}
        valid_keys = {a.summary for a in validation}
        assert not train_keys & valid_keys
        assert train_keys | valid_keys == {a.summary for a in self.ARTICLES}

    def test_oversized_request_is_an_error(self):
        with pytest.raises(ValueError):
            split_validation(self.ARTICLES, 11, seed=0)


def test_normalize_whitespace():
    assert normalize_whitespace("  a \t b\nc  ") == "a b c"
    assert normalize_whitespace("\n\t ") == ""

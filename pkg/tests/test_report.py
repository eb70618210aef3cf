import json
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import rec
from zsat.report import (
    Recommendation,
    ScanStats,
    build_report,
    deserialize,
    family_counts,
    recommend,
    serialize,
    without_timing,
)
from zsat.suspicion import Finding, Reason


def _findings(n, family="image"):
    return [Finding(rec(f"d/f{i:04d}.jpg", family, 200000), (Reason.SIZE_THRESHOLD,)) for i in range(n)]


@pytest.mark.parametrize("n,expected", [(510, "HIGH"), (0, "LOW"), (10, "HIGH"), (9, "LOW")])
def test_recommend(taxonomy, n, expected):
    assert recommend(n, taxonomy) is Recommendation(expected)


@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_recommend_monotone(taxonomy, n, extra):
    if recommend(n, taxonomy) is Recommendation.HIGH:
        assert recommend(n + extra, taxonomy) is Recommendation.HIGH


def _report(taxonomy, findings, **stats):
    return build_report("/evidence", taxonomy, ScanStats(**stats), findings)


def test_round_trip(taxonomy):
    fs = _findings(3) + [
        Finding(rec("tmp/secret.txt", "image", 10, mismatch=True),
                (Reason.KEYWORD_MATCH, Reason.LOCATION_HINT, Reason.EXTENSION_MISMATCH), "secret"),
        Finding(rec("v/a.avi", "video", 11 << 20), (Reason.SIZE_THRESHOLD, Reason.GROUPED)),
    ]
    r = _report(taxonomy, fs, files_seen=100, dirs_seen=4, bytes_seen=10**8, files_matched=7, elapsed_ms=42,
                partial=True, warnings=[("z/b", "Permission denied"), ("a/b", "gone")])
    text = serialize(r, "json")
    assert deserialize(text) == r
    assert serialize(deserialize(text)) == text
    assert serialize(r) == serialize(r)


def test_json_schema_keys(taxonomy):
    fs = [Finding(rec("a/secret.jpg"), (Reason.KEYWORD_MATCH,), "secret")] + _findings(1)
    d = json.loads(serialize(_report(taxonomy, fs)))
    assert {"tool_version", "taxonomy_digest", "root", "stats", "findings", "per_family_counts",
            "recommendation"} <= d.keys()
    assert set(d["stats"]) == {"files_seen", "dirs_seen", "bytes_seen", "files_matched", "findings_count",
                               "elapsed_ms", "partial", "warnings"}
    keyed = {f["path"]: f for f in d["findings"]}
    assert keyed["a/secret.jpg"]["matched_keyword"] == "secret"
    assert "matched_keyword" not in keyed["d/f0000.jpg"]
    assert {"path", "family", "format", "size_bytes", "reasons"} <= keyed["d/f0000.jpg"].keys()
    assert d["taxonomy_digest"] == taxonomy.digest


def test_text_of_empty_report(taxonomy):
    text = serialize(_report(taxonomy, []), "text")
    assert "LOW" in text and "0 findings" in text


def test_text_lists_top_findings(taxonomy):
    text = serialize(_report(taxonomy, _findings(25)), "text")
    assert "HIGH" in text and "25 findings" in text
    assert "d/f0019.jpg" in text and "d/f0020.jpg" not in text


def test_findings_sorted_bytewise(taxonomy):
    names = ["b.jpg", "B.jpg", "a/z.jpg", "a.jpg", "é.jpg", "_.jpg"]
    r = _report(taxonomy, [Finding(rec(n), (Reason.SIZE_THRESHOLD,)) for n in names])
    paths = [f.rel_path for f in r.findings]
    assert paths == sorted(names, key=lambda s: s.encode())


def test_without_timing(taxonomy):
    a = _report(taxonomy, _findings(2), elapsed_ms=5)
    b = _report(taxonomy, _findings(2), elapsed_ms=900)
    assert a != b and without_timing(a) == without_timing(b)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 50), st.sampled_from(["image", "video"])), unique_by=lambda t: t[0]))
def test_per_family_counts_consistent(taxonomy, rows):
    fs = [Finding(rec(f"f{i}", fam), (Reason.GROUPED,)) for i, fam in rows]
    r = _report(taxonomy, fs)
    assert r.per_family_counts == family_counts(r.findings) == dict(Counter(fam for _, fam in rows))
    assert sum(r.per_family_counts.values()) == r.stats.findings_count == len(fs)
    assert r.recommendation is recommend(len(fs), taxonomy)
    assert deserialize(serialize(r)) == r

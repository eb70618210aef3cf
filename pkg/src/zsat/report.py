"""Triage report assembly, priority recommendation and serialization."""

from __future__ import annotations

import enum
import json
import os
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Any, Iterable

from . import __version__
from .filters import FileRecord
from .ontology import Taxonomy
from .sigdetect import DetectedFormat, Via
from .suspicion import Finding, Reason

MODE_FILTERED = "filtered"
MODE_TYPE_ONLY = "type_only"
TOP_FINDINGS_IN_TEXT = 20


class Recommendation(str, enum.Enum):
    HIGH = "HIGH"
    LOW = "LOW"


class OutputFormat(str, enum.Enum):
    JSON = "json"
    TEXT = "text"


@dataclass
class ScanStats:
    files_seen: int = 0
    dirs_seen: int = 0
    bytes_seen: int = 0
    files_matched: int = 0
    findings_count: int = 0
    elapsed_ms: int = 0
    partial: bool = False
    warnings: list[tuple[str, str]] = field(default_factory=list)


@dataclass(frozen=True)
class TriageReport:
    tool_version: str
    taxonomy_digest: str
    root: str
    stats: ScanStats
    findings: tuple[Finding, ...]
    per_family_counts: dict[str, int]
    recommendation: Recommendation
    mode: str = MODE_FILTERED


def recommend(findings_count: int, t: Taxonomy) -> Recommendation:
    return Recommendation.HIGH if findings_count >= t.priority_threshold else Recommendation.LOW


def finding_sort_key(f: Finding) -> bytes:
    return os.fsencode(f.record.rel_path)


def family_counts(findings: Iterable[Finding]) -> dict[str, int]:
    return dict(sorted(Counter(f.family for f in findings).items()))


def build_report(
    root: str,
    taxonomy: Taxonomy,
    stats: ScanStats,
    findings: Iterable[Finding],
    mode: str = MODE_FILTERED,
    taxonomy_digest: str | None = None,
) -> TriageReport:
    ordered = tuple(sorted(findings, key=finding_sort_key))
    stats = replace(stats, findings_count=len(ordered), warnings=sorted(stats.warnings))
    return TriageReport(
        tool_version=__version__,
        taxonomy_digest=taxonomy_digest or taxonomy.digest,
        root=root,
        stats=stats,
        findings=ordered,
        per_family_counts=family_counts(ordered),
        recommendation=recommend(len(ordered), taxonomy),
        mode=mode,
    )


def without_timing(r: TriageReport) -> TriageReport:
    """Copy of ``r`` with the non-deterministic timing field zeroed."""
    return replace(r, stats=replace(r.stats, elapsed_ms=0))


# --------------------------------------------------------------------------
# JSON

def _finding_to_dict(f: Finding) -> dict[str, Any]:
    rec = f.record
    out: dict[str, Any] = {
        "path": rec.rel_path,
        "family": rec.detected.family_name,
        "format": rec.detected.format_name,
        "size_bytes": rec.size_bytes,
        "reasons": [r.value for r in f.reasons],
        "mismatch": rec.detected.mismatch,
        "via": rec.detected.via.value,
    }
    if f.matched_keyword is not None:
        out["matched_keyword"] = f.matched_keyword
    return out


def _finding_from_dict(d: dict[str, Any]) -> Finding:
    detected = DetectedFormat(d["format"], d["family"], d["mismatch"], Via(d["via"]))
    record = FileRecord.create(d["path"], d["size_bytes"], detected)
    return Finding(record, tuple(Reason(r) for r in d["reasons"]), d.get("matched_keyword"))


def report_to_dict(r: TriageReport) -> dict[str, Any]:
    s = r.stats
    return {
        "tool_version": r.tool_version,
        "taxonomy_digest": r.taxonomy_digest,
        "root": r.root,
        "mode": r.mode,
        "stats": {
            "files_seen": s.files_seen,
            "dirs_seen": s.dirs_seen,
            "bytes_seen": s.bytes_seen,
            "files_matched": s.files_matched,
            "findings_count": s.findings_count,
            "elapsed_ms": s.elapsed_ms,
            "partial": s.partial,
            "warnings": [{"path": p, "message": m} for p, m in s.warnings],
        },
        "findings": [_finding_to_dict(f) for f in r.findings],
        "per_family_counts": dict(r.per_family_counts),
        "recommendation": r.recommendation.value,
    }


def report_from_dict(d: dict[str, Any]) -> TriageReport:
    s = d["stats"]
    stats = ScanStats(
        files_seen=s["files_seen"],
        dirs_seen=s["dirs_seen"],
        bytes_seen=s["bytes_seen"],
        files_matched=s["files_matched"],
        findings_count=s["findings_count"],
        elapsed_ms=s["elapsed_ms"],
        partial=s["partial"],
        warnings=[(w["path"], w["message"]) for w in s["warnings"]],
    )
    return TriageReport(
        tool_version=d["tool_version"],
        taxonomy_digest=d["taxonomy_digest"],
        root=d["root"],
        stats=stats,
        findings=tuple(_finding_from_dict(f) for f in d["findings"]),
        per_family_counts=dict(d["per_family_counts"]),
        recommendation=Recommendation(d["recommendation"]),
        mode=d.get("mode", MODE_FILTERED),
    )


def serialize(r: TriageReport, fmt: OutputFormat | str = OutputFormat.JSON) -> str:
    fmt = OutputFormat(fmt)
    if fmt is OutputFormat.JSON:
        return json.dumps(report_to_dict(r), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    return _to_text(r)


def deserialize(text: str) -> TriageReport:
    return report_from_dict(json.loads(text))


def _to_text(r: TriageReport) -> str:
    s = r.stats
    status = "PARTIAL (time budget exhausted)" if s.partial else "complete"
    lines = [
        "ZSAT triage report",
        f"root:           {r.root}",
        f"scan:           {status}, {s.elapsed_ms} ms",
        f"files seen:     {s.files_seen} in {s.dirs_seen} directories ({s.bytes_seen} bytes)",
        f"target files:   {s.files_matched}",
        f"result:         {len(r.findings)} findings" if r.mode == MODE_FILTERED
        else f"result:         {len(r.findings)} findings (type inventory, no suspicion filtering)",
        f"recommendation: {r.recommendation.value}",
    ]
    if r.per_family_counts:
        lines.append("by family:      " + ", ".join(f"{k}={v}" for k, v in r.per_family_counts.items()))
    if r.findings:
        shown = r.findings[:TOP_FINDINGS_IN_TEXT]
        lines.append("")
        lines.append(f"findings (first {len(shown)} of {len(r.findings)}):")
        for f in shown:
            reasons = ",".join(x.value for x in f.reasons) or "-"
            kw = f" keyword={f.matched_keyword!r}" if f.matched_keyword else ""
            lines.append(f"  {f.record.rel_path}  [{f.record.detected.format_name}, "
                         f"{f.record.size_bytes} B] {reasons}{kw}")
    if s.warnings:
        lines.append("")
        lines.append(f"warnings: {len(s.warnings)}")
        for path, msg in s.warnings[:TOP_FINDINGS_IN_TEXT]:
            lines.append(f"  {path}: {msg}")
    return "\n".join(lines) + "\n"

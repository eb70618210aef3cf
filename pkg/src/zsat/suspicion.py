"""Per-format suspicion criteria and the findings they produce."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .filters import FileRecord
from .ontology import Format, Taxonomy


class Reason(str, enum.Enum):
    SIZE_THRESHOLD = "SIZE_THRESHOLD"
    KEYWORD_MATCH = "KEYWORD_MATCH"
    LOCATION_HINT = "LOCATION_HINT"
    EXTENSION_MISMATCH = "EXTENSION_MISMATCH"
    GROUPED = "GROUPED"
    ISOLATED = "ISOLATED"


REASON_ORDER = {r: i for i, r in enumerate(Reason)}


def ordered_reasons(reasons) -> tuple[Reason, ...]:
    """Deduplicate and put reasons in declaration order."""
    return tuple(sorted({Reason(r) for r in reasons}, key=REASON_ORDER.__getitem__))


@dataclass(frozen=True)
class Finding:
    record: FileRecord
    reasons: tuple[Reason, ...]
    matched_keyword: str | None = None

    @property
    def rel_path(self) -> str:
        return self.record.rel_path

    @property
    def family(self) -> str:
        return self.record.detected.family_name


def _enabled_format(record: FileRecord, t: Taxonomy) -> Format | None:
    detected = record.detected
    if not detected.known or not t.is_enabled(detected.family_name):
        return None
    return t.format_by_name(detected.format_name)


def matching_keyword(stem: str, keywords) -> str | None:
    lowered = stem.lower()
    for kw in keywords:
        if kw.lower() in lowered:
            return kw
    return None


def evaluate(record: FileRecord, t: Taxonomy, grouped: bool = False, isolated: bool = False) -> Finding | None:
    """Collect the reasons ``record`` is possibly suspicious.

    Returns None for unknown or disabled families and for files with no
    reason at all. Any single reason is enough for a Finding.
    """
    fmt = _enabled_format(record, t)
    if fmt is None:
        return None
    crit = fmt.criteria
    reasons = []
    if record.size_bytes >= crit.min_size_bytes:
        reasons.append(Reason.SIZE_THRESHOLD)
    keyword = matching_keyword(record.stem, crit.keywords) if crit.keywords else None
    if keyword is not None:
        reasons.append(Reason.KEYWORD_MATCH)
    if crit.use_location_hints and t.location_rules.matching_hint(record.rel_path) is not None:
        reasons.append(Reason.LOCATION_HINT)
    if record.detected.mismatch:
        reasons.append(Reason.EXTENSION_MISMATCH)
    if grouped:
        reasons.append(Reason.GROUPED)
    if isolated:
        reasons.append(Reason.ISOLATED)
    if not reasons:
        return None
    return Finding(record, tuple(reasons), keyword)


def size_alone_sufficient(record: FileRecord, t: Taxonomy) -> bool:
    fmt = _enabled_format(record, t)
    return fmt is not None and record.size_bytes >= fmt.criteria.min_size_bytes

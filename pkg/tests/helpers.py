"""Small builders for in-memory records."""

from __future__ import annotations

from zsat.filters import FileRecord
from zsat.sigdetect import UNKNOWN, DetectedFormat, Via

_FMT = {"image": "jpg", "video": "avi", "music": "mp3"}


def rec(rel_path: str, family: str = "image", size: int = 1000, mismatch: bool = False) -> FileRecord:
    if family == UNKNOWN:
        det = DetectedFormat(UNKNOWN, UNKNOWN, mismatch, Via.NONE)
    else:
        det = DetectedFormat(_FMT[family], family, mismatch, Via.SIGNATURE)
    return FileRecord.create(rel_path, size, det)

"""Content-based format detection from the first bytes of a file."""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass

from .ontology import HEADER_WINDOW, Taxonomy

UNKNOWN = "unknown"


class Via(str, enum.Enum):
    SIGNATURE = "SIGNATURE"
    EXTENSION_ONLY = "EXTENSION_ONLY"
    NONE = "NONE"


@dataclass(frozen=True)
class DetectedFormat:
    format_name: str
    family_name: str
    mismatch: bool
    via: Via

    @property
    def known(self) -> bool:
        return self.format_name != UNKNOWN


# shared results for the common no-match cases
_UNKNOWN = DetectedFormat(UNKNOWN, UNKNOWN, False, Via.NONE)
_UNKNOWN_CLAIMED = DetectedFormat(UNKNOWN, UNKNOWN, True, Via.NONE)

_OPEN_FLAGS = os.O_RDONLY | getattr(os, "O_BINARY", 0)


def read_header(path: str | os.PathLike) -> bytes:
    """Return the first ``min(size, 64)`` bytes of ``path``.

    The file is opened read-only and closed before returning. OSError
    propagates to the caller (the scanner turns it into a warning).
    """
    fd = os.open(path, _OPEN_FLAGS)
    try:
        return os.read(fd, HEADER_WINDOW)
    finally:
        os.close(fd)


def detect(header: bytes, extension: str, t: Taxonomy) -> DetectedFormat:
    """Classify a file from its header bytes and extension.

    A signature match always wins over the extension. When several formats
    match, the one with the most matched signature bytes is chosen and the
    extension breaks any remaining tie (OggS for ogg/ogm, ASF for wmv/wma);
    failing that, taxonomy order decides.

    ``mismatch`` is set when content and extension disagree: the extension
    names a different format than the content, the extension names a format
    the content does not support, or the content matched and the extension
    is unmapped. A zero-length file carries no content evidence, so it is
    classified by extension alone (``Via.EXTENSION_ONLY``) without a mismatch.
    """
    ext_fmt = t.format_for_extension(extension) if extension else None

    best_len = 0
    candidates = []
    for fam, fmt in t.candidates_for(header):
        n = fmt.match_length(header)
        if n == 0 or n < best_len:
            continue
        if n > best_len:
            best_len = n
            candidates = []
        candidates.append((fam, fmt))

    if not candidates:
        if ext_fmt is not None and not header:
            fam = t.family_of(ext_fmt.name)
            return DetectedFormat(ext_fmt.name, fam.name, False, Via.EXTENSION_ONLY)
        return _UNKNOWN_CLAIMED if ext_fmt is not None else _UNKNOWN

    fam, fmt = candidates[0]
    if ext_fmt is not None:
        for cand_fam, cand_fmt in candidates:
            if cand_fmt is ext_fmt:
                fam, fmt = cand_fam, cand_fmt
                break
    mismatch = ext_fmt is None or ext_fmt.name != fmt.name
    return DetectedFormat(fmt.name, fam.name, mismatch, Via.SIGNATURE)

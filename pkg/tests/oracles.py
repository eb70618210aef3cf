"""Independent reference computations used to check the library.

Nothing here imports the code paths it checks: detection is a linear scan
over every signature, and proximity is recounted per directory from a plain
list of (directory, family) pairs.
"""

from __future__ import annotations

from collections import Counter


def linear_detect(header: bytes, extension: str, t):
    """Return (format_name, family_name, mismatch) by scanning every signature."""
    def sig_ok(sig):
        window = header[sig.offset:sig.offset + len(sig.magic)]
        if len(window) < len(sig.magic):
            return False
        mask = sig.mask or b"\xff" * len(sig.magic)
        return bytes(a & m for a, m in zip(window, mask)) == bytes(a & m for a, m in zip(sig.magic, mask))

    scored = []
    for position, (fam, fmt) in enumerate((fam, fmt) for fam in t.families for fmt in fam.formats):
        hits = [len(s.magic) for s in fmt.signatures if sig_ok(s)]
        if fmt.match_all:
            score = sum(hits) if len(hits) == len(fmt.signatures) and hits else 0
        else:
            score = max(hits, default=0)
        if score:
            scored.append((score, position, fam.name, fmt))
    ext = extension.lower().lstrip(".")
    ext_owner = next((fmt for fam in t.families for fmt in fam.formats if ext and ext in fmt.extensions), None)
    if not scored:
        if ext_owner is not None and not header:
            return ext_owner.name, next(f.name for f in t.families if ext_owner in f.formats), False
        return "unknown", "unknown", ext_owner is not None
    top = max(s for s, *_ in scored)
    tied = [x for x in scored if x[0] == top]
    chosen = next((x for x in tied if x[3] is ext_owner), min(tied, key=lambda x: x[1]))
    return chosen[3].name, chosen[2], ext_owner is None or ext_owner.name != chosen[3].name


def brute_grouped(files, threshold, min_files):
    """files: list of (path, dir, family). Returns the set of grouped paths."""
    out = set()
    for path, d, fam in files:
        if fam == "unknown":
            continue
        in_dir = [f for _, dd, f in files if dd == d]
        if len(in_dir) >= min_files and in_dir.count(fam) / len(in_dir) >= threshold:
            out.add(path)
    return out


def brute_isolated(files, min_other, dominance):
    out = set()
    for path, d, fam in files:
        if fam == "unknown":
            continue
        others = [f for p, dd, f in files if dd == d and p != path]
        if fam in others or len(others) < min_other:
            continue
        top = Counter(others).most_common(1)[0][1]
        if top / len(others) >= dominance:
            out.add(path)
    return out

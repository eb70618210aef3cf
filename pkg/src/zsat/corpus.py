"""Seeded synthetic evidence trees with a ground-truth manifest.

Planted media carry valid format headers followed by seeded pseudo-random
padding: the scanner only ever reads the first 64 bytes and the file size,
so nothing past the header needs to be a real picture or movie.
"""

from __future__ import annotations

import json
import os
import random
import struct
import zlib
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .ontology import Taxonomy, default_taxonomy

UNKNOWN = "unknown"
MANIFEST_SUFFIX = ".manifest.json"

_DIR_WORDS = ["docs", "photos", "work", "misc", "backup", "projects", "archive", "downloads",
              "personal", "school", "family", "travel", "old", "shared", "scans", "media"]
_DOC_WORDS = ["report", "notes", "invoice", "letter", "budget", "minutes", "draft", "summary",
              "schedule", "memo", "receipt", "agenda"]
_LOREM = b"Lorem ipsum dolor sit amet, consectetur adipiscing elit, sed do eiusmod tempor.\n"
_MAX_DEPTH = 5
_DENSE_DIR_IMAGES = 12
_ISOLATED_DIR_OTHERS = 12


@dataclass(frozen=True)
class CorpusSpec:
    seed: int = 7
    innocuous_files: int = 0
    planted_images: int = 0
    planted_videos: int = 0
    planted_keyword_files: int = 0
    planted_mismatch_files: int = 0
    directories: int = 1
    keyword: str = "secret"
    planted_music: int = 0

    def __post_init__(self):
        counts = (self.innocuous_files, self.planted_images, self.planted_videos,
                  self.planted_keyword_files, self.planted_mismatch_files, self.planted_music)
        if any(c < 0 for c in counts):
            raise ValueError("file counts must be >= 0")
        if self.directories < 1:
            raise ValueError("directories must be >= 1")
        if not self.keyword or "/" in self.keyword or "\\" in self.keyword or "." in self.keyword:
            raise ValueError("keyword must be a non-empty name fragment without separators or dots")


@dataclass(frozen=True)
class ManifestEntry:
    rel_path: str
    expected_family: str
    expected_reasons: tuple[str, ...]
    is_planted: bool


@dataclass
class Manifest:
    spec: CorpusSpec
    entries: list[ManifestEntry] = field(default_factory=list)

    def planted(self) -> list[ManifestEntry]:
        return [e for e in self.entries if e.is_planted]

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "spec": asdict(self.spec),
            "entries": [
                {"path": e.rel_path, "expected_family": e.expected_family,
                 "expected_reasons": list(e.expected_reasons), "is_planted": e.is_planted}
                for e in self.entries
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> Manifest:
        doc = json.loads(text)
        entries = [ManifestEntry(e["path"], e["expected_family"], tuple(e["expected_reasons"]), e["is_planted"])
                   for e in doc["entries"]]
        return cls(CorpusSpec(**doc["spec"]), entries)


def manifest_path(out_dir: str | os.PathLike) -> Path:
    """Where the manifest for ``out_dir`` lives: beside it, never inside."""
    out = Path(out_dir).resolve()
    return out.with_name(out.name + MANIFEST_SUFFIX)


# --------------------------------------------------------------------------
# headers

def jpeg_header() -> bytes:
    # SOI + JFIF APP0 segment
    return bytes.fromhex("FFD8FFE000104A46494600010100000100010000")


def png_header(width: int = 640, height: int = 480) -> bytes:
    ihdr = struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0)
    chunk = b"IHDR" + ihdr
    return b"\x89PNG\r\n\x1a\n" + struct.pack(">I", len(ihdr)) + chunk + struct.pack(">I", zlib.crc32(chunk))


def avi_header(total_size: int) -> bytes:
    return b"RIFF" + struct.pack("<I", max(total_size - 8, 0)) + b"AVI " + b"LIST" + struct.pack("<I", 192) + b"hdrl"


def mp3_header() -> bytes:
    # ID3v2.3 tag header with a zero-length tag, then an MPEG-1 Layer III frame sync
    return b"ID3\x03\x00\x00\x00\x00\x00\x00" + bytes.fromhex("FFFB9064")


_INNOCUOUS = [
    ("txt", lambda i: b"Meeting notes %d\n" % i),
    ("pdf", lambda i: b"%PDF-1.4\n%\xe2\xe3\xcf\xd3\n"),
    ("docx", lambda i: b"PK\x03\x04\x14\x00\x06\x00"),
    ("html", lambda i: b"<!DOCTYPE html>\n<html><head><title>page</title></head>\n"),
    ("csv", lambda i: b"date,amount,description\n"),
    ("rtf", lambda i: b"{\\rtf1\\ansi\\deff0\n"),
]

_MISMATCH_EXTENSIONS = ["dat", "doc", "bin", "log"]


def _threshold(t: Taxonomy, format_name: str) -> int:
    fmt = t.format_by_name(format_name)
    if fmt is None:
        raise ValueError(f"taxonomy has no format {format_name!r}")
    return fmt.criteria.min_size_bytes


# --------------------------------------------------------------------------
# generation

@dataclass
class _Planned:
    rel_dir: str
    name: str
    family: str
    reasons: list[str]
    planted: bool
    header: bytes
    size: int
    text_body: bool = False


def _build_dirs(rng: random.Random, n: int) -> list[str]:
    dirs = [""]
    depth = {"": 0}
    for i in range(1, n):
        candidates = [d for d in dirs if depth[d] < _MAX_DEPTH]
        parent = rng.choice(candidates)
        name = f"{rng.choice(_DIR_WORDS)}_{i:04d}"
        rel = f"{parent}/{name}" if parent else name
        dirs.append(rel)
        depth[rel] = depth[parent] + 1
    return dirs


def _proximity_reasons(files: list[_Planned], t: Taxonomy) -> None:
    """Brute-force recount of grouped/isolated membership, written into ``reasons``."""
    gp, ip = t.grouped_params, t.isolated_params
    by_dir: dict[str, list[_Planned]] = defaultdict(list)
    for f in files:
        by_dir[f.rel_dir].append(f)
    for members in by_dir.values():
        n = len(members)
        for f in members:
            if f.family == UNKNOWN:
                continue
            same = sum(1 for g in members if g.family == f.family)
            if n >= gp.min_files and same / n >= gp.homogeneity_threshold:
                f.reasons.append("GROUPED")
            if same == 1 and n - 1 >= ip.min_other_files:
                others = Counter(g.family for g in members if g is not f)
                if max(others.values()) / (n - 1) >= ip.other_dominance:
                    f.reasons.append("ISOLATED")


def plan(spec: CorpusSpec, t: Taxonomy | None = None) -> tuple[list[_Planned], list[str]]:
    """Decide every directory and file (with expected reasons) without touching disk."""
    t = t or default_taxonomy()
    rng = random.Random(spec.seed)
    dirs = _build_dirs(rng, spec.directories)

    # Reserve a dense image directory and an isolated-image directory when the counts allow.
    dense = dirs[1] if len(dirs) >= 3 and spec.planted_images >= _DENSE_DIR_IMAGES + 1 else None
    lone = dirs[2] if dense is not None and spec.innocuous_files >= _ISOLATED_DIR_OTHERS else None
    general = [d for d in dirs if d not in (dense, lone)] or dirs

    img_min = max(_threshold(t, "jpg"), _threshold(t, "png"))
    vid_min = _threshold(t, "avi")
    mus_min = _threshold(t, "mp3")
    small_img = max(_threshold(t, "jpg") // 2, 4096)

    files: list[_Planned] = []
    for i in range(spec.planted_images):
        if dense is not None and i < _DENSE_DIR_IMAGES:
            where = dense
        elif lone is not None and i == _DENSE_DIR_IMAGES:
            where = lone
        else:
            where = rng.choice(general)
        size = img_min + rng.randrange(0, 32768)
        if rng.random() < 0.5:
            files.append(_Planned(where, f"IMG_{i:05d}.jpg", "image", ["SIZE_THRESHOLD"], True, jpeg_header(), size))
        else:
            files.append(_Planned(where, f"IMG_{i:05d}.png", "image", ["SIZE_THRESHOLD"], True,
                                  png_header(rng.randrange(800, 4000), rng.randrange(600, 3000)), size))
    for i in range(spec.planted_videos):
        size = vid_min + rng.randrange(0, 1 << 20)
        files.append(_Planned(rng.choice(general), f"MOV_{i:04d}.avi", "video", ["SIZE_THRESHOLD"], True,
                              avi_header(size), size))
    for i in range(spec.planted_keyword_files):
        size = rng.randrange(2048, small_img)
        files.append(_Planned(rng.choice(general), f"holiday_{spec.keyword}_{i:04d}.jpg", "image",
                              ["KEYWORD_MATCH"], True, jpeg_header(), size))
    for i in range(spec.planted_mismatch_files):
        size = rng.randrange(2048, small_img)
        ext = rng.choice(_MISMATCH_EXTENSIONS)
        files.append(_Planned(rng.choice(general), f"archive_{i:04d}.{ext}", "image",
                              ["EXTENSION_MISMATCH"], True, jpeg_header(), size))
    for i in range(spec.planted_music):
        size = mus_min + rng.randrange(0, 1 << 18)
        files.append(_Planned(rng.choice(general), f"track_{i:04d}.mp3", "music", ["SIZE_THRESHOLD"], True,
                              mp3_header(), size))

    innocuous_dirs = [d for d in dirs if d != dense]
    for i in range(spec.innocuous_files):
        if lone is not None and i < _ISOLATED_DIR_OTHERS:
            where = lone
        else:
            where = rng.choice(innocuous_dirs)
        ext, header = _INNOCUOUS[rng.randrange(len(_INNOCUOUS))]
        files.append(_Planned(where, f"{rng.choice(_DOC_WORDS)}_{i:06d}.{ext}", UNKNOWN, [], False,
                              header(i), rng.randrange(64, 4096), text_body=ext in ("txt", "csv")))

    _proximity_reasons(files, t)
    return files, dirs


def generate(spec: CorpusSpec, out_dir: str | os.PathLike, taxonomy: Taxonomy | None = None) -> Manifest:
    """Write a corpus under ``out_dir`` and its manifest beside it.

    Refuses to touch a non-empty ``out_dir`` or an existing manifest.
    """
    out = Path(out_dir)
    if out.exists() and (not out.is_dir() or any(out.iterdir())):
        raise FileExistsError(f"refusing to generate into non-empty {out}")
    mpath = manifest_path(out)
    if mpath.exists():
        raise FileExistsError(f"refusing to overwrite manifest {mpath}")

    files, dirs = plan(spec, taxonomy)
    out.mkdir(parents=True, exist_ok=True)
    for d in dirs[1:]:
        (out / d).mkdir(parents=True, exist_ok=True)

    pad = random.Random(spec.seed ^ 0x5A5A_5A5A)
    for f in files:
        body_len = max(f.size - len(f.header), 0)
        if f.text_body:
            body = (_LOREM * (body_len // len(_LOREM) + 1))[:body_len]
        else:
            body = pad.randbytes(body_len)
        with open(out / f.rel_dir / f.name, "xb") as fh:
            fh.write(f.header[: f.size] + body)

    entries = [
        ManifestEntry(f"{f.rel_dir}/{f.name}" if f.rel_dir else f.name, f.family, tuple(f.reasons), f.planted)
        for f in files
    ]
    entries.sort(key=lambda e: os.fsencode(e.rel_path))
    manifest = Manifest(spec, entries)
    mpath.write_text(manifest.to_json(), encoding="utf-8")
    return manifest

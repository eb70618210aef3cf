"""Read-only, time-budgeted traversal of an evidence tree.

Directories are visited depth-first in byte-wise name order; a directory's
own files are processed before its subdirectories, so each directory's
family histogram is complete (or known to be cut short) before the next one
starts. Symlinks are never followed and non-regular files are skipped.
"""

from __future__ import annotations

import logging
import os
import stat
import sys
import threading
import time
from concurrent.futures import FIRST_COMPLETED, Future, ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from typing import Mapping

from .filters import DirHistogram, FileRecord, dir_histograms, is_grouped, is_isolated, split_extension
from .ontology import Taxonomy
from .report import MODE_FILTERED, MODE_TYPE_ONLY, ScanStats, TriageReport, build_report
from .sigdetect import detect, read_header
from .suspicion import Finding, evaluate

log = logging.getLogger(__name__)

DEFAULT_BUDGET_MS = 300_000


class ScanError(OSError):
    """The scan could not start (missing or unreadable root)."""


@dataclass
class ScanConfig:
    root: str | os.PathLike
    budget_ms: int = DEFAULT_BUDGET_MS
    worker_count: int = 1
    enabled_family_overrides: Mapping[str, bool] | None = None

    def __post_init__(self):
        if self.budget_ms < 0:
            raise ValueError("budget_ms must be >= 0")
        if self.worker_count < 1:
            raise ValueError("worker_count must be >= 1")


class _Deadline:
    """Shared wall-clock budget; once expired it stays expired for every worker."""

    def __init__(self, budget_ms: int):
        self._end = time.monotonic() + budget_ms / 1000.0
        self._expired = threading.Event()

    def expired(self) -> bool:
        if self._expired.is_set():
            return True
        if time.monotonic() >= self._end:
            self._expired.set()
            return True
        return False


@dataclass
class _DirResult:
    rel_dir: str
    subdirs: list[str] = field(default_factory=list)
    files_seen: int = 0
    bytes_seen: int = 0
    files_matched: int = 0
    findings: list[Finding] = field(default_factory=list)
    warnings: list[tuple[str, str]] = field(default_factory=list)
    complete: bool = True


_FS_ENCODING = sys.getfilesystemencoding()
_FS_ERRORS = sys.getfilesystemencodeerrors()


def _name_key(entry: os.DirEntry) -> bytes:
    # os.fsencode without the per-call type dispatch
    return entry.name.encode(_FS_ENCODING, _FS_ERRORS)


class _Walker:
    def __init__(self, root: str, taxonomy: Taxonomy, deadline: _Deadline, filtered: bool):
        self.root = root
        self.taxonomy = taxonomy
        self.deadline = deadline
        self.filtered = filtered

    def scan_dir(self, rel_dir: str) -> _DirResult | None:
        """Process one directory's files; None when the budget expired before it started."""
        if self.deadline.expired():
            return None
        res = _DirResult(rel_dir)
        abs_dir = os.path.join(self.root, rel_dir) if rel_dir else self.root
        try:
            with os.scandir(abs_dir) as it:
                entries = sorted(it, key=_name_key)
        except OSError as exc:
            res.warnings.append((rel_dir or ".", f"cannot list directory: {exc.strerror or exc}"))
            return res

        t = self.taxonomy
        expired = self.deadline.expired
        filtered = self.filtered
        prefix = f"{rel_dir}/" if rel_dir else ""
        records: list[FileRecord] = []
        for entry in entries:
            rel = prefix + entry.name
            try:
                # one lstat per entry; symlinks come back as S_ISLNK and are skipped
                st = entry.stat(follow_symlinks=False)
            except OSError as exc:
                res.warnings.append((rel, f"cannot stat: {exc.strerror or exc}"))
                continue
            mode = st.st_mode
            if stat.S_ISDIR(mode):
                if not t.location_rules.is_excluded(rel):
                    res.subdirs.append(rel)
                continue
            if not stat.S_ISREG(mode):
                continue
            if expired():
                res.complete = False
                break
            size = st.st_size
            res.files_seen += 1
            res.bytes_seen += size
            try:
                header = read_header(entry.path)
            except OSError as exc:
                res.warnings.append((rel, f"cannot read header: {exc.strerror or exc}"))
                continue
            ext = split_extension(entry.name)[1]
            detected = detect(header, ext, t)
            target = detected.known and t.is_enabled(detected.family_name)
            if target:
                res.files_matched += 1
            if filtered:
                # every file, target or not, counts toward its directory's histogram
                records.append(FileRecord(rel, rel_dir, size, ext, detected))
            elif target:
                res.findings.append(Finding(FileRecord(rel, rel_dir, size, ext, detected), ()))

        if self.filtered and records:
            res.findings = self._evaluate_dir(records, complete=res.complete)
        return res

    def _evaluate_dir(self, records: list[FileRecord], complete: bool) -> list[Finding]:
        t = self.taxonomy
        hist: DirHistogram | None = dir_histograms(records)[0] if complete else None
        findings = []
        for rec in records:
            grouped = isolated = False
            if hist is not None:
                grouped = is_grouped(rec.family, hist, t.grouped_params)
                isolated = is_isolated(rec.family, hist, t.isolated_params)
            finding = evaluate(rec, t, grouped, isolated)
            if finding is not None:
                findings.append(finding)
        return findings


def _walk_sequential(walker: _Walker) -> tuple[list[_DirResult], bool]:
    results = []
    stack = [""]
    while stack:
        res = walker.scan_dir(stack.pop())
        if res is None:
            return results, True
        results.append(res)
        if not res.complete:
            return results, True
        stack.extend(reversed(res.subdirs))
    return results, False


def _walk_parallel(walker: _Walker, workers: int) -> tuple[list[_DirResult], bool]:
    results = []
    halted = False
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="zsat-scan") as pool:
        pending: set[Future] = {pool.submit(walker.scan_dir, "")}
        while pending:
            done, pending = wait(pending, return_when=FIRST_COMPLETED)
            for fut in done:
                res = fut.result()
                if res is None:
                    halted = True
                    continue
                results.append(res)
                if not res.complete:
                    halted = True
                if walker.deadline.expired():
                    halted = halted or bool(res.subdirs)
                    continue
                for sub in res.subdirs:
                    pending.add(pool.submit(walker.scan_dir, sub))
    return results, halted


def _run(cfg: ScanConfig, taxonomy: Taxonomy, filtered: bool) -> TriageReport:
    started = time.monotonic()
    deadline = _Deadline(cfg.budget_ms)
    root = os.fspath(cfg.root)
    if not os.path.isdir(root):
        raise ScanError(f"scan root is not a directory: {root}")
    if not os.access(root, os.R_OK | os.X_OK):
        raise ScanError(f"scan root is not readable: {root}")

    effective = taxonomy.with_family_overrides(cfg.enabled_family_overrides)
    walker = _Walker(root, effective, deadline, filtered)
    if cfg.worker_count == 1:
        results, halted = _walk_sequential(walker)
    else:
        results, halted = _walk_parallel(walker, cfg.worker_count)

    stats = ScanStats()
    findings: list[Finding] = []
    for res in results:
        stats.dirs_seen += 1
        stats.files_seen += res.files_seen
        stats.bytes_seen += res.bytes_seen
        stats.files_matched += res.files_matched
        stats.warnings.extend(res.warnings)
        findings.extend(res.findings)
    stats.partial = halted
    stats.elapsed_ms = int((time.monotonic() - started) * 1000)
    if stats.partial:
        log.info("scan of %s halted on budget after %d ms", root, stats.elapsed_ms)

    mode = MODE_FILTERED if filtered else MODE_TYPE_ONLY
    return build_report(os.fspath(cfg.root), effective, stats, findings, mode,
                        taxonomy_digest=taxonomy.digest)


def scan(cfg: ScanConfig, taxonomy: Taxonomy) -> TriageReport:
    """Full triage: detection, proximity analysis and suspicion evaluation."""
    return _run(cfg, taxonomy, filtered=True)


def scan_type_only(cfg: ScanConfig, taxonomy: Taxonomy) -> TriageReport:
    """Baseline inventory: every file of an enabled family, no suspicion filtering."""
    return _run(cfg, taxonomy, filtered=False)

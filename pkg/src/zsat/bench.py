"""Filtered-versus-baseline timing comparison.

Absolute scan times depend on hardware and cache state; the ratio of the
filtered scan's median to the type-only scan's median on the same tree is
the number worth comparing across machines.
"""

from __future__ import annotations

import enum
import gc
import statistics
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from .ontology import Taxonomy
from .scanner import ScanConfig, scan, scan_type_only


class BenchMode(str, enum.Enum):
    TYPE_ONLY = "type_only"
    FILTERED = "filtered"


class IncomparableRunsError(ValueError):
    """Two benchmark records were not taken over the same file population."""


@dataclass(frozen=True)
class BenchRecord:
    mode: BenchMode
    elapsed_ms: tuple[int, ...]
    median_ms: int
    files_seen: int

    @classmethod
    def from_runs(cls, mode: BenchMode | str, elapsed_ms: Iterable[int], files_seen: Iterable[int]) -> BenchRecord:
        elapsed = tuple(int(e) for e in elapsed_ms)
        seen = set(files_seen)
        if not elapsed:
            raise ValueError("a benchmark record needs at least one run")
        if len(seen) != 1:
            raise IncomparableRunsError(f"files_seen differs between runs: {sorted(seen)}")
        return cls(BenchMode(mode), elapsed, int(round(statistics.median(elapsed))), seen.pop())

    def to_dict(self) -> dict[str, Any]:
        return {"mode": self.mode.value, "elapsed_ms": list(self.elapsed_ms),
                "median_ms": self.median_ms, "files_seen": self.files_seen}


def overhead_ratio(filtered: BenchRecord, baseline: BenchRecord) -> float:
    """filtered.median_ms / baseline.median_ms for runs over the same tree."""
    if filtered.files_seen != baseline.files_seen:
        raise IncomparableRunsError(
            f"files_seen differs: filtered={filtered.files_seen} baseline={baseline.files_seen}")
    if baseline.median_ms <= 0:
        raise ValueError("baseline median is zero; the corpus is too small to time")
    return filtered.median_ms / baseline.median_ms


def _timed_run(runner, cfg: ScanConfig, taxonomy: Taxonomy):
    # Like timeit: start from a clean heap and keep the cyclic collector out of the timed region.
    gc.collect()
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        return runner(cfg, taxonomy)
    finally:
        if was_enabled:
            gc.enable()


def run_bench(
    cfg: ScanConfig,
    taxonomy: Taxonomy,
    repeat: int = 3,
    modes: Sequence[BenchMode | str] = (BenchMode.TYPE_ONLY, BenchMode.FILTERED),
    warmup: int = 1,
) -> dict[str, Any]:
    """Run each mode ``repeat`` times, interleaved, and summarize.

    ``warmup`` untimed passes of every mode come first so the first timed
    run does not pay for cold caches. The order within each round alternates
    so neither mode always runs against the cache state the other one left
    behind.
    """
    if repeat < 1:
        raise ValueError("repeat must be >= 1")
    if warmup < 0:
        raise ValueError("warmup must be >= 0")
    modes = [BenchMode(m) for m in modes]
    runners = {BenchMode.TYPE_ONLY: scan_type_only, BenchMode.FILTERED: scan}
    for _ in range(warmup):
        for mode in modes:
            runners[mode](cfg, taxonomy)
    runs: list[dict[str, Any]] = []
    for i in range(repeat):
        order = modes if i % 2 == 0 else list(reversed(modes))
        for mode in order:
            report = _timed_run(runners[mode], cfg, taxonomy)
            runs.append({
                "mode": mode.value,
                "run": i,
                "elapsed_ms": report.stats.elapsed_ms,
                "files_seen": report.stats.files_seen,
                "findings_count": report.stats.findings_count,
                "partial": report.stats.partial,
            })

    out: dict[str, Any] = {"root": str(cfg.root), "repeat": repeat, "warmup": warmup, "runs": runs}
    records = {}
    for mode in modes:
        mine = [r for r in runs if r["mode"] == mode.value]
        rec = BenchRecord.from_runs(mode, (r["elapsed_ms"] for r in mine), (r["files_seen"] for r in mine))
        records[mode] = rec
        out[mode.value] = rec.to_dict()
    if BenchMode.TYPE_ONLY in records and BenchMode.FILTERED in records:
        out["ratio"] = overhead_ratio(records[BenchMode.FILTERED], records[BenchMode.TYPE_ONLY])
    return out

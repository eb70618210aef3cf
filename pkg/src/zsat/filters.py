"""Filter algebra over scanned files.

Four filter kinds exist: inclusion, exclusion, grouped (a directory mostly
made of one family) and isolated (a lone file of one family amid another).
Two filter results combine through one of the :class:`CombineMode` rules.
"""

from __future__ import annotations

import enum
import posixpath
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Union

from .ontology import GroupedParams, IsolatedParams
from .sigdetect import UNKNOWN, DetectedFormat


@dataclass(frozen=True)
class FileRecord:
    rel_path: str
    dir_path: str
    size_bytes: int
    extension: str
    detected: DetectedFormat

    @classmethod
    def create(cls, rel_path: str, size_bytes: int, detected: DetectedFormat) -> FileRecord:
        """Build a record, deriving ``dir_path`` and ``extension`` from ``rel_path``."""
        dir_path, name = posixpath.split(rel_path)
        return cls(rel_path, dir_path, size_bytes, split_extension(name)[1], detected)

    @property
    def name(self) -> str:
        return posixpath.basename(self.rel_path)

    @property
    def stem(self) -> str:
        return split_extension(self.name)[0]

    @property
    def family(self) -> str:
        return self.detected.family_name


def split_extension(name: str) -> tuple[str, str]:
    """Split a file name into (stem, lowercase extension without the dot).

    Same rule as ``posixpath.splitext``: leading dots belong to the stem, so
    ".bashrc" has no extension.
    """
    dot = name.rfind(".")
    if dot <= 0 or (name[0] == "." and not name[:dot].strip(".")):
        return name, ""
    return name[:dot], name[dot + 1:].lower()


class FileSet:
    """An immutable set of FileRecords keyed by ``rel_path``."""

    __slots__ = ("_members",)

    def __init__(self, records: Iterable[FileRecord] = ()):
        members: dict[str, FileRecord] = {}
        for rec in records:
            prev = members.get(rec.rel_path)
            if prev is not None and prev != rec:
                raise ValueError(f"conflicting records for {rec.rel_path!r}")
            members[rec.rel_path] = rec
        self._members = members

    @classmethod
    def _wrap(cls, members: dict[str, FileRecord]) -> FileSet:
        fs = cls.__new__(cls)
        fs._members = members
        return fs

    def __iter__(self) -> Iterator[FileRecord]:
        return iter(self._members.values())

    def __len__(self) -> int:
        return len(self._members)

    def __contains__(self, item: object) -> bool:
        if isinstance(item, FileRecord):
            return self._members.get(item.rel_path) == item
        return item in self._members

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FileSet):
            return NotImplemented
        return self._members == other._members

    def __repr__(self) -> str:
        return f"FileSet({sorted(self._members)!r})"

    def paths(self) -> frozenset[str]:
        return frozenset(self._members)

    def sorted(self) -> list[FileRecord]:
        return [self._members[k] for k in sorted(self._members)]

    def union(self, other: FileSet) -> FileSet:
        merged = dict(self._members)
        merged.update(other._members)
        return FileSet._wrap(merged)

    def intersection(self, other: FileSet) -> FileSet:
        return FileSet._wrap({k: v for k, v in self._members.items() if k in other._members})

    def difference(self, other: FileSet) -> FileSet:
        return FileSet._wrap({k: v for k, v in self._members.items() if k not in other._members})

    def symmetric_difference(self, other: FileSet) -> FileSet:
        return self.difference(other).union(other.difference(self))

    def filter(self, predicate: Callable[[FileRecord], bool]) -> FileSet:
        return FileSet._wrap({k: v for k, v in self._members.items() if predicate(v)})

    __or__ = union
    __and__ = intersection
    __sub__ = difference
    __xor__ = symmetric_difference


class CombineMode(str, enum.Enum):
    UNION = "UNION"
    SYMMETRIC_DIFFERENCE = "SYMMETRIC_DIFFERENCE"
    INTERSECTION = "INTERSECTION"
    LEFT_MINUS = "LEFT_MINUS"


Predicate = Callable[[FileRecord], bool]


@dataclass(frozen=True)
class Include:
    predicate: Predicate


@dataclass(frozen=True)
class Exclude:
    predicate: Predicate


@dataclass(frozen=True)
class Grouped:
    params: GroupedParams = field(default_factory=GroupedParams)


@dataclass(frozen=True)
class Isolated:
    params: IsolatedParams = field(default_factory=IsolatedParams)


@dataclass(frozen=True)
class Custom:
    """Extension point: any selection over the universe.

    The result is clipped to the universe, so custom selectors (for example
    a sibling-directory grouping) keep the subset guarantee of :func:`apply`.
    """

    select: Callable[[FileSet], FileSet]


@dataclass(frozen=True)
class Combine:
    left: FilterExpr
    right: FilterExpr
    mode: CombineMode


FilterExpr = Union[Include, Exclude, Grouped, Isolated, Custom, Combine]


def apply(expr: FilterExpr, universe: FileSet) -> FileSet:
    if isinstance(expr, Include):
        return universe.filter(expr.predicate)
    if isinstance(expr, Exclude):
        return universe.filter(lambda r: not expr.predicate(r))
    if isinstance(expr, Grouped):
        return grouped_members(universe, expr.params)
    if isinstance(expr, Isolated):
        return isolated_members(universe, expr.params)
    if isinstance(expr, Custom):
        return universe.intersection(expr.select(universe))
    if isinstance(expr, Combine):
        return combine(apply(expr.left, universe), apply(expr.right, universe), expr.mode)
    raise TypeError(f"not a filter expression: {expr!r}")


def combine(a: FileSet, b: FileSet, mode: CombineMode) -> FileSet:
    if mode is CombineMode.UNION:
        return a | b
    if mode is CombineMode.SYMMETRIC_DIFFERENCE:
        return a ^ b
    if mode is CombineMode.INTERSECTION:
        return a & b
    if mode is CombineMode.LEFT_MINUS:
        return a - b
    raise ValueError(f"unknown combine mode: {mode!r}")


# common predicates

def family_is(*names: str) -> Predicate:
    wanted = frozenset(names)
    return lambda r: r.detected.family_name in wanted


def format_is(*names: str) -> Predicate:
    wanted = frozenset(names)
    return lambda r: r.detected.format_name in wanted


def size_below(limit: int) -> Predicate:
    return lambda r: r.size_bytes < limit


def under_directory(prefix: str) -> Predicate:
    prefix = prefix.strip("/")
    return lambda r: r.dir_path == prefix or r.dir_path.startswith(prefix + "/")


# proximity analysis

@dataclass(frozen=True)
class DirHistogram:
    dir_path: str
    counts: dict[str, int]
    total: int

    def dominant(self, exclude: str | None = None) -> tuple[str, int] | None:
        """Most common family (ties broken by name), optionally ignoring one member of ``exclude``."""
        counts = dict(self.counts)
        if exclude is not None:
            counts[exclude] -= 1
        live = [(name, c) for name, c in counts.items() if c > 0]
        if not live:
            return None
        return min(live, key=lambda nc: (-nc[1], nc[0]))


def dir_histograms(universe: Iterable[FileRecord]) -> list[DirHistogram]:
    """One family histogram per directory, sorted by directory path."""
    per_dir: dict[str, Counter] = defaultdict(Counter)
    for rec in universe:
        per_dir[rec.dir_path][rec.detected.family_name] += 1
    return [
        DirHistogram(d, dict(sorted(c.items())), sum(c.values()))
        for d, c in sorted(per_dir.items())
    ]


def is_grouped(family: str, hist: DirHistogram, p: GroupedParams) -> bool:
    if family == UNKNOWN or hist.total < p.min_files:
        return False
    return hist.counts.get(family, 0) / hist.total >= p.homogeneity_threshold


def is_isolated(family: str, hist: DirHistogram, p: IsolatedParams) -> bool:
    if family == UNKNOWN or hist.counts.get(family, 0) != 1:
        return False
    others = hist.total - 1
    if others < p.min_other_files:
        return False
    dominant = hist.dominant(exclude=family)
    return dominant is not None and dominant[1] / others >= p.other_dominance


def grouped_members(universe: FileSet, p: GroupedParams) -> FileSet:
    hists = {h.dir_path: h for h in dir_histograms(universe)}
    return universe.filter(lambda r: is_grouped(r.family, hists[r.dir_path], p))


def isolated_members(universe: FileSet, p: IsolatedParams) -> FileSet:
    hists = {h.dir_path: h for h in dir_histograms(universe)}
    return universe.filter(lambda r: is_isolated(r.family, hists[r.dir_path], p))

"""File-type taxonomy: families, formats, signatures and suspicion criteria.

The taxonomy is loaded from a strict, versioned JSON document (see
``default_ontology.json`` for the shipped default). Loaded taxonomies are
immutable and may be shared freely between scanner workers.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from functools import cached_property
from importlib import resources
from typing import Any, Iterator, Mapping

SUPPORTED_VERSION = 1
HEADER_WINDOW = 64
MIN_SIGNATURE_LEN = 2
MAX_SIGNATURE_LEN = 16


class OntologyError(ValueError):
    """Base class for taxonomy configuration problems."""


class OntologyParseError(OntologyError):
    """The configuration text is not a well-formed taxonomy document."""


class OntologyValidationError(OntologyError):
    """The document parsed but breaks one or more taxonomy invariants."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


@dataclass(frozen=True)
class Violation:
    element: str
    rule: str

    def __str__(self) -> str:
        return f"{self.element}: {self.rule}"


@dataclass(frozen=True)
class Signature:
    """Magic bytes expected at a fixed offset in the file header.

    ``mask`` (same length as ``magic``) is ANDed with the header bytes before
    comparing, which lets a signature express bit-level patterns such as the
    MPEG audio frame sync.
    """

    offset: int
    magic: bytes
    mask: bytes | None = None

    def matches(self, header: bytes) -> bool:
        if self.mask is None:
            return header.startswith(self.magic, self.offset)
        end = self.offset + len(self.magic)
        if end > len(header):
            return False
        window = header[self.offset:end]
        return all((b & m) == s for b, m, s in zip(window, self.mask, self.magic))

    @property
    def lead_byte(self) -> int | None:
        """The exact value of header[0] this signature requires, if it pins one."""
        if self.offset != 0 or (self.mask is not None and self.mask[0] != 0xFF):
            return None
        return self.magic[0]


@dataclass(frozen=True)
class SuspicionCriteria:
    min_size_bytes: int
    keywords: tuple[str, ...] = ()
    use_location_hints: bool = True


@dataclass(frozen=True)
class Format:
    name: str
    extensions: tuple[str, ...]
    signatures: tuple[Signature, ...]
    criteria: SuspicionCriteria
    # True: every signature part must match (RIFF....AVI ). False: any one.
    match_all: bool = False

    def match_length(self, header: bytes) -> int:
        """Number of signature bytes that matched; 0 when the format does not match."""
        if self.match_all:
            if self.signatures and all(s.matches(header) for s in self.signatures):
                return sum(len(s.magic) for s in self.signatures)
            return 0
        return max((len(s.magic) for s in self.signatures if s.matches(header)), default=0)


@dataclass(frozen=True)
class Family:
    name: str
    enabled: bool
    formats: tuple[Format, ...]


@dataclass(frozen=True)
class LocationRules:
    exclude_prefixes: tuple[str, ...] = ("Windows/", "Program Files/")
    hint_patterns: tuple[str, ...] = ("/temp/", "/tmp/", "/.")

    @cached_property
    def _prefix_parts(self) -> tuple[tuple[str, ...], ...]:
        return tuple(_path_parts(p) for p in self.exclude_prefixes if _path_parts(p))

    @cached_property
    def _hints_lower(self) -> tuple[str, ...]:
        return tuple(p.lower() for p in self.hint_patterns)

    def is_excluded(self, rel_dir: str) -> bool:
        """True when ``rel_dir`` lies under one of the excluded prefixes.

        Comparison is per path component and case-insensitive, so
        ``windows/system32`` is excluded by ``Windows/`` but ``WindowsOld`` is not.
        """
        parts = _path_parts(rel_dir)
        return any(parts[: len(pre)] == pre for pre in self._prefix_parts)

    def matching_hint(self, rel_path: str) -> str | None:
        probe = "/" + rel_path.replace("\\", "/").lower()
        for pattern in self._hints_lower:
            if pattern in probe:
                return pattern
        return None


def _path_parts(path: str) -> tuple[str, ...]:
    return tuple(p.lower() for p in path.replace("\\", "/").split("/") if p)


@dataclass(frozen=True)
class GroupedParams:
    homogeneity_threshold: float = 0.9
    min_files: int = 10


@dataclass(frozen=True)
class IsolatedParams:
    min_other_files: int = 10
    other_dominance: float = 0.8


@dataclass(frozen=True)
class Taxonomy:
    version: int
    families: tuple[Family, ...]
    location_rules: LocationRules = field(default_factory=LocationRules)
    grouped_params: GroupedParams = field(default_factory=GroupedParams)
    isolated_params: IsolatedParams = field(default_factory=IsolatedParams)
    priority_threshold: int = 10

    def iter_formats(self) -> Iterator[tuple[Family, Format]]:
        for fam in self.families:
            for fmt in fam.formats:
                yield fam, fmt

    @cached_property
    def _by_extension(self) -> dict[str, Format]:
        index: dict[str, Format] = {}
        for _, fmt in self.iter_formats():
            for ext in fmt.extensions:
                index.setdefault(ext.lower(), fmt)
        return index

    @cached_property
    def _by_lead_byte(self) -> tuple[tuple[tuple[Family, Format], ...], ...]:
        # For each possible header[0], the formats that could match, in taxonomy order.
        buckets: list[list[tuple[Family, Format]]] = [[] for _ in range(256)]
        for fam, fmt in self.iter_formats():
            leads = {s.lead_byte for s in fmt.signatures}
            if fmt.match_all:
                pinned = {b for b in leads if b is not None}
                keys = range(256) if not pinned else pinned
            else:
                keys = range(256) if None in leads or not leads else leads
            for b in keys:
                buckets[b].append((fam, fmt))
        return tuple(tuple(b) for b in buckets)

    def candidates_for(self, header: bytes) -> tuple[tuple[Family, Format], ...]:
        """Formats whose signatures could match ``header``; a superset of the true matches."""
        if not header:
            return ()
        return self._by_lead_byte[header[0]]

    @cached_property
    def _by_name(self) -> dict[str, tuple[Family, Format]]:
        index: dict[str, tuple[Family, Format]] = {}
        for fam, fmt in self.iter_formats():
            index.setdefault(fmt.name, (fam, fmt))
        return index

    def format_for_extension(self, ext: str) -> Format | None:
        index = self._by_extension
        hit = index.get(ext)  # scanner passes lowercase, dotless extensions
        if hit is None and ext:
            norm = ext.lower().lstrip(".")
            if norm != ext:
                hit = index.get(norm)
        return hit

    def format_by_name(self, name: str) -> Format | None:
        hit = self._by_name.get(name)
        return hit[1] if hit else None

    def family_of(self, format_name: str) -> Family | None:
        hit = self._by_name.get(format_name)
        return hit[0] if hit else None

    def family(self, name: str) -> Family | None:
        for fam in self.families:
            if fam.name == name:
                return fam
        return None

    def is_enabled(self, family_name: str) -> bool:
        fam = self.family(family_name)
        return fam is not None and fam.enabled

    def with_family_overrides(self, overrides: Mapping[str, bool] | None) -> Taxonomy:
        """Return a copy with the ``enabled`` flag of the named families replaced."""
        if not overrides:
            return self
        known = {f.name for f in self.families}
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise OntologyError(f"unknown family in overrides: {', '.join(unknown)}")
        families = tuple(
            replace(f, enabled=bool(overrides[f.name])) if f.name in overrides else f
            for f in self.families
        )
        return replace(self, families=families)

    def to_dict(self) -> dict[str, Any]:
        return taxonomy_to_dict(self)

    def serialize(self) -> str:
        return serialize_taxonomy(self)

    @cached_property
    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return "sha256:" + hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# --------------------------------------------------------------------------
# parsing


def _check_keys(obj: Any, where: str, required: set[str], optional: set[str] = frozenset()) -> dict:
    if not isinstance(obj, dict):
        raise OntologyParseError(f"{where}: expected an object")
    missing = required - obj.keys()
    if missing:
        raise OntologyParseError(f"{where}: missing key(s) {', '.join(sorted(missing))}")
    extra = obj.keys() - required - optional
    if extra:
        raise OntologyParseError(f"{where}: unknown key(s) {', '.join(sorted(extra))}")
    return obj


def _int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise OntologyParseError(f"{where}: expected an integer")
    return value


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise OntologyParseError(f"{where}: expected a number")
    return float(value)


def _bool(value: Any, where: str) -> bool:
    if not isinstance(value, bool):
        raise OntologyParseError(f"{where}: expected true or false")
    return value


def _str(value: Any, where: str) -> str:
    if not isinstance(value, str):
        raise OntologyParseError(f"{where}: expected a string")
    return value


def _str_list(value: Any, where: str) -> tuple[str, ...]:
    if not isinstance(value, list):
        raise OntologyParseError(f"{where}: expected a list of strings")
    return tuple(_str(v, f"{where}[{i}]") for i, v in enumerate(value))


def _hex(value: Any, where: str) -> bytes:
    text = _str(value, where)
    if not text or text != text.upper() or len(text) % 2:
        raise OntologyParseError(f"{where}: expected uppercase hex with an even number of digits")
    try:
        return bytes.fromhex(text)
    except ValueError:
        raise OntologyParseError(f"{where}: invalid hex {text!r}") from None


def _parse_signature(obj: Any, where: str) -> Signature:
    _check_keys(obj, where, {"offset", "hex"}, {"mask"})
    magic = _hex(obj["hex"], f"{where}.hex")
    mask = _hex(obj["mask"], f"{where}.mask") if "mask" in obj else None
    return Signature(offset=_int(obj["offset"], f"{where}.offset"), magic=magic, mask=mask)


def _parse_format(obj: Any, where: str) -> Format:
    _check_keys(obj, where, {"name", "extensions", "signatures", "criteria"}, {"signature_match"})
    name = _str(obj["name"], f"{where}.name")
    where = f"format {name!r}"
    sigs = obj["signatures"]
    if not isinstance(sigs, list):
        raise OntologyParseError(f"{where}.signatures: expected a list")
    crit = _check_keys(obj["criteria"], f"{where}.criteria", {"min_size_bytes"}, {"keywords", "use_location_hints"})
    criteria = SuspicionCriteria(
        min_size_bytes=_int(crit["min_size_bytes"], f"{where}.criteria.min_size_bytes"),
        keywords=_str_list(crit.get("keywords", []), f"{where}.criteria.keywords"),
        use_location_hints=_bool(crit.get("use_location_hints", True), f"{where}.criteria.use_location_hints"),
    )
    mode = _str(obj.get("signature_match", "any"), f"{where}.signature_match")
    if mode not in ("any", "all"):
        raise OntologyParseError(f"{where}.signature_match: expected 'any' or 'all'")
    return Format(
        name=name,
        extensions=_str_list(obj["extensions"], f"{where}.extensions"),
        signatures=tuple(_parse_signature(s, f"{where}.signatures[{i}]") for i, s in enumerate(sigs)),
        criteria=criteria,
        match_all=mode == "all",
    )


def _parse_family(obj: Any, where: str) -> Family:
    _check_keys(obj, where, {"name", "formats"}, {"enabled"})
    name = _str(obj["name"], f"{where}.name")
    formats = obj["formats"]
    if not isinstance(formats, list):
        raise OntologyParseError(f"family {name!r}.formats: expected a list")
    return Family(
        name=name,
        enabled=_bool(obj.get("enabled", True), f"family {name!r}.enabled"),
        formats=tuple(_parse_format(f, f"family {name!r}.formats[{i}]") for i, f in enumerate(formats)),
    )


def parse_taxonomy(config_text: str) -> Taxonomy:
    """Build a Taxonomy from JSON text without checking invariants.

    Raises OntologyParseError for malformed JSON, wrong types, and unknown
    or missing keys. Use :func:`load_taxonomy` for a validated result.
    """
    try:
        doc = json.loads(config_text)
    except json.JSONDecodeError as exc:
        raise OntologyParseError(f"malformed JSON: {exc}") from None
    _check_keys(doc, "taxonomy", {"version", "families"},
                {"priority_threshold", "location_rules", "grouped", "isolated"})
    if not isinstance(doc["families"], list):
        raise OntologyParseError("taxonomy.families: expected a list")

    defaults_loc = LocationRules()
    loc = _check_keys(doc.get("location_rules", {}), "location_rules", set(),
                      {"exclude_prefixes", "hint_patterns"})
    grp = _check_keys(doc.get("grouped", {}), "grouped", set(), {"homogeneity_threshold", "min_files"})
    iso = _check_keys(doc.get("isolated", {}), "isolated", set(), {"min_other_files", "other_dominance"})

    return Taxonomy(
        version=_int(doc["version"], "taxonomy.version"),
        families=tuple(_parse_family(f, f"families[{i}]") for i, f in enumerate(doc["families"])),
        location_rules=LocationRules(
            exclude_prefixes=_str_list(loc.get("exclude_prefixes", list(defaults_loc.exclude_prefixes)),
                                       "location_rules.exclude_prefixes"),
            hint_patterns=_str_list(loc.get("hint_patterns", list(defaults_loc.hint_patterns)),
                                    "location_rules.hint_patterns"),
        ),
        grouped_params=GroupedParams(
            homogeneity_threshold=_number(grp.get("homogeneity_threshold", 0.9), "grouped.homogeneity_threshold"),
            min_files=_int(grp.get("min_files", 10), "grouped.min_files"),
        ),
        isolated_params=IsolatedParams(
            min_other_files=_int(iso.get("min_other_files", 10), "isolated.min_other_files"),
            other_dominance=_number(iso.get("other_dominance", 0.8), "isolated.other_dominance"),
        ),
        priority_threshold=_int(doc.get("priority_threshold", 10), "taxonomy.priority_threshold"),
    )


def load_taxonomy(config_text: str) -> Taxonomy:
    """Parse and validate a taxonomy document.

    Raises OntologyParseError or OntologyValidationError; the latter carries
    every violation found, each naming the offending element.
    """
    taxonomy = parse_taxonomy(config_text)
    violations = validate(taxonomy)
    if violations:
        raise OntologyValidationError(violations)
    return taxonomy


def default_config_text() -> str:
    return resources.files("zsat").joinpath("default_ontology.json").read_text(encoding="utf-8")


def default_taxonomy() -> Taxonomy:
    return load_taxonomy(default_config_text())


def format_for_extension(t: Taxonomy, ext: str) -> Format | None:
    return t.format_for_extension(ext)


# --------------------------------------------------------------------------
# validation


def validate(t: Taxonomy) -> list[Violation]:
    out: list[Violation] = []

    def bad(element: str, rule: str) -> None:
        out.append(Violation(element, rule))

    if t.version != SUPPORTED_VERSION:
        bad("version", f"unsupported version {t.version} (expected {SUPPORTED_VERSION})")
    if t.priority_threshold < 1:
        bad("priority_threshold", "must be >= 1")
    if not t.families:
        bad("families", "taxonomy has no families")

    seen_families: set[str] = set()
    seen_formats: set[str] = set()
    ext_owner: dict[str, str] = {}
    for fam in t.families:
        fname = f"family {fam.name!r}"
        if not fam.name:
            bad(fname, "name must be non-empty")
        if fam.name in seen_families:
            bad(fname, "duplicate family name")
        seen_families.add(fam.name)
        if not fam.formats:
            bad(fname, "family has no formats")
        for fmt in fam.formats:
            where = f"format {fmt.name!r}"
            if not fmt.name or fmt.name == "unknown":
                bad(where, "name must be non-empty and not 'unknown'")
            if fmt.name in seen_formats:
                bad(where, "duplicate format name")
            seen_formats.add(fmt.name)
            if not fmt.extensions:
                bad(where, "format has no extensions")
            for ext in fmt.extensions:
                if not ext or ext != ext.lower() or "." in ext or "/" in ext:
                    bad(f"extension {ext!r}", "must be non-empty lowercase without dots")
                if ext in ext_owner:
                    bad(f"extension {ext!r}", f"mapped by both {ext_owner[ext]!r} and {fmt.name!r}")
                else:
                    ext_owner[ext] = fmt.name
            if not fmt.signatures:
                bad(where, "format has no signatures")
            for i, sig in enumerate(fmt.signatures):
                swhere = f"{where} signature[{i}]"
                if not MIN_SIGNATURE_LEN <= len(sig.magic) <= MAX_SIGNATURE_LEN:
                    bad(swhere, f"length must be {MIN_SIGNATURE_LEN}..{MAX_SIGNATURE_LEN} bytes")
                if sig.offset < 0:
                    bad(swhere, "offset must be >= 0")
                if sig.offset + len(sig.magic) > HEADER_WINDOW:
                    bad(swhere, f"extends past the {HEADER_WINDOW}-byte header window")
                if sig.mask is not None and len(sig.mask) != len(sig.magic):
                    bad(swhere, "mask length differs from signature length")
            crit = fmt.criteria
            if crit.min_size_bytes < 0:
                bad(f"{where} criteria", "min_size_bytes must be >= 0")
            if any(not k for k in crit.keywords):
                bad(f"{where} criteria", "keywords must be non-empty strings")

    g = t.grouped_params
    if not 0 < g.homogeneity_threshold <= 1:
        bad("grouped.homogeneity_threshold", "must be in (0, 1]")
    if g.min_files < 2:
        bad("grouped.min_files", "must be >= 2")
    i = t.isolated_params
    if i.min_other_files < 1:
        bad("isolated.min_other_files", "must be >= 1")
    if not 0 <= i.other_dominance <= 1:
        bad("isolated.other_dominance", "must be in [0, 1]")
    for p in t.location_rules.exclude_prefixes:
        if not _path_parts(p):
            bad(f"location_rules.exclude_prefixes {p!r}", "prefix must name a directory")
    for p in t.location_rules.hint_patterns:
        if not p:
            bad("location_rules.hint_patterns", "patterns must be non-empty")
    return out


# --------------------------------------------------------------------------
# serialization


def _signature_to_dict(sig: Signature) -> dict[str, Any]:
    out: dict[str, Any] = {"offset": sig.offset, "hex": sig.magic.hex().upper()}
    if sig.mask is not None:
        out["mask"] = sig.mask.hex().upper()
    return out


def taxonomy_to_dict(t: Taxonomy) -> dict[str, Any]:
    families = []
    for fam in t.families:
        formats = []
        for fmt in fam.formats:
            entry: dict[str, Any] = {
                "name": fmt.name,
                "extensions": list(fmt.extensions),
                "signatures": [_signature_to_dict(s) for s in fmt.signatures],
                "criteria": {
                    "min_size_bytes": fmt.criteria.min_size_bytes,
                    "keywords": list(fmt.criteria.keywords),
                    "use_location_hints": fmt.criteria.use_location_hints,
                },
            }
            if fmt.match_all:
                entry["signature_match"] = "all"
            formats.append(entry)
        families.append({"name": fam.name, "enabled": fam.enabled, "formats": formats})
    return {
        "version": t.version,
        "priority_threshold": t.priority_threshold,
        "families": families,
        "location_rules": {
            "exclude_prefixes": list(t.location_rules.exclude_prefixes),
            "hint_patterns": list(t.location_rules.hint_patterns),
        },
        "grouped": {
            "homogeneity_threshold": t.grouped_params.homogeneity_threshold,
            "min_files": t.grouped_params.min_files,
        },
        "isolated": {
            "min_other_files": t.isolated_params.min_other_files,
            "other_dominance": t.isolated_params.other_dominance,
        },
    }


def serialize_taxonomy(t: Taxonomy) -> str:
    return json.dumps(taxonomy_to_dict(t), indent=2) + "\n"

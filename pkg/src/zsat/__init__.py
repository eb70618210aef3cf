"""Time-budgeted, ontology-driven forensic triage of an evidence directory tree."""

__version__ = "0.1.0"

from .ontology import Taxonomy, default_taxonomy, load_taxonomy, validate  # noqa: E402
from .report import TriageReport, deserialize, recommend, serialize  # noqa: E402
from .scanner import ScanConfig, ScanError, scan, scan_type_only  # noqa: E402

__all__ = [
    "ScanConfig",
    "ScanError",
    "Taxonomy",
    "TriageReport",
    "default_taxonomy",
    "deserialize",
    "load_taxonomy",
    "recommend",
    "scan",
    "scan_type_only",
    "serialize",
    "validate",
]

from __future__ import annotations

import contextlib
from dataclasses import dataclass

import pytest

from zsat.ontology import default_taxonomy

_ACCEPTANCE_LINES: list[str] = []


@dataclass
class _Check:
    detail: str = ""


@pytest.fixture(scope="session")
def taxonomy():
    return default_taxonomy()


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion; printed in the terminal summary."""

    @contextlib.contextmanager
    def criterion(cid: str, title: str):
        check = _Check()
        try:
            yield check
        except BaseException as exc:
            _ACCEPTANCE_LINES.append(f"{cid:<4} FAIL  {title}  {check.detail}  ({type(exc).__name__}: {exc})")
            raise
        _ACCEPTANCE_LINES.append(f"{cid:<4} PASS  {title}  {check.detail}")

    return criterion


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][1:])):
        terminalreporter.write_line(line)

from __future__ import annotations

from importlib import resources
from pathlib import Path

import pytest

from recipe_ner.corpus import Phrase

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return Path(str(resources.files("recipe_ner.data").joinpath("fixtures")))


def P(*pairs: str, id: str = "", source: str | None = None) -> Phrase:
    """``P("1/QUANTITY", "cup/UNIT")`` -> Phrase."""
    return Phrase.from_pairs([tuple(s.rsplit("/", 1)) for s in pairs], id=id, source=source)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

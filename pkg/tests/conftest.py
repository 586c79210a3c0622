import pytest

from fr3chan.registry import LinkClass, load_embedded


@pytest.fixture(scope="session")
def registry():
    return load_embedded()


def lc(text: str) -> LinkClass:
    """``"SMa-B15-NLOS"`` -> LinkClass."""
    scenario, band, vis = text.split("-")
    return LinkClass.of(scenario, band, vis)


_ACCEPTANCE: list[tuple[str, bool, str, list[str]]] = []


@pytest.fixture
def criterion():
    """Register one acceptance line: ``criterion(tag, passed, summary, details)``."""
    def record(tag, passed, summary, details=()):
        _ACCEPTANCE.append((tag, bool(passed), summary, list(details)))
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for tag, ok, summary, details in _ACCEPTANCE:
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  {tag}  {summary}")
        for line in details:
            tr.write_line(f"        {line}")

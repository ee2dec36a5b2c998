import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dcit.pipeline import DEMO_META, DEMO_PANEL, SCENARIO_DIR  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def demo_panel_path():
    return DEMO_PANEL


@pytest.fixture
def demo_meta_path():
    return DEMO_META


@pytest.fixture
def scenario_dir():
    return SCENARIO_DIR


@pytest.fixture
def write_csv(tmp_path):
    def _write(text, name="panel.csv"):
        p = tmp_path / name
        p.write_text(text)
        return p

    return _write


@pytest.fixture
def criterion():
    """Record a one-line PASS/FAIL verdict for an acceptance criterion."""

    def _record(number, title, ok, detail=""):
        verdict = "PASS" if ok else "FAIL"
        ACCEPTANCE_LINES.append(f"[{verdict}] criterion {number:>2}: {title}" + (f" ({detail})" if detail else ""))
        assert ok, f"criterion {number} failed: {detail}"

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)

"""Shared fixtures: the acceptance gate recorder and its summary section."""
import pytest


class GateRecorder:
    """Collects one PASS/FAIL/SKIP line per acceptance criterion."""

    def __init__(self):
        self.lines: list[str] = []

    def record(self, name: str, ok: bool, detail: str = "") -> None:
        status = "PASS" if ok else "FAIL"
        line = f"[{status}] {name}"
        if detail:
            line += f"  ({detail})"
        self.lines.append(line)
        print(line)
        assert ok, line

    def skip(self, name: str, why: str) -> None:
        self.lines.append(f"[SKIP] {name}  ({why})")
        pytest.skip(why)


_RECORDER = GateRecorder()


@pytest.fixture(scope="session")
def gate() -> GateRecorder:
    return _RECORDER


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _RECORDER.lines:
        terminalreporter.section("acceptance criteria")
        for line in _RECORDER.lines:
            terminalreporter.write_line(line)

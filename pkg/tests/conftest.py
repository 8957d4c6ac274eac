import pytest

ACCEPTANCE = []


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion result: ``criterion(number, title, ok, detail)``."""
    def record(number, title, ok, detail=""):
        ACCEPTANCE.append((number, title, bool(ok), detail))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(ACCEPTANCE, key=lambda r: (r[0], r[1])):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}  {detail}".rstrip())

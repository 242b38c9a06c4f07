from collections import defaultdict

import pytest

# criterion number -> list of (sub-check, ok, detail)
ACCEPTANCE = defaultdict(list)


@pytest.fixture
def criterion():
    def record(number: int, check: str, ok: bool, detail: str = ""):
        ACCEPTANCE[number].append((check, bool(ok), detail))
        print(f"criterion {number:2d} [{check}]: {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, f"criterion {number} [{check}] failed: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[number]
        status = "PASS" if all(ok for _, ok, _ in checks) else "FAIL"
        failed = [c for c, ok, _ in checks if not ok]
        suffix = f" (failed: {', '.join(failed)})" if failed else ""
        tr.write_line(f"criterion {number:2d}: {status}{suffix}")
        for check, ok, detail in checks:
            tr.write_line(f"    {'ok  ' if ok else 'FAIL'} {check}: {detail}")

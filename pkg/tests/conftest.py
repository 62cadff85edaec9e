"""Shared fixtures plus the acceptance-criteria summary printer."""

ACCEPTANCE_RESULTS: dict[int, tuple[str, bool]] = {}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for idx in sorted(ACCEPTANCE_RESULTS):
        desc, ok = ACCEPTANCE_RESULTS[idx]
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {idx:02d} - {desc}")

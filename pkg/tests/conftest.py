"""Shared test plumbing: the acceptance suite records one line per criterion
and this hook echoes them after the run, where capture cannot swallow them."""

CRITERION_LINES = {}


def record_criterion(k, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {k}: {detail}"
    CRITERION_LINES[k] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERION_LINES:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for k in sorted(CRITERION_LINES):
        terminalreporter.write_line(CRITERION_LINES[k])

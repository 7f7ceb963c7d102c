from __future__ import annotations

import sys


def pytest_terminal_summary(terminalreporter):
    module = next((m for name, m in list(sys.modules.items()) if name.endswith("test_acceptance") and hasattr(m, "summary_lines")), None)
    if module is None or not module.OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.summary_lines():
        terminalreporter.write_line(line)

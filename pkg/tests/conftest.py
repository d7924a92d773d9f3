import re

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)$")


def pytest_terminal_summary(terminalreporter):
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            m = _CRITERION.search(getattr(rep, "nodeid", ""))
            if m and rep.when == "call" or (m and outcome == "error"):
                rows.append((int(m.group(1)), m.group(2), "PASS" if outcome == "passed" else "FAIL",
                             getattr(rep, "duration", 0.0)))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, status, dur in sorted(rows):
        terminalreporter.write_line(f"criterion {num:2d} {name:<22} {status}  ({dur:.1f} s)")

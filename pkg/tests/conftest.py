import re

_CRITERIA = {
    1: "critical threshold sweep",
    2: "fixed points k=2, theta=4",
    3: "transfer spectrum k=2, theta=4",
    4: "state values k=2, theta=4",
    5: "limit magnetization k=2, theta=4",
    6: "compatibility",
    7: "uniqueness regime",
    8: "recursion residuals",
    9: "spin-flip antisymmetry",
    10: "trajectory classification",
    11: "verify suites",
}


def pytest_terminal_summary(terminalreporter):
    outcome: dict[int, bool] = {}
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", getattr(rep, "nodeid", ""))
            if not m or rep.when not in ("setup", "call", "teardown"):
                continue
            n = int(m.group(1))
            ok = status == "passed"
            outcome[n] = outcome.get(n, True) and ok
    if not outcome:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        if n in outcome:
            terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if outcome[n] else 'FAIL'}  {_CRITERIA[n]}")

import os
import sys

sys.path.insert(0, os.path.dirname(__file__))


def pytest_terminal_summary(terminalreporter):
    mod = next((m for k, m in list(sys.modules.items()) if k.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if results is None:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in range(1, 10):
        parts = results.get(crit)
        if not parts:
            tr.write_line(f"criterion {crit}: NOT RUN")
            continue
        status = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        tr.write_line(f"criterion {crit}: {status}  " + "; ".join(
            f"{name}={'pass' if ok else 'FAIL'}" for name, ok, _ in parts))
        for name, ok, detail in parts:
            tr.write_line(f"    [{name}] {detail}")

"""Collects one verdict line per acceptance criterion and prints them at the end of the run."""

ACCEPTANCE = []


def record(number, passed, detail):
    ACCEPTANCE.append((number, bool(passed), detail))
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")

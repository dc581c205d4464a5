import pytest

# (criterion, part, ok, detail) rows filled by tests/test_acceptance.py
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit, part, ok, detail in ACCEPTANCE:
        tr.write_line(f"  [{'PASS' if ok else 'FAIL'}] C{crit} {part}: {detail}")
    crits = sorted({c for c, *_ in ACCEPTANCE})
    for c in crits:
        rows = [r for r in ACCEPTANCE if r[0] == c]
        n_ok = sum(r[2] for r in rows)
        tr.write_line(f"CRITERION {c}: {'PASS' if n_ok == len(rows) else 'FAIL'} ({n_ok}/{len(rows)} parts)")

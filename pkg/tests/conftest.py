"""Per-criterion summary lines for the acceptance suite."""

ACCEPTANCE_FILE = "test_acceptance.py"

CRITERIA = {
    "test_c1": "criterion 1: identity blinding",
    "test_c2": "criterion 2: oracle equivalence",
    "test_c3": "criterion 3: greedy equivalence",
    "test_c4": "criterion 4: fpca correctness",
    "test_c5": "criterion 5: regression exactness",
    "test_c6": "criterion 6: consistency harness",
    "test_c7": "criterion 7: case studies",
    "test_c8": "criterion 8: determinism",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes: dict[str, set] = {}
    for status in ("passed", "failed", "error", "skipped"):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if ACCEPTANCE_FILE not in nodeid:
                continue
            test_name = nodeid.split("::")[-1]
            for prefix in CRITERIA:
                if test_name.startswith(prefix):
                    outcomes.setdefault(prefix, set()).add(status)
    if not outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for prefix, label in CRITERIA.items():
        seen = outcomes.get(prefix)
        if seen is None:
            continue
        if seen & {"failed", "error"}:
            verdict = "FAIL"
        elif seen == {"skipped"}:
            verdict = "SKIP (datasets not provided)"
        else:
            verdict = "PASS"
        terminalreporter.write_line(f"{label}: {verdict}")

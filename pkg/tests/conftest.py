import pytest

ACCEPTANCE: dict[str, tuple[str, str]] = {}


def record(criterion: str, passed: bool, detail: str, expected_failure: bool = False):
    status = "PASS" if passed else ("FAIL (expected, see decisions ledger)" if expected_failure else "FAIL")
    ACCEPTANCE[criterion] = (status, detail)
    print(f"criterion {criterion}: {status} | {detail}")


@pytest.fixture
def acceptance_record():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    groups: dict[int, list[str]] = {}
    for key in ACCEPTANCE:
        groups.setdefault(int(key.rstrip("abcdefgh")), []).append(key)
    for num in sorted(groups):
        keys = sorted(groups[num])
        overall = "PASS" if all(ACCEPTANCE[k][0] == "PASS" for k in keys) else "FAIL"
        terminalreporter.write_line(f"criterion {num}: {overall}")
        for k in keys:
            status, detail = ACCEPTANCE[k]
            terminalreporter.write_line(f"    {k}: {status} | {detail}")

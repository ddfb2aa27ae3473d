import pytest

# (id, name) -> (passed, detail), filled by the acceptance tests
ACCEPTANCE = {}


@pytest.fixture
def criterion():
    def record(cid, name, ok, detail):
        ACCEPTANCE[cid] = (name, bool(ok), detail)
        assert ok, f"criterion {cid} ({name}) failed: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        name, ok, detail = ACCEPTANCE[cid]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {cid:2d} {name}: {detail}")
    n_ok = sum(ok for _, ok, _ in ACCEPTANCE.values())
    terminalreporter.write_line(f"{n_ok}/{len(ACCEPTANCE)} acceptance criteria passed")

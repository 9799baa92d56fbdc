import math

import pytest

from ringbethe import SearchWindow, SystemParams

REFERENCE = SystemParams(xi=4.0, xi_b=4.0 / math.sqrt(2.0))

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (bool(passed), detail)
    print(f"[acceptance {criterion}] {'PASS' if passed else 'FAIL'}: {detail}")


@pytest.fixture(scope="session")
def reference_params():
    return REFERENCE


@pytest.fixture(scope="session")
def reference_roots():
    from ringbethe import scan_roots

    return scan_roots(REFERENCE, SearchWindow(k_max=12 * math.pi))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")

import math

import pytest

from murmurations import arithcore, kernels

# criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def table_small():
    return arithcore.build_tables(200_000, small_limit=2_000)


@pytest.fixture(scope="session")
def table_1e6():
    return arithcore.build_tables(1_000_000)


@pytest.fixture(scope="session")
def profile_200_40():
    return kernels.make_profile(200, 40, x_max=4 * math.pi * 2 * 200)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def trend_reports():
    """Full reports at E=[1,2], M=round(sqrt K) for the K trend (a few minutes)."""
    from murmurations import murmur
    return {K: murmur.murmuration_report(K, round(K ** 0.5), (1.0, 2.0)) for K in (100, 200, 400)}

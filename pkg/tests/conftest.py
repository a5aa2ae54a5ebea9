import re
from collections import OrderedDict

import pytest

from infogeo import GridSpec, build_gridworld

_CRITERIA = OrderedDict()
_CRIT_NAME = re.compile(r"test_criterion_(\d+)")


@pytest.fixture(scope="session")
def grid5():
    return GridSpec(5, 5, "manhattan")


@pytest.fixture(scope="session")
def moore7():
    return GridSpec(7, 7, "moore")


@pytest.fixture(scope="session")
def mdp5_center():
    return build_gridworld(GridSpec(5, 5, "manhattan", 12))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    match = _CRIT_NAME.match(item.name)
    if not match:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number = int(match.group(1))
        doc = (getattr(item.function, "__doc__", None) or item.name).strip().splitlines()[0]
        _CRITERIA.setdefault(number, []).append((item.name, doc, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number, parts in sorted(_CRITERIA.items()):
        ok = all(outcome == "passed" for _, _, outcome in parts)
        title = parts[0][1].split(":")[0]
        tr.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}")
        if len(parts) > 1 or not ok:
            for name, doc, outcome in parts:
                tr.write_line(f"    {outcome.upper():7s} {name}: {doc}")


CORNER_BETAS = (100.0, 5.0, 0.3, 0.1)


@pytest.fixture(scope="session")
def corner_matrices():
    """Full 11x11 Moore pairwise matrices for the contraction checks, with build time."""
    import time

    from infogeo.geometry import default_jobs, pairwise_free_energy

    spec = GridSpec(11, 11, "moore")
    start = time.perf_counter()
    mats = {beta: pairwise_free_energy(spec, beta, jobs=default_jobs()) for beta in CORNER_BETAS}
    return mats, time.perf_counter() - start

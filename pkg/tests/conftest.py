"""Shared fixtures and the acceptance-suite summary.

Expensive artifacts (benchmark trace sets, the trained gridworld policy)
are session-scoped so the acceptance suite and the module tests share them.
After the run, one PASS/FAIL line is printed per acceptance criterion.
"""

from __future__ import annotations

import pytest

from lcomplete import (
    affine_benchmark,
    build_slca,
    gridworld_benchmark,
    hybrid_benchmark,
    sample_traces,
    train_gridworld_policy,
)

HYBRID_SEED = 11
LINEAR_SEED = 5
GRID_TRAIN_SEED = 0
GRID_SAMPLE_SEED = 21


@pytest.fixture(scope="session")
def hybrid_env():
    return hybrid_benchmark(lam=0.01)


@pytest.fixture(scope="session")
def hybrid_traces_h9(hybrid_env):
    system, partition, dist = hybrid_env
    return sample_traces(system, partition, dist, 10_000, 9, seed=HYBRID_SEED)


@pytest.fixture(scope="session")
def hybrid_slca(hybrid_traces_h9):
    return build_slca(hybrid_traces_h9, 2)

@pytest.fixture(scope="session")
def linear_env():
    return affine_benchmark()


@pytest.fixture(scope="session")
def linear_traces_h4(linear_env):
    system, partition, dist = linear_env
    return sample_traces(system, partition, dist, 10_000, 4, seed=LINEAR_SEED)


@pytest.fixture(scope="session")
def grid_env():
    return gridworld_benchmark()


@pytest.fixture(scope="session")
def grid_policy(grid_env):
    grid, _, _ = grid_env
    return train_gridworld_policy(grid, episodes=100_000, seed=GRID_TRAIN_SEED)


@pytest.fixture(scope="session")
def grid_traces_h40(grid_env, grid_policy):
    grid, partition, dist = grid_env
    trained = grid.with_policy(grid_policy)
    return sample_traces(trained, partition, dist, 10_000, 40, seed=GRID_SAMPLE_SEED)


# ---------------------------------------------------------------------------
# acceptance summary


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(n, desc): links a test to one acceptance criterion"
    )
    config._acceptance_outcomes = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    n = marker.kwargs.get("n")
    desc = marker.kwargs.get("desc", "")
    store = item.config._acceptance_outcomes.setdefault(n, {"desc": desc, "results": []})
    if hasattr(report, "wasxfail"):
        status = "XFAIL(documented discrepancy)" if report.skipped or report.outcome == "passed" else "XPASS"
    else:
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
    store["results"].append(status)


CRITERION_TITLES = {
    1: "phi-formula reproduction",
    2: "gamma-bar arithmetic",
    3: "risk-bound solver: reported values and monotonicity",
    4: "hybrid end-to-end run",
    5: "exact 1-D oracle: probabilities and settling depth",
    6: "planar experiment: states, inclusion, violation bound",
    7: "path planning: policy, verification, extension, certificate",
    8: "oracle-equivalence property suites",
    9: "violation-rate calibration",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes = getattr(config, "_acceptance_outcomes", {})
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(outcomes):
        results = outcomes[n]["results"]
        if all(r == "PASS" for r in results):
            status = "PASS"
        elif any(r == "FAIL" for r in results):
            status = "FAIL"
        elif any(r.startswith("XFAIL") for r in results):
            status = "PASS (with documented-discrepancy xfails)"
        else:
            status = ",".join(sorted(set(results)))
        title = CRITERION_TITLES.get(n, outcomes[n]["desc"])
        terminalreporter.write_line(f"criterion {n}: {status} - {title}")

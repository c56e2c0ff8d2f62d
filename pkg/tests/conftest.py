import time

import pytest

from impurity_decay.experiments import (
    ExperimentConfig,
    calibrate_conventions,
    run_position_map,
    run_table1,
    run_vacancy_scan,
)
from impurity_decay.experiments.common import case_spec

# lines printed by the acceptance module, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def config():
    return ExperimentConfig(threads=4)


@pytest.fixture(scope="session")
def table1_run(config):
    start = time.perf_counter()
    conventions = calibrate_conventions(config)
    records = run_table1(config, conventions)
    elapsed = time.perf_counter() - start
    return {"records": records, "conventions": conventions, "elapsed": elapsed}


@pytest.fixture(scope="session")
def vacancy_curves(config):
    return run_vacancy_scan(config)


@pytest.fixture(scope="session")
def position_maps(config):
    maps, times = {}, {}
    for kind in ("square", "triangular", "oblique", "rectangular", "honeycomb"):
        spec = case_spec(kind, "interstitial", config)
        start = time.perf_counter()
        maps[kind] = run_position_map(spec, 41, config)
        times[kind] = time.perf_counter() - start
    return maps, times

"""Shared fixtures: memoized full-scenario runs for the acceptance suite."""

import time

import pytest

from ific.scenarios import SCENARIOS, make_controller, run_scenario


class ScenarioRunner:
    """Runs (scenario, controller) pairs once and caches the traces.

    Several acceptance criteria score the same runs; sharing them keeps the
    suite inside its wall-clock budget.  Wall times are recorded per run so
    the budget itself can be asserted.
    """

    def __init__(self):
        self._traces = {}
        self.wall_times = {}

    def config(self, scenario: str):
        return SCENARIOS[scenario]()

    def get(self, scenario: str, controller: str = "ific"):
        key = (scenario, controller)
        if key not in self._traces:
            cfg = SCENARIOS[scenario]()
            ctrl = make_controller(controller, cfg.params)
            start = time.perf_counter()
            self._traces[key] = run_scenario(cfg, ctrl)
            self.wall_times[key] = time.perf_counter() - start
        return self._traces[key]


@pytest.fixture(scope="session")
def runner():
    return ScenarioRunner()

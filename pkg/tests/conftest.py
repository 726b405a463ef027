import sys
from functools import lru_cache
from pathlib import Path

import pytest
from hypothesis import settings

from urbanflux import RunConfig, generate_case, run, synth_weather, tile
from urbanflux.morphology import CASES

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@lru_cache(maxsize=None)
def case_run(name: str, dt: float = 60.0, tiling: tuple[int, int] | None = None):
    """One reported day of a reference case with default parameters, cached per session."""
    scene = generate_case(name)
    if tiling:
        scene = tile(scene, *tiling)
    return run(scene, synth_weather(), config=RunConfig(dt_couple=dt), name=name)


@pytest.fixture(scope="session")
def weather():
    return synth_weather()


@pytest.fixture(scope="session")
def case_runs():
    return {name: case_run(name) for name in CASES}


ACCEPTANCE_LINES: dict[str, str] = {}


def report(criterion: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES[criterion] = f"criterion {criterion}: {'PASS' if passed else 'FAIL'}  {detail}"
    print(ACCEPTANCE_LINES[criterion])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])

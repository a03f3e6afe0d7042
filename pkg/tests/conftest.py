import re
from dataclasses import dataclass
from importlib import resources

import pytest

from twomatrix import cli
from twomatrix import correction as C
from twomatrix.torusmap import find_endpoints

EXAMPLES = resources.files("twomatrix").joinpath("data", "examples")


@dataclass
class Solved:
    model: object
    params: object
    eps: object
    locs: list


def solve_example(name):
    run = cli.build_run(cli.load_config(str(EXAMPLES.joinpath(f"{name}.json"))))
    p, _ = cli.solve_run(run)
    eps = find_endpoints(p)
    return Solved(run.model, p, eps, C.all_local_data(p, eps))


@pytest.fixture(scope="session")
def sym():
    return solve_example("symmetric")


@pytest.fixture(scope="session")
def asym():
    return solve_example("asymmetric")


# one summary line per acceptance criterion

_criteria = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2))
    if report.failed or report.when == "call":
        _criteria.setdefault(key, "PASS" if report.passed else "FAIL")
        if report.failed:
            _criteria[key] = "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for (n, name), outcome in sorted(_criteria.items()):
        terminalreporter.write_line(f"criterion {n:2d} {outcome}  {name.replace('_', ' ')}")

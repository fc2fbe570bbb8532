import pytest
from hypothesis import settings

from torsiontraces import BUNDLED_SPECS

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")

ACCEPTANCE_RESULTS: dict[str, tuple[str, str]] = {}


@pytest.fixture
def dinf():
    return BUNDLED_SPECS["dinfinity"]


@pytest.fixture
def z3z():
    return BUNDLED_SPECS["z3_star_z"]


@pytest.fixture
def z2z3():
    return BUNDLED_SPECS["z2_star_z3"]


@pytest.fixture
def z234():
    return BUNDLED_SPECS["z2_star_z3_star_z4"]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: int(k[1:])):
        status, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{key} {status} {detail}")

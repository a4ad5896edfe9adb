import pytest
from hypothesis import HealthCheck, settings

from robin_spectra.geometry import arc_length_reparametrize, preset

settings.register_profile("default", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def ellipse():
    return arc_length_reparametrize(preset("ellipse:2:1"), 1024)


@pytest.fixture(scope="session")
def disc():
    return arc_length_reparametrize(preset("circle:1"), 256)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "klkit", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("klkit")


@pytest.fixture(scope="session")
def std_normal():
    from klkit.density import make_density
    return make_density("normal")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        print(line)
        lines.append(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

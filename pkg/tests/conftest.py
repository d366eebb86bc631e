import numpy as np
import pytest

from dbarprod import PlanarDomain, ProductDomain, ellipse, polydisc


@pytest.fixture(scope="session")
def bidisc():
    return polydisc(2)


@pytest.fixture(scope="session")
def disc_ellipse():
    return ProductDomain((polydisc(2).slices[0], PlanarDomain((ellipse(2.0, 1.0),))))


@pytest.fixture(scope="session")
def ellipse_disc():
    return ProductDomain((PlanarDomain((ellipse(2.0, 1.0),)), polydisc(2).slices[1]))


def sample_points(n, radius=0.7, dim=2, seed=0):
    """Deterministic points with every coordinate inside |z| < radius."""
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.uniform(size=(n, dim)))
    t = rng.uniform(0, 2 * np.pi, size=(n, dim))
    return r * np.exp(1j * t)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE = {}


def record(criterion, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
    ACCEPTANCE[criterion] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])

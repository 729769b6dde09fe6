import numpy as np
import pytest

from gsmemlab import dataset as ds

ACCEPTANCE = []


def record(criterion, passed, detail):
    ACCEPTANCE.append((criterion, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")


@pytest.fixture(scope="session")
def default_data():
    return ds.generate(ds.GeneratorConfig())


@pytest.fixture(scope="session")
def default_split(default_data):
    return ds.split(default_data, 0.7, 42)


@pytest.fixture
def small_data():
    rng = np.random.default_rng(7)
    benign = np.column_stack([rng.uniform(800e6, 900e6, 30), rng.normal(1.0, 0.2, 30)])
    attack = np.column_stack([850e6 + rng.normal(0, 1e6, 30), rng.normal(2.5, 0.3, 30)])
    return ds.Dataset(np.vstack([benign, np.abs(attack)]), [0] * 30 + [1] * 30)

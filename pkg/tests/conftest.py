import numpy as np
import pytest

from spinopm.cli import build_model, config_load, with_axis

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def preset_config():
    return config_load("rb87_serf")


@pytest.fixture(scope="session")
def preset(preset_config):
    return build_model(preset_config)


@pytest.fixture(scope="session")
def preset_factory(preset_config):
    cache = {}

    def make(**changes):
        key = tuple(sorted(changes.items()))
        if key not in cache:
            cfg = preset_config
            for k, v in changes.items():
                cfg = with_axis(cfg, k, v)
            cache[key] = build_model(cfg)
        return cache[key]

    return make


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_density_matrix(dim, rng):
    X = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = X @ X.conj().T
    return rho / np.trace(rho)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

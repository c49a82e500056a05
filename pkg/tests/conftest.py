import numpy as np
import pytest

from csimatch import SystemConfig, deployment_streams, draw_channels, generate_deployment


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_net():
    """K=3, 2x2 antennas, one stream; returns (config, instance, channels)."""
    cfg = SystemConfig(K=3, M=2, N=2, d=1, T=10_000, sigma2=1e-6, seed=7)
    g, f = deployment_streams(cfg.seed, 0)
    return cfg, generate_deployment(cfg, g), draw_channels(cfg, f)


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])

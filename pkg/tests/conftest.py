import numpy as np
import pytest

from resmute.netmodel import Scenario


@pytest.fixture
def symmetric_pair():
    """Two single-service cells, unit cross gains, noise 0.1.

    Closed-form reference values used across the suite:
      utility at theta=1 is 1/log2(1 + 1/1.1) solved self-consistently,
      the asymptotic eigenvalue is ln 2, and the transition budget is
      (1/log2 11)/ln 2.
    """
    return Scenario(
        n_cells=2,
        serving_cell=[0, 1],
        bandwidth_hz=1.0,
        power_density=[1.0, 1.0],
        demand_bps=[1.0, 1.0],
        gains=[[1.0, 1.0], [1.0, 1.0]],
        noise_density=[0.1, 0.1],
        neighbors=({1}, {0}),
        duplex_mode=("d", "d"),
    )


@pytest.fixture
def mixed_pair():
    """Two cells, one downlink and one uplink service each."""
    gains = np.array([
        [1.0, 0.0, 0.3, 0.2],
        [0.0, 1.0, 0.1, 0.4],
        [0.2, 0.3, 1.0, 0.0],
        [0.1, 0.2, 0.0, 1.0],
    ])
    return Scenario(
        n_cells=2,
        serving_cell=[0, 0, 1, 1],
        bandwidth_hz=1.0,
        power_density=[1.0, 0.1, 1.0, 0.1],
        demand_bps=[1.0, 0.5, 1.0, 0.5],
        gains=gains,
        noise_density=[0.05, 0.05, 0.05, 0.05],
        neighbors=({1}, {0}),
        duplex_mode=("d", "u", "d", "u"),
    )

import numpy as np
import pytest

from pacesim import ArrayGeometry, ChannelSnapshot, Mpc, SystemParams
from pacesim.harness import (default_arraying_config, default_pll_config,
                             default_system_params)


@pytest.fixture(scope="session")
def params():
    """Reference system: 1024 subcarriers, 1 us symbols, 30 GHz carrier."""
    return default_system_params(n0=2.03e-8)


@pytest.fixture(scope="session")
def pll_config(params):
    return default_pll_config(params)


@pytest.fixture(scope="session")
def arraying_config(params):
    return default_arraying_config(params)


def single_path_snapshot(rx=(4, 2), tx=(3, 2), alpha=1.0 + 0j, tau=0.0,
                         tau_data=None, rx_azi=0.3, rx_ele=1.2,
                         tx_azi=-0.4, tx_ele=1.5, beam="aligned"):
    """One-MPC snapshot helper for unit tests."""
    rx_geom = ArrayGeometry.half_wavelength(*rx)
    tx_geom = ArrayGeometry.half_wavelength(*tx)
    from pacesim import array_response
    if beam == "aligned":
        t = array_response(tx_geom, tx_azi, tx_ele)
        t = t / np.linalg.norm(t)
    else:
        t = np.asarray(beam, dtype=complex)
    mpc = Mpc(alpha, tau, tau if tau_data is None else tau_data,
              rx_azi, rx_ele, tx_azi, tx_ele)
    return ChannelSnapshot((mpc,), rx_geom, tx_geom, t)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)

import numpy as np
import pytest

from monopo.cavity import CavitySpec
from monopo.dispersion import CrystalSpec
from monopo.squeezing import SqueezingParams


@pytest.fixture
def crystal():
    return CrystalSpec()


@pytest.fixture
def opo1():
    return CavitySpec(output_coupler_T=0.118, intra_cavity_loss_L=0.008)


@pytest.fixture
def params1():
    return SqueezingParams(
        kappa=0.968, oc_T=0.118, loss_L=0.008, f0=82e6,
        theta_tilde=np.deg2rad(2.0), p_threshold=0.283,
    )

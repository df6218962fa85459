import numpy as np
import pytest

from magcool.figures import FIG2_CMI, FIG2_MCM, FIG4A_CMI, FIG4A_MCM


@pytest.fixture
def fig2_cmi():
    return FIG2_CMI


@pytest.fixture
def fig2_mcm():
    return FIG2_MCM


@pytest.fixture
def fig4a_cmi():
    return FIG4A_CMI


@pytest.fixture
def fig4a_mcm():
    return FIG4A_MCM


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)

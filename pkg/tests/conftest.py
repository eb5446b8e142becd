import pytest

import adxlab as ax


@pytest.fixture(scope="session")
def flat():
    return ax.flat_psd(0.5)


@pytest.fixture(scope="session")
def tri():
    return ax.triangular_psd(0.5)


@pytest.fixture(scope="session")
def ou():
    return ax.ou_psd(1.0)


@pytest.fixture(scope="session")
def bimodal():
    # two raised-cosine lobes on (0.3, 0.4) and (-0.4, -0.3)
    return ax.multimodal_psd([(0.35, 0.1)])


@pytest.fixture(scope="session")
def lloyd_256():
    return ax.lloyd(ax.standard_normal, 256, tol=1e-9, max_iter=20000)


@pytest.fixture(scope="session")
def flat_ensemble():
    return ax.synthesize(ax.flat_psd(0.5), duration=256.0, dense_grid_rate=4.0,
                         trials=200, master_seed=20240817)

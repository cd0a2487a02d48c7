import numpy as np
import pytest

from artifact.dynamics import default_grid, integrate
from artifact.photonics import donor_photon, ion_photon

from cases import DONOR, ION
from oracles import expm_propagate

ORACLE_STRIDE = 200


def checkpoints(n: int) -> np.ndarray:
    idx = np.arange(0, n, ORACLE_STRIDE)
    return idx if idx[-1] == n - 1 else np.append(idx, n - 1)


@pytest.fixture(scope="session")
def fig4_grid():
    return default_grid(DONOR, ION)


@pytest.fixture(scope="session")
def fig4_trajectories(fig4_grid):
    return integrate(DONOR, fig4_grid), integrate(ION, fig4_grid)


@pytest.fixture(scope="session")
def fig4_photons(fig4_trajectories):
    d, i = fig4_trajectories
    return donor_photon(d, DONOR), ion_photon(i, ION)


@pytest.fixture(scope="session")
def fig4_donor_oracle():
    """Brute-force donor solution at 1e-4 ns micro-steps on the donor's own default window."""
    traj = integrate(DONOR)
    idx = checkpoints(len(traj))
    amps, occ = expm_propagate(DONOR, traj.times[idx], h=1e-4)
    return traj, idx, amps, occ


@pytest.fixture(scope="session")
def fig4_ion_oracle():
    traj = integrate(ION)
    idx = checkpoints(len(traj))
    amps, occ = expm_propagate(ION, traj.times[idx], h=1e-4)
    return traj, idx, amps, occ

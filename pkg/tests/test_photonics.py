import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artifact.dynamics import AmplitudeTrajectory, IonParams, TimeGrid, integrate, integrate_ion
from artifact.errors import NoPhotonError
from artifact.photonics import PhotonWavefunction, donor_photon, ion_photon, overlap, photon_wavefunction, write_pair_csv
from artifact.pulse import PulseShape

from cases import DONOR, ION


def _gauss(t, t0, w, phase=0.0):
    a = np.exp(-((t - t0) ** 2) / (4 * w * w) + 1j * phase) / (2 * math.pi * w * w) ** 0.25
    return a


def test_pure_exponential_decay_is_one_photon():
    gamma = 1 / 8.1
    off = PulseShape(1.0, 1.0, 0.0, 0.0, 0.0)
    traj = integrate_ion(IonParams(off, gamma), TimeGrid(0.0, 400.0, max_step=0.01), initial=[0.0, 1.0])
    ph = ion_photon(traj, IonParams(off, gamma))
    assert ph.p_emit == pytest.approx(1.0, abs=1e-6)
    np.testing.assert_allclose(ph.amplitude, math.sqrt(gamma) * np.exp(-gamma * traj.times / 2) / math.sqrt(ph.p_emit),
                               atol=1e-9)


def test_no_photon_without_drive():
    off = IonParams(PulseShape(1.0, 1.0, 5.0, 0.0, 0.0))
    with pytest.raises(NoPhotonError, match="no photon emitted"):
        ion_photon(integrate(off), off)


def test_fig4_photons_normalised(fig4_photons):
    for ph in fig4_photons:
        assert ph.norm() == pytest.approx(1.0, abs=1e-6)


def test_donor_emission_matches_oracle(fig4_donor_oracle):
    traj, idx, amps, occ = fig4_donor_oracle
    p_oracle = DONOR.kappa * occ[-1, 2]
    assert donor_photon(traj, DONOR).p_emit == pytest.approx(p_oracle, rel=1e-6)
    assert traj.emitted()[-1, 2] == pytest.approx(p_oracle, rel=1e-6)
    # the printed drive sits in the weak-excitation regime
    assert 0.01 < p_oracle < 0.2


def test_fig4_overlap_direct(fig4_photons):
    donor, ion = fig4_photons
    o = overlap(ion, donor)
    assert o.real >= 0.95
    assert abs(o) <= 1 + 1e-6


def test_self_overlap_and_disjoint():
    t = np.linspace(0, 100, 5001)
    a = PhotonWavefunction(t, _gauss(t, 30, 3), 0.1)
    assert overlap(a, a) == pytest.approx(1.0, abs=1e-9)
    t2 = np.linspace(200, 300, 5001)
    b = PhotonWavefunction(t2, _gauss(t2, 250, 3), 0.1)
    with pytest.warns(RuntimeWarning):
        assert overlap(a, b) == 0


def test_overlap_on_different_grids():
    t1 = np.linspace(0, 100, 4001)
    t2 = np.linspace(-10, 90, 3001)
    a = PhotonWavefunction(t1, _gauss(t1, 40, 4, 0.3), 0.1)
    b = PhotonWavefunction(t2, _gauss(t2, 42, 4), 0.1)
    expected = math.exp(-4 / (8 * 16)) * np.exp(-0.3j)
    assert abs(overlap(a, b) - expected) < 1e-6


@settings(max_examples=50, deadline=None)
@given(t0=st.floats(20, 80), w=st.floats(1, 10), phase=st.floats(-3, 3), chirp=st.floats(-0.5, 0.5),
       t1=st.floats(20, 80), w1=st.floats(1, 10))
def test_overlap_hermitian_and_bounded(t0, w, phase, chirp, t1, w1):
    t = np.linspace(-40, 140, 6001)
    a = PhotonWavefunction(t, _gauss(t, t0, w, phase) * np.exp(1j * chirp * t), 0.05)
    b = PhotonWavefunction(t, _gauss(t, t1, w1), 0.05)
    ab, ba = overlap(a, b), overlap(b, a)
    assert abs(ab - np.conj(ba)) < 1e-9
    assert abs(ab) <= 1 + 1e-6


def test_phase_covariance_of_overlap(fig4_grid, fig4_photons):
    donor, ion = fig4_photons
    o = overlap(ion, donor)
    delta = 1.234
    shifted = DONOR.with_pulse(DONOR.pulse.replace(theta0=DONOR.pulse.theta0 + delta))
    o2 = overlap(ion, donor_photon(integrate(shifted, fig4_grid), shifted))
    assert abs(o2 - o * np.exp(-1j * delta)) < 1e-8


def test_truncated_window_warns():
    grid = TimeGrid(ION.pulse.start_time(), ION.pulse.tau + 5.0)
    traj = integrate(ION, grid)
    with pytest.warns(RuntimeWarning, match="truncated"):
        ion_photon(traj, ION)


def test_csv_outputs(tmp_path, fig4_photons):
    donor, ion = fig4_photons
    donor.to_csv(tmp_path / "d.csv")
    data = np.loadtxt(tmp_path / "d.csv", delimiter=",", skiprows=1)
    np.testing.assert_array_equal(data[:, 1] + 1j * data[:, 2], donor.amplitude)
    write_pair_csv(tmp_path / "pair.csv", ion, donor)
    assert (tmp_path / "pair.csv").read_text().startswith("t,re_A_ion")


def test_p_emit_range_checked():
    with pytest.raises(ValueError):
        PhotonWavefunction(np.array([0.0, 1.0]), np.zeros(2, complex), 1.5)

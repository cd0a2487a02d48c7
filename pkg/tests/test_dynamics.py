import math

import numpy as np
import pytest

from artifact.dynamics import (AmplitudeTrajectory, DonorParams, IonParams, TimeGrid, default_grid, default_window,
                               integrate, integrate_donor, integrate_ion)
from artifact.errors import StepSizeError, WindowError
from artifact.pulse import PulseShape, ghz, mhz

from cases import DONOR, ION, random_donor, random_ion


def test_donor_matches_oracle(fig4_donor_oracle):
    traj, idx, amps, occ = fig4_donor_oracle
    assert np.max(np.abs(traj.amplitudes[idx] - amps)) < 1e-6
    assert np.max(np.abs(traj.amplitudes[-1] - amps[-1])) < 1e-6
    assert np.max(np.abs(traj.occupation_integrals[idx] - occ)) < 1e-6


def test_ion_matches_oracle(fig4_ion_oracle):
    traj, idx, amps, occ = fig4_ion_oracle
    assert np.max(np.abs(traj.amplitudes[idx] - amps)) < 1e-6
    assert np.max(np.abs(traj.occupation_integrals[idx] - occ)) < 1e-6


@pytest.mark.parametrize("method", ["radau", "dopri5"])
def test_probability_budget(method):
    rng = np.random.default_rng(1)
    d = random_donor(rng)
    for system in (d, random_ion(rng)):
        traj = integrate(system, method=method)
        assert np.max(np.abs(traj.probability_budget() - 1.0)) < 1e-8


def test_methods_agree():
    rng = np.random.default_rng(2)
    d = random_donor(rng, delta_range=(ghz(10.0), ghz(30.0)))
    g = default_grid(d)
    a = integrate(d, g, method="radau").amplitudes
    b = integrate(d, g, method="dopri5").amplitudes
    assert np.max(np.abs(a - b)) < 1e-7


def test_unitary_limit_conserves_norm():
    d = DonorParams(delta=ghz(50.0), g=ghz(10.0), kappa=0.0, gamma_in=0.0, pulse=DONOR.pulse)
    grid = TimeGrid(-30.0, 150.0)
    traj = integrate_donor(d, grid)
    norm = np.sum(np.abs(traj.amplitudes) ** 2, axis=1)
    assert np.max(np.abs(norm - 1.0)) < 1e-9
    ion = IonParams(pulse=ION.pulse, gamma_yb=0.0)
    traj = integrate_ion(ion, TimeGrid(-20.0, 80.0))
    assert np.max(np.abs(np.sum(np.abs(traj.amplitudes) ** 2, axis=1) - 1.0)) < 1e-9


def test_resonant_rabi_closed_form():
    # no decay, no chirp: a0 = cos(A/2), ae = -i exp(-i theta0) sin(A/2) with A the running pulse area
    p = PulseShape(3.0, 4.0, 25.0, 2.0, omega_max=0.4, theta0=0.7)
    traj = integrate_ion(IonParams(pulse=p, gamma_yb=0.0), TimeGrid(0.0, 60.0, max_step=0.01))
    area = p.omega_max * (math.sqrt(2 * math.pi) * (p.sigma1 + p.sigma2) / 2 + p.t_hold)
    a_end = traj.amplitudes[-1]
    assert abs(a_end[0] - math.cos(area / 2)) < 1e-8
    assert abs(a_end[1] - (-1j * np.exp(-1j * p.theta0) * math.sin(area / 2))) < 1e-8


def test_free_decay_closed_form():
    gamma = 1 / 8.1
    off = PulseShape(1.0, 1.0, 0.0, 0.0, 0.0)
    grid = TimeGrid(0.0, 100.0, max_step=0.1)
    traj = integrate_ion(IonParams(pulse=off, gamma_yb=gamma), grid, initial=[0.0, 1.0])
    np.testing.assert_allclose(traj.amplitudes[:, 1], np.exp(-gamma * traj.times / 2), atol=1e-9)
    np.testing.assert_allclose(traj.emitted()[:, 1], 1 - np.exp(-gamma * traj.times), atol=1e-9)


def test_weak_drive_scaling_is_quadratic():
    rng = np.random.default_rng(3)
    d = random_donor(rng)
    weak = d.with_pulse(d.pulse.replace(omega_max=ghz(0.05)))
    p = [integrate(weak.with_pulse(weak.pulse.replace(omega_max=s * weak.pulse.omega_max))).emitted()[-1, 2]
         for s in (1.0, 0.5)]
    assert p[1] / p[0] == pytest.approx(0.25, rel=1e-3)


def test_gauge_rotation_of_excited_amplitudes():
    delta = 0.83
    g = default_grid(DONOR)
    a = integrate(DONOR, g).amplitudes
    b = integrate(DONOR.with_pulse(DONOR.pulse.replace(theta0=DONOR.pulse.theta0 + delta)), g).amplitudes
    np.testing.assert_allclose(b[:, 0], a[:, 0], atol=1e-9)
    np.testing.assert_allclose(b[:, 1:], a[:, 1:] * np.exp(-1j * delta), atol=1e-9)


def test_window_start_must_precede_pulse():
    with pytest.raises(WindowError):
        integrate(DONOR, TimeGrid(DONOR.pulse.tau - 1.0, 200.0))


def test_default_window_covers_pulse_and_tail():
    start, end = default_window(DONOR)
    assert start <= DONOR.pulse.start_time()
    assert end > DONOR.pulse.end_time() + 20 / DONOR.slowest_decay() - 1e-9


def test_step_budget_failure_is_reported(monkeypatch):
    import artifact.dynamics as dyn
    monkeypatch.setattr(dyn, "MAX_STEPS", 10)
    with pytest.raises(StepSizeError):
        integrate(DONOR)


def test_trajectory_rejects_bad_times():
    with pytest.raises(ValueError):
        AmplitudeTrajectory(np.array([0.0, 0.0]), np.zeros((2, 2), complex), np.zeros((2, 2)), np.zeros(2))


def test_trajectory_csv_roundtrip(tmp_path):
    traj = integrate(ION)
    path = tmp_path / "t.csv"
    traj.to_csv(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    np.testing.assert_array_equal(data[:, 0], traj.times)
    np.testing.assert_array_equal(data[:, 3], traj.amplitudes[:, 1].real)
    assert path.read_text().splitlines()[0] == "t,re_a0,im_a0,re_ae,im_ae"


def test_bad_cavity_flag():
    assert DONOR.bad_cavity()
    assert DONOR.raman_rate == pytest.approx(ghz(3.75))
    assert not DonorParams(0.0, ghz(15.0), ghz(20.0), DONOR.pulse).bad_cavity()


def test_invalid_rates_rejected():
    with pytest.raises(ValueError):
        DonorParams(0.0, -1.0, 1.0, DONOR.pulse)
    with pytest.raises(ValueError):
        IonParams(ION.pulse, gamma_yb=math.inf)
    with pytest.raises(ValueError):
        TimeGrid(5.0, 1.0)
    with pytest.raises(ValueError):
        integrate(ION, method="euler")

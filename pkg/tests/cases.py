"""Shared parameter sets for the tests."""

import math

import numpy as np

from artifact.dynamics import DonorParams, IonParams
from artifact.pulse import TWO_PI, PulseShape, ghz, mhz

DONOR_PULSE = PulseShape(sigma1=8.9, sigma2=16.0, tau=35.8, t_hold=0.85, omega_max=ghz(2.9),
                         theta0=TWO_PI * -0.15, theta1=mhz(6.9))
ION_PULSE = PulseShape(sigma1=7.0, sigma2=6.4, tau=28.0, t_hold=3.9, omega_max=mhz(8.1),
                       theta0=TWO_PI * 0.5, theta1=0.0)

DONOR = DonorParams(delta=ghz(200.0), g=ghz(15.0), kappa=ghz(60.0), pulse=DONOR_PULSE, gamma_in=1 / 1.4)
ION = IonParams(pulse=ION_PULSE, gamma_yb=1 / 8.1)


def oracle_step(system) -> float:
    """Micro-step for the brute-force propagator, scaled to the generator norm."""
    norm = np.linalg.norm(system.generator(), 2) + 2 * system.pulse.omega_max
    return min(1e-3, 0.5 / norm)


def random_pulse(rng, omega_range, width_range=(2.0, 8.0), chirp=mhz(10.0)):
    s1, s2 = rng.uniform(*width_range, size=2)
    return PulseShape(
        sigma1=float(s1), sigma2=float(s2), tau=float(rng.uniform(10.0, 30.0)), t_hold=float(rng.uniform(0.0, 3.0)),
        omega_max=float(rng.uniform(*omega_range)), theta0=float(rng.uniform(-math.pi, math.pi)),
        theta1=float(rng.uniform(-chirp, chirp)),
    )


def random_donor(rng, delta_range=(ghz(10.0), ghz(100.0))) -> DonorParams:
    """Donor inside the bad-cavity region: kappa >= 3 g^2/kappa and g^2/kappa >= 3 gamma_in."""
    gamma = 1 / 1.4
    kappa = float(rng.uniform(ghz(20.0), ghz(100.0)))
    raman = float(np.exp(rng.uniform(math.log(3 * gamma), math.log(kappa / 3))))
    delta = float(rng.uniform(*delta_range)) * float(rng.choice([-1.0, 1.0]))
    pulse = random_pulse(rng, (ghz(0.2), ghz(3.0)))
    d = DonorParams(delta=delta, g=math.sqrt(raman * kappa), kappa=kappa, pulse=pulse, gamma_in=gamma)
    assert d.bad_cavity()
    return d


def random_ion(rng) -> IonParams:
    return IonParams(pulse=random_pulse(rng, (mhz(2.0), mhz(40.0))), gamma_yb=1 / 8.1)

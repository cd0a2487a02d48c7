"""Shaped excitation envelopes.

A pulse is a Gaussian rise, a flat hold at the peak and a Gaussian fall,
multiplied by a linearly chirped phase ``exp(i*(theta0 + theta1*t))``.
Times are in ns and angular frequencies in rad/ns throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

TWO_PI = 2.0 * math.pi


def ghz(value: float) -> float:
    """Angular frequency in rad/ns for ``2*pi x value GHz``."""
    return TWO_PI * value


def mhz(value: float) -> float:
    """Angular frequency in rad/ns for ``2*pi x value MHz``."""
    return TWO_PI * value * 1e-3


@dataclass(frozen=True)
class PulseShape:
    sigma1: float
    sigma2: float
    tau: float
    t_hold: float
    omega_max: float
    theta0: float = 0.0
    theta1: float = 0.0

    def __post_init__(self):
        if not self.sigma1 > 0 or not self.sigma2 > 0:
            raise ValueError(f"pulse widths must be positive, got sigma1={self.sigma1}, sigma2={self.sigma2}")
        if not self.t_hold >= 0:
            raise ValueError(f"t_hold must be >= 0, got {self.t_hold}")
        if not self.omega_max >= 0:
            raise ValueError(f"omega_max must be >= 0, got {self.omega_max}")
        for name in ("tau", "theta0", "theta1"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def fall_start(self) -> float:
        return self.tau + self.t_hold

    def replace(self, **changes) -> "PulseShape":
        return replace(self, **changes)

    def as_array(self) -> np.ndarray:
        """Parameters packed in field order, as consumed by the compiled integrators."""
        return np.array(
            [self.sigma1, self.sigma2, self.tau, self.t_hold, self.omega_max, self.theta0, self.theta1],
            dtype=np.float64,
        )

    def magnitude(self, t):
        return np.abs(envelope_at(self, t))

    def start_time(self, rel_level: float = 1e-6, margin: float = 6.0) -> float:
        """Earliest time worth simulating: ``margin`` rise widths before the peak.

        ``margin`` is raised if needed so that the envelope there is below
        ``rel_level * omega_max``.
        """
        k = max(margin, math.sqrt(-2.0 * math.log(rel_level)))
        return self.tau - k * self.sigma1

    def end_time(self, margin: float = 6.0) -> float:
        return self.fall_start + margin * self.sigma2


def envelope_at(pulse: PulseShape, t):
    """Complex Rabi envelope of ``pulse`` at time(s) ``t``.

    Scalars give a Python complex, arrays give a complex ndarray of the same shape.
    """
    tt = np.asarray(t, dtype=np.float64)
    rise = (tt - pulse.tau) / pulse.sigma1
    fall = (tt - pulse.fall_start) / pulse.sigma2
    mag = np.where(
        tt < pulse.tau,
        np.exp(-0.5 * rise * rise),
        np.where(tt <= pulse.fall_start, 1.0, np.exp(-0.5 * fall * fall)),
    )
    out = pulse.omega_max * mag * np.exp(1j * (pulse.theta0 + pulse.theta1 * tt))
    if out.ndim == 0:
        return complex(out)
    return out

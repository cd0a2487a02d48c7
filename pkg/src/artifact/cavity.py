"""Cavity design space: (Q, V) to (g, kappa, C) and the pulse-shaping feasibility regions.

Mode volumes are dimensionless, in units of ``(lambda/n)^3``. Rates are in rad/ns.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Union

import numpy as np
from scipy.optimize import brentq

from .dynamics import GAMMA_IN

SPEED_OF_LIGHT = 0.299792458  # m/ns
PURCELL_PREFACTOR = 3.0 / (4.0 * math.pi**2)

OUTSIDE, GREEN, BLUE = "outside", "green", "blue"


@dataclass(frozen=True)
class CavityDesign:
    q_factor: float
    mode_volume: float
    wavelength: float = 369e-9  # m
    refractive_index: float = 2.3
    gamma: float = GAMMA_IN

    def __post_init__(self):
        if not self.q_factor > 0:
            raise ValueError("q_factor must be positive")
        if not self.mode_volume > 0:
            raise ValueError("mode_volume must be positive")
        if not self.refractive_index >= 1:
            raise ValueError("refractive_index must be >= 1")
        if not (self.wavelength > 0 and self.gamma > 0):
            raise ValueError("wavelength and gamma must be positive")

    @property
    def omega(self) -> float:
        """Optical angular frequency in rad/ns."""
        return 2.0 * math.pi * SPEED_OF_LIGHT / self.wavelength


class CavityRates(NamedTuple):
    g: float
    kappa: float
    cooperativity: float


def cooperativity(g: float, kappa: float, gamma: float = GAMMA_IN) -> float:
    return g * g / (kappa * gamma)


def cavity_rates(d: CavityDesign) -> CavityRates:
    kappa = d.omega / d.q_factor
    c = PURCELL_PREFACTOR * d.q_factor / d.mode_volume
    g = math.sqrt(c * kappa * d.gamma)
    return CavityRates(g, kappa, c)


def classify_rates(g: float, kappa: float, c: float) -> str:
    # closed boundaries
    if c >= 10.0 and math.sqrt(10.0) * g <= kappa:
        return BLUE
    if c >= 1.0 and g <= kappa:
        return GREEN
    return OUTSIDE


def classify_region(d: CavityDesign) -> str:
    return classify_rates(*cavity_rates(d))


def region_map(q_values: Iterable[float], v_values: Iterable[float], **design_kwargs) -> list[dict]:
    """One row per (Q, V) pair, Q varying slowest."""
    rows = []
    for q in q_values:
        for v in v_values:
            d = CavityDesign(float(q), float(v), **design_kwargs)
            g, kappa, c = cavity_rates(d)
            rows.append({"Q": d.q_factor, "V": d.mode_volume, "g": g, "kappa": kappa, "C": c,
                         "region": classify_rates(g, kappa, c)})
    return rows


def write_region_map(path: Union[str, Path], rows: list[dict]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["Q", "V", "g", "kappa", "C", "region"])
        for r in rows:
            writer.writerow([repr(r["Q"]), repr(r["V"]), repr(r["g"]), repr(r["kappa"]), repr(r["C"]), r["region"]])


def cooperativity_edge(q_factor: float, level: float, v_bounds=(1e-6, 1e12), **design_kwargs) -> float:
    """Mode volume at which C crosses ``level`` for the given Q, found by root bracketing in log V."""
    def f(log_v):
        d = CavityDesign(q_factor, math.exp(log_v), **design_kwargs)
        return math.log(cavity_rates(d).cooperativity) - math.log(level)

    lo, hi = math.log(v_bounds[0]), math.log(v_bounds[1])
    return math.exp(brentq(f, lo, hi, xtol=1e-14, rtol=1e-15))


def loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    """Least-squares slope of log y against log x."""
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])

"""Emitted-photon temporal wavefunctions and their overlap."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import PchipInterpolator

from .dynamics import AmplitudeTrajectory, DonorParams, IonParams
from .errors import NoPhotonError

MIN_EMISSION = 1e-12
NORM_TOL = 1e-6


@dataclass(frozen=True)
class PhotonWavefunction:
    times: np.ndarray
    amplitude: np.ndarray
    p_emit: float

    def __post_init__(self):
        if not 0.0 <= self.p_emit <= 1.0 + 1e-9:
            raise ValueError(f"p_emit must lie in [0, 1], got {self.p_emit}")

    def norm(self) -> float:
        return float(trapezoid(np.abs(self.amplitude) ** 2, self.times))

    def density(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2

    def rotated(self, phase: float) -> "PhotonWavefunction":
        return PhotonWavefunction(self.times, self.amplitude * np.exp(1j * phase), self.p_emit)

    def to_csv(self, path: Union[str, Path]) -> None:
        a = self.amplitude
        np.savetxt(
            path,
            np.column_stack([self.times, a.real, a.imag, np.abs(a) ** 2]),
            delimiter=",", header="t,re_A,im_A,abs_A_sq", comments="", fmt="%.17g",
        )


def photon_wavefunction(traj: AmplitudeTrajectory, emission_rate: float, channel_index: int) -> PhotonWavefunction:
    """Normalised photon amplitude ``sqrt(rate) a_ch(t) / sqrt(p_emit)``.

    ``p_emit = rate * int |a_ch|^2 dt`` by trapezoidal quadrature on the
    trajectory's samples, so the result is normalised exactly on that grid.
    """
    a = np.asarray(traj.amplitudes[:, channel_index])
    p_emit = float(emission_rate * trapezoid(np.abs(a) ** 2, traj.times))
    if not p_emit > MIN_EMISSION:
        raise NoPhotonError(f"no photon emitted on channel {channel_index} (p_emit = {p_emit:.3g})")
    peak = np.max(np.abs(a))
    if abs(a[-1]) > 1e-3 * peak:
        warnings.warn(
            f"photon amplitude at window end is {abs(a[-1]) / peak:.2g} of its peak; the wavefunction is truncated",
            RuntimeWarning, stacklevel=2,
        )
    amp = np.sqrt(emission_rate / p_emit) * a
    return PhotonWavefunction(np.asarray(traj.times).copy(), amp, min(p_emit, 1.0))


def donor_photon(traj: AmplitudeTrajectory, params: DonorParams) -> PhotonWavefunction:
    """Photon leaking from the cavity at rate kappa."""
    return photon_wavefunction(traj, params.kappa, 2)


def ion_photon(traj: AmplitudeTrajectory, params: IonParams) -> PhotonWavefunction:
    return photon_wavefunction(traj, params.gamma_yb, 1)


def _resample(psi: PhotonWavefunction, grid: np.ndarray) -> np.ndarray:
    out = np.zeros(grid.shape, dtype=np.complex128)
    inside = (grid >= psi.times[0]) & (grid <= psi.times[-1])
    if np.any(inside):
        t = grid[inside]
        out[inside] = PchipInterpolator(psi.times, psi.amplitude.real)(t) + 1j * PchipInterpolator(psi.times, psi.amplitude.imag)(t)
    return out


def _same_grid(a: PhotonWavefunction, b: PhotonWavefunction) -> bool:
    return a.times.shape == b.times.shape and np.array_equal(a.times, b.times)


def overlap(a: PhotonWavefunction, b: PhotonWavefunction, max_refinements: int = 4) -> complex:
    """``O = int conj(a(t)) b(t) dt``.

    Wavefunctions on different grids are resampled (monotone cubic, real and
    imaginary parts separately) onto the union of both grids; the union grid is
    bisected until both resampled norms are within 1e-6 of one, or the
    refinement budget runs out.
    """
    if _same_grid(a, b):
        return complex(trapezoid(np.conj(a.amplitude) * b.amplitude, a.times))

    if a.times[-1] <= b.times[0] or b.times[-1] <= a.times[0]:
        warnings.warn("photon time grids do not overlap; the overlap is zero", RuntimeWarning, stacklevel=2)
        return 0j

    grid = np.union1d(a.times, b.times)
    for _ in range(max_refinements + 1):
        ra, rb = _resample(a, grid), _resample(b, grid)
        na = trapezoid(np.abs(ra) ** 2, grid)
        nb = trapezoid(np.abs(rb) ** 2, grid)
        if abs(na - 1.0) < NORM_TOL and abs(nb - 1.0) < NORM_TOL:
            break
        grid = np.sort(np.concatenate([grid, 0.5 * (grid[1:] + grid[:-1])]))
    return complex(trapezoid(np.conj(ra) * rb, grid))


def write_pair_csv(path: Union[str, Path], ion: PhotonWavefunction, donor: PhotonWavefunction) -> None:
    """Both wavefunctions on one time axis: the data behind a side-by-side comparison plot."""
    if _same_grid(ion, donor):
        grid, ai, ad = ion.times, ion.amplitude, donor.amplitude
    else:
        grid = np.union1d(ion.times, donor.times)
        ai, ad = _resample(ion, grid), _resample(donor, grid)
    np.savetxt(
        path,
        np.column_stack([grid, ai.real, ai.imag, np.abs(ai) ** 2, ad.real, ad.imag, np.abs(ad) ** 2]),
        delimiter=",", header="t,re_A_ion,im_A_ion,abs_A_ion_sq,re_A_donor,im_A_donor,abs_A_donor_sq",
        comments="", fmt="%.17g",
    )

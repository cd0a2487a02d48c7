"""Complex-amplitude dynamics of the cavity-coupled donor and the trapped ion.

Donor levels are ordered ``[|0>, |e>, |1>]`` (|1> carries the cavity photon),
ion levels ``[|0>, |e>``]. Both obey ``i da/dt = (1/2) M(t) a`` with decay
entering as negative imaginary diagonal terms, so ``sum |a|^2`` falls by
exactly the emitted probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from . import _kernels
from .errors import StepSizeError, WindowError
from .pulse import PulseShape, envelope_at

GAMMA_IN = 1.0 / 1.4  # 1/ns, D0X lifetime 1.4 ns
GAMMA_YB = 1.0 / 8.1  # 1/ns, 2P1/2 lifetime 8.1 ns

DEFAULT_MAX_STEP = 0.05  # ns
DEFAULT_TOLERANCE = 1e-10
MAX_STEPS = 20_000_000
TAIL_DECAY_TIMES = 20.0

METHODS = ("radau", "dopri5")


@dataclass(frozen=True)
class DonorParams:
    delta: float
    g: float
    kappa: float
    pulse: PulseShape
    gamma_in: float = GAMMA_IN

    def __post_init__(self):
        for name in ("g", "kappa", "gamma_in"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be a finite nonnegative rate, got {value}")
        if not math.isfinite(self.delta):
            raise ValueError("delta must be finite")

    @property
    def levels(self) -> tuple:
        return ("0", "e", "1")

    @property
    def decay_rates(self) -> np.ndarray:
        return np.array([0.0, self.gamma_in, self.kappa])

    @property
    def raman_rate(self) -> float:
        """g^2/kappa, the cavity-enhanced emission rate of |e>."""
        return self.g**2 / self.kappa if self.kappa > 0 else math.inf

    def bad_cavity(self, factor: float = 3.0) -> bool:
        """True when kappa >> g^2/kappa >> gamma_in, each '>>' meaning at least ``factor``."""
        if self.kappa <= 0:
            return False
        r = self.raman_rate
        return self.kappa >= factor * r and r >= factor * self.gamma_in

    def generator(self) -> np.ndarray:
        """Time-independent part of M (the pulse adds the 0<->e coupling)."""
        m = np.zeros((3, 3), dtype=np.complex128)
        m[1, 1] = 2.0 * self.delta - 1j * self.gamma_in
        m[1, 2] = m[2, 1] = 2.0 * self.g
        m[2, 2] = -1j * self.kappa
        return m

    def slowest_decay(self) -> float:
        rates = [r for r in (self.gamma_in, self.raman_rate) if r > 0]
        return min(rates) if rates else 0.0

    def with_pulse(self, pulse: PulseShape) -> "DonorParams":
        return DonorParams(self.delta, self.g, self.kappa, pulse, self.gamma_in)


@dataclass(frozen=True)
class IonParams:
    pulse: PulseShape
    gamma_yb: float = GAMMA_YB

    def __post_init__(self):
        # zero decay is accepted for closed-system checks
        if not (math.isfinite(self.gamma_yb) and self.gamma_yb >= 0):
            raise ValueError(f"gamma_yb must be a finite nonnegative rate, got {self.gamma_yb}")

    @property
    def levels(self) -> tuple:
        return ("0", "e")

    @property
    def decay_rates(self) -> np.ndarray:
        return np.array([0.0, self.gamma_yb])

    def generator(self) -> np.ndarray:
        m = np.zeros((2, 2), dtype=np.complex128)
        m[1, 1] = -1j * self.gamma_yb
        return m

    def slowest_decay(self) -> float:
        return self.gamma_yb

    def with_pulse(self, pulse: PulseShape) -> "IonParams":
        return IonParams(pulse, self.gamma_yb)


System = Union[DonorParams, IonParams]


@dataclass(frozen=True)
class TimeGrid:
    """Integration window and accuracy.

    Samples are written on a uniform lattice spanning ``[t_start, t_end]``
    whose spacing does not exceed ``max_step``, which also caps internal steps.
    ``tolerance`` bounds the max-norm local error estimate of every step.
    """

    t_start: float
    t_end: float
    max_step: float = DEFAULT_MAX_STEP
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        if not (math.isfinite(self.t_start) and math.isfinite(self.t_end)) or not self.t_start < self.t_end:
            raise ValueError(f"need t_start < t_end, got [{self.t_start}, {self.t_end}]")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")

    def sample_times(self) -> np.ndarray:
        n = int(math.ceil((self.t_end - self.t_start) / self.max_step - 1e-9))
        return np.linspace(self.t_start, self.t_end, max(n, 1) + 1)


def default_window(system: System) -> tuple[float, float]:
    """Window from well before the pulse rises until the emission has died out."""
    p = system.pulse
    start = min(0.0, p.start_time())
    # amplitude decays as exp(-rate t / 2): 20/rate leaves exp(-10) ~ 5e-5 of it
    tail = TAIL_DECAY_TIMES / system.slowest_decay() if system.slowest_decay() > 0 else 0.0
    end = p.tau + p.t_hold + 6.0 * max(p.sigma1, p.sigma2) + tail
    return start, end


def default_grid(*systems: System, max_step: float = DEFAULT_MAX_STEP, tolerance: float = DEFAULT_TOLERANCE) -> TimeGrid:
    """One grid covering the default windows of all ``systems``."""
    windows = [default_window(s) for s in systems]
    return TimeGrid(min(w[0] for w in windows), max(w[1] for w in windows), max_step, tolerance)


@dataclass(frozen=True)
class AmplitudeTrajectory:
    times: np.ndarray
    amplitudes: np.ndarray
    # cumulative int_{t_start}^{t} |a_i|^2 dt per level
    occupation_integrals: np.ndarray
    decay_rates: np.ndarray
    levels: tuple = ()
    steps: int = 0
    method: str = ""

    def __post_init__(self):
        t = np.asarray(self.times)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("a trajectory needs at least two samples")
        if np.any(np.diff(t) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if self.amplitudes.shape[0] != t.size:
            raise ValueError("amplitudes and times disagree in length")
        for arr in (self.times, self.amplitudes, self.occupation_integrals, self.decay_rates):
            if isinstance(arr, np.ndarray):
                arr.setflags(write=False)

    def __len__(self):
        return self.times.size

    def component(self, level: Union[int, str]) -> np.ndarray:
        if isinstance(level, str):
            level = self.levels.index(level)
        return self.amplitudes[:, level]

    def emitted(self) -> np.ndarray:
        """Probability lost through each decay channel up to each sample, shape (samples, levels)."""
        return self.occupation_integrals * self.decay_rates

    def probability_budget(self) -> np.ndarray:
        """Remaining population plus everything emitted; identically 1 for exact dynamics."""
        pop = np.sum(np.abs(self.amplitudes) ** 2, axis=1)
        return pop + np.sum(self.emitted(), axis=1)

    def to_csv(self, path: Union[str, Path]) -> None:
        cols = [self.times]
        header = ["t"]
        for i, name in enumerate(self.levels or range(self.amplitudes.shape[1])):
            cols += [self.amplitudes[:, i].real, self.amplitudes[:, i].imag]
            header += [f"re_a{name}", f"im_a{name}"]
        np.savetxt(path, np.column_stack(cols), delimiter=",", header=",".join(header), comments="", fmt="%.17g")


def _integrate(system: System, grid: TimeGrid, method: str, initial, check_window: bool) -> AmplitudeTrajectory:
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    n = len(system.levels)
    if initial is None:
        y0 = np.zeros(n, dtype=np.complex128)
        y0[0] = 1.0
    else:
        y0 = np.array(initial, dtype=np.complex128)
        if y0.shape != (n,):
            raise ValueError(f"initial state must have {n} components")

    pulse = system.pulse
    if check_window and pulse.omega_max > 0:
        start_level = abs(envelope_at(pulse, grid.t_start))
        if start_level >= 1e-6 * pulse.omega_max:
            raise WindowError(
                f"pulse is not negligible at t_start={grid.t_start:g} ns "
                f"(|Omega|/Omega_max = {start_level / pulse.omega_max:.3g}); start the window earlier"
            )

    out_t = grid.sample_times()
    kernel = _kernels.radau_linear if method == "radau" else _kernels.dopri5_linear
    ys, occ, steps, status = kernel(
        system.generator(), pulse.as_array(), y0, float(grid.t_start), float(grid.t_end),
        float(grid.tolerance), float(grid.max_step), out_t, MAX_STEPS,
    )
    if status == 1:
        raise StepSizeError(f"step size underflow with method {method!r}; parameters too stiff for tolerance {grid.tolerance:g}")
    if status == 2:
        raise StepSizeError(f"step budget of {MAX_STEPS} exhausted with method {method!r}")
    return AmplitudeTrajectory(out_t, ys, occ, system.decay_rates, system.levels, int(steps), method)


def integrate_donor(params: DonorParams, grid: Optional[TimeGrid] = None, *, method: str = "radau",
                    initial: Optional[Sequence[complex]] = None, check_window: bool = True) -> AmplitudeTrajectory:
    """Integrate the donor equations of motion from the pumped ground state.

    ``initial`` and ``check_window`` exist for test fixtures; the defaults start
    in ``|0>`` and insist the pulse is negligible at ``grid.t_start``.
    """
    if grid is None:
        grid = default_grid(params)
    return _integrate(params, grid, method, initial, check_window)


def integrate_ion(params: IonParams, grid: Optional[TimeGrid] = None, *, method: str = "radau",
                  initial: Optional[Sequence[complex]] = None, check_window: bool = True) -> AmplitudeTrajectory:
    if grid is None:
        grid = default_grid(params)
    return _integrate(params, grid, method, initial, check_window)


def integrate(system: System, grid: Optional[TimeGrid] = None, **kwargs) -> AmplitudeTrajectory:
    if isinstance(system, DonorParams):
        return integrate_donor(system, grid, **kwargs)
    return integrate_ion(system, grid, **kwargs)

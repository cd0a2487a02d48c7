"""Pulse-shape search maximising the real photon overlap at a fixed excitation probability.

The search is cyclic coordinate ascent with a golden-section line search on
each shape parameter. Two coordinates never enter the line searches:

* ``omega_max`` is projected onto the target emission probability inside every
  objective evaluation (quadratic weak-drive guess, then secant refinement in
  log-log coordinates);
* ``theta0`` is set analytically: a constant drive phase rotates the photon by
  the opposite phase, so the best ``theta0`` zeroes ``arg(O)``.

The objective is therefore ``|O|``, which equals ``Re(O)`` once ``theta0`` is set.
"""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from .dynamics import DonorParams, IonParams, System, TimeGrid, default_grid, integrate
from .errors import NoPhotonError, NumericalError, OptimizationError, WindowError
from .photonics import PhotonWavefunction, overlap, photon_wavefunction
from .pulse import TWO_PI, PulseShape, ghz, mhz

log = logging.getLogger(__name__)

PARAMS = ("sigma1", "sigma2", "tau", "t_hold", "omega_max", "theta0", "theta1")
SHAPE_PARAMS = ("sigma1", "sigma2", "tau", "t_hold", "theta1")
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

DEFAULT_BOUNDS = {
    "sigma1": (1.0, 30.0),
    "sigma2": (1.0, 40.0),
    "tau": (10.0, 80.0),
    "t_hold": (0.0, 20.0),
    "omega_max": (0.0, ghz(20.0)),
    "theta0": (-math.pi, math.pi),
    "theta1": (-mhz(50.0), mhz(50.0)),
}


@dataclass(frozen=True)
class OptimizationSpec:
    free_side: str
    fixed_pulse: PulseShape
    target_p1: float
    bounds: dict = field(default_factory=lambda: dict(DEFAULT_BOUNDS))
    p1_tolerance: float = 1e-4
    max_evaluations: int = 300
    seed: int = 0
    restarts: int = 0
    max_sweeps: int = 6
    # initial line-search half width as a fraction of each bound interval; halves every sweep
    initial_width: float = 0.15
    line_tolerance: float = 1e-3
    min_improvement: float = 1e-7

    def __post_init__(self):
        if self.free_side not in ("donor", "ion"):
            raise ValueError(f"free_side must be 'donor' or 'ion', got {self.free_side!r}")
        if not 0.0 < self.target_p1 <= 0.1:
            raise ValueError(f"target_p1 must lie in (0, 0.1] (weak excitation), got {self.target_p1}")
        if not self.p1_tolerance > 0:
            raise ValueError("p1_tolerance must be positive")
        if self.max_evaluations < 1:
            raise ValueError("max_evaluations must be >= 1")
        bounds = {**DEFAULT_BOUNDS, **self.bounds}
        for name, (lo, hi) in bounds.items():
            if name not in PARAMS:
                raise ValueError(f"unknown bound {name!r}")
            if not lo <= hi:
                raise ValueError(f"empty bounds for {name}: [{lo}, {hi}]")
        object.__setattr__(self, "bounds", bounds)


@dataclass
class Candidate:
    pulse: PulseShape
    overlap: complex
    p1: float

    @property
    def value(self) -> float:
        return self.overlap.real


@dataclass
class OptimizationResult:
    pulse: PulseShape
    re_overlap: float
    arg_overlap: float
    p1: float
    evaluations: int
    history: list

    def write_log(self, path: Union[str, Path]) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["iteration", *PARAMS, "re_overlap", "p1", "incumbent_re_overlap"])
            for row in self.history:
                w.writerow([row["iteration"], *(repr(row[k]) for k in PARAMS),
                            repr(row["re_overlap"]), repr(row["p1"]), repr(row["incumbent"])])


def golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float, max_iter: int = 60):
    """Maximise a unimodal ``f`` on ``[a, b]``. Returns ``(x, f(x))`` of the best point probed."""
    best_x, best_f = None, -math.inf
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for x, fx in ((c, fc), (d, fd)):
        if fx > best_f:
            best_x, best_f = x, fx
    for _ in range(max_iter):
        if abs(b - a) <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
            x, fx = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
            x, fx = d, fd
        if fx > best_f:
            best_x, best_f = x, fx
    return best_x, best_f


class BudgetExhausted(Exception):
    pass


class PulseObjective:
    """Evaluates free-side pulses against a reference photon.

    ``free_is_bra`` says whether the free photon is the conjugated factor of the
    overlap (the ion photon is, by convention ``O = int conj(A_ion) A_donor``).
    """

    def __init__(self, free_system: System, reference: PhotonWavefunction, free_is_bra: bool, grid: TimeGrid,
                 target_p1: float, p1_tolerance: float, bounds: dict, max_evaluations: int):
        self.system = free_system
        self.reference = reference
        self.free_is_bra = free_is_bra
        self.grid = grid
        self.target = target_p1
        self.p1_tol = p1_tolerance
        self.bounds = bounds
        self.max_evaluations = max_evaluations
        self.evaluations = 0
        self.history = []
        self.incumbent: Optional[Candidate] = None
        self._cache = {}

    def _photon(self, pulse: PulseShape) -> PhotonWavefunction:
        traj = integrate(self.system.with_pulse(pulse), self.grid)
        if isinstance(self.system, DonorParams):
            return photon_wavefunction(traj, self.system.kappa, 2)
        return photon_wavefunction(traj, self.system.gamma_yb, 1)

    def _p1(self, pulse: PulseShape, omega: float):
        if omega <= 0:
            return 0.0, None
        try:
            psi = self._photon(pulse.replace(omega_max=omega))
        except NoPhotonError:
            return 0.0, None
        return psi.p_emit, psi

    def project(self, pulse: PulseShape):
        """Rescale omega_max so the emission probability hits the target; None if impossible."""
        lo, hi = self.bounds["omega_max"]
        omega = pulse.omega_max if pulse.omega_max > 0 else 0.5 * hi
        omega = min(max(omega, lo), hi)
        p, psi = self._p1(pulse, omega)
        points = []
        for _ in range(12):
            if psi is not None and abs(p - self.target) <= self.p1_tol:
                return pulse.replace(omega_max=omega), psi, p
            if p <= 0:
                omega_new = omega * 2.0
            elif len(points) == 0:
                omega_new = omega * math.sqrt(self.target / p)
            else:
                (w0, q0) = points[-1]
                slope = (math.log(p) - math.log(q0)) / (math.log(omega) - math.log(w0)) if omega != w0 else 2.0
                if not slope > 0.1:
                    slope = 2.0
                omega_new = omega * math.exp((math.log(self.target) - math.log(p)) / slope)
            if p > 0:
                points.append((omega, p))
            omega_new = min(max(omega_new, lo), hi)
            if omega_new == omega:
                return None
            omega = omega_new
            p, psi = self._p1(pulse, omega)
        if psi is not None and abs(p - self.target) <= self.p1_tol:
            return pulse.replace(omega_max=omega), psi, p
        return None

    def evaluate(self, pulse: PulseShape) -> Optional[Candidate]:
        key = tuple(round(getattr(pulse, k), 12) for k in SHAPE_PARAMS)
        if key in self._cache:
            return self._cache[key]
        if self.evaluations >= self.max_evaluations:
            raise BudgetExhausted
        self.evaluations += 1
        cand = None
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                projected = self.project(pulse)
                if projected is not None:
                    pulse, psi, p = projected
                    o = overlap(psi, self.reference) if self.free_is_bra else overlap(self.reference, psi)
                    # rotating the free photon by exp(-i d) needs theta0 -> theta0 + d
                    shift = -math.atan2(o.imag, o.real) if self.free_is_bra else math.atan2(o.imag, o.real)
                    theta0 = math.remainder(pulse.theta0 + shift, TWO_PI)
                    cand = Candidate(pulse.replace(theta0=theta0), complex(abs(o), 0.0), p)
        except (WindowError, NumericalError, ValueError) as exc:
            log.debug("candidate rejected: %s", exc)
            cand = None
        self._cache[key] = cand
        self._record(pulse, cand)
        return cand

    def _record(self, pulse: PulseShape, cand: Optional[Candidate]):
        if cand is not None and (self.incumbent is None or cand.value > self.incumbent.value):
            self.incumbent = cand
        shown = cand.pulse if cand is not None else pulse
        self.history.append({
            "iteration": self.evaluations,
            **{k: getattr(shown, k) for k in PARAMS},
            "re_overlap": cand.value if cand is not None else math.nan,
            "p1": cand.p1 if cand is not None else math.nan,
            "incumbent": self.incumbent.value if self.incumbent is not None else math.nan,
        })


def _clip(pulse: PulseShape, bounds: dict) -> PulseShape:
    changes = {}
    for k in SHAPE_PARAMS:
        lo, hi = bounds[k]
        changes[k] = min(max(getattr(pulse, k), lo), hi)
    return pulse.replace(**changes)


def coordinate_ascent(obj: PulseObjective, start: Candidate, spec: OptimizationSpec) -> Candidate:
    best = start
    widths = {k: spec.initial_width * (spec.bounds[k][1] - spec.bounds[k][0]) for k in SHAPE_PARAMS}
    for sweep in range(spec.max_sweeps):
        sweep_start = best.value
        for name in SHAPE_PARAMS:
            lo, hi = spec.bounds[name]
            if hi <= lo or widths[name] <= 0:
                continue
            x0 = getattr(best.pulse, name)
            a, b = max(lo, x0 - widths[name]), min(hi, x0 + widths[name])
            base = best.pulse

            def along(x, base=base, name=name):
                c = obj.evaluate(base.replace(**{name: x}))
                return c.value if c is not None else -math.inf

            x, fx = golden_section_max(along, a, b, tol=spec.line_tolerance * (hi - lo))
            if x is not None and fx > best.value + 1e-12:
                best = obj.evaluate(base.replace(**{name: x}))
        log.info("sweep %d: Re(O) = %.8f (%d evaluations)", sweep, best.value, obj.evaluations)
        for k in widths:
            widths[k] *= 0.5
        if best.value - sweep_start < spec.min_improvement:
            break
    return best


def optimize_pulse(spec: OptimizationSpec, donor: DonorParams, ion: IonParams,
                   grid: Optional[TimeGrid] = None) -> OptimizationResult:
    """Search the free side's pulse for the largest Re(O) at the target excitation probability.

    The free system starts from its own pulse (clipped into the bounds); the
    other system is driven by ``spec.fixed_pulse``.
    """
    if spec.free_side == "donor":
        fixed = ion.with_pulse(spec.fixed_pulse)
        free = donor
    else:
        fixed = donor.with_pulse(spec.fixed_pulse)
        free = ion
    if grid is None:
        g = default_grid(fixed, free)
        pad = 2.0 * max(free.pulse.sigma1, free.pulse.sigma2)
        grid = TimeGrid(g.t_start - pad, g.t_end + pad, g.max_step, g.tolerance)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        traj = integrate(fixed, grid)
    if isinstance(fixed, DonorParams):
        reference = photon_wavefunction(traj, fixed.kappa, 2)
    else:
        reference = photon_wavefunction(traj, fixed.gamma_yb, 1)

    return optimize_against(free, reference, free_is_bra=(spec.free_side == "ion"), grid=grid, spec=spec)


def optimize_against(free: System, reference: PhotonWavefunction, free_is_bra: bool, grid: TimeGrid,
                     spec: OptimizationSpec) -> OptimizationResult:
    """Core search: optimise ``free``'s pulse against a fixed reference photon."""
    obj = PulseObjective(free, reference, free_is_bra, grid, spec.target_p1, spec.p1_tolerance,
                         spec.bounds, spec.max_evaluations)
    rng = np.random.default_rng(spec.seed)
    best = None
    try:
        start = obj.evaluate(_clip(free.pulse, spec.bounds))
        if start is not None:
            best = coordinate_ascent(obj, start, spec)
        for _ in range(spec.restarts):
            trial = free.pulse.replace(**{k: float(rng.uniform(*spec.bounds[k])) for k in SHAPE_PARAMS})
            cand = obj.evaluate(trial)
            if cand is None:
                continue
            cand = coordinate_ascent(obj, cand, spec)
            if best is None or cand.value > best.value:
                best = cand
    except BudgetExhausted:
        log.info("evaluation budget of %d exhausted", spec.max_evaluations)
    best = obj.incumbent if best is None or (obj.incumbent and obj.incumbent.value > best.value) else best
    if best is None:
        raise OptimizationError("no feasible pulse found: target_p1 unreachable within the omega_max bounds or budget exhausted")
    return OptimizationResult(
        pulse=best.pulse, re_overlap=best.overlap.real, arg_overlap=math.atan2(best.overlap.imag, best.overlap.real),
        p1=best.p1, evaluations=obj.evaluations, history=obj.history,
    )
